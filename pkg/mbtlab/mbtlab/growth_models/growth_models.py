# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Random trees built by their defining dynamics rather than by split recursion.

Every sampler here is an independent oracle for a split law: uniform Cayley and recursive trees,
their cut-trees, α-γ growth, k-ary growth, Kesten's tree and the conditioned Galton-Watson tree.
"""

import math
from collections import Counter, deque
from functools import lru_cache

import networkx as nx
import numpy as np

from mbtlab.exceptions import BudgetExceededError, ValidationError, throw
from mbtlab.mbtlab.analysis.analysis import VolumeCurve
from mbtlab.mbtlab.dist_lib.dist_lib import (
	INT_CAP,
	binary_offspring,
	geometric_offspring,
	poisson_offspring,
	size_biased,
	stable_offspring,
)
from mbtlab.mbtlab.mb_engine.mb_engine import TreeArena
from mbtlab.mbtlab.tree_core.tree_core import Tree

DEFAULT_NODE_CAP = 10**7
CONDITIONING_ATTEMPTS = 1_000_000


def _require_size(n, smallest=1):
	if int(n) != n or n < smallest:
		throw(f"Tree size must be an integer >= {smallest}, got {n}")
	return int(n)


def sample_cayley(n, rng):
	"""Uniform labelled tree on {1..n} by Prüfer decoding, rooted at a uniform vertex."""
	n = _require_size(n)
	if n == 1:
		return Tree([-1], labels=[1])
	graph = nx.from_prufer_sequence(rng.integers(n, size=n - 2).tolist())
	root = int(rng.integers(n))
	parent = np.full(n, -1, dtype=np.int64)
	for child, pred in nx.bfs_predecessors(graph, root):
		parent[child] = pred
	return Tree(parent, labels=range(1, n + 1))


def sample_recursive_tree(n, rng):
	"""Vertex i + 1 attaches to a uniform vertex among 1..i."""
	n = _require_size(n)
	parent = np.empty(n, dtype=np.int64)
	parent[0] = -1
	if n > 1:
		parent[1:] = np.floor(rng.random(n - 1) * np.arange(1, n)).astype(np.int64)
	return Tree(parent, labels=range(1, n + 1))


class _EdgePool:
	"""Edges of one component with O(1) uniform pick and removal."""

	def __init__(self):
		self.edges = []
		self.index = {}

	def __len__(self):
		return len(self.edges)

	def add(self, edge):
		self.index[edge] = len(self.edges)
		self.edges.append(edge)

	def remove(self, edge):
		i = self.index.pop(edge)
		last = self.edges.pop()
		if i < len(self.edges):
			self.edges[i] = last
			self.index[last] = i

	def pick(self, rng):
		edge = self.edges[int(rng.integers(len(self.edges)))]
		self.remove(edge)
		return edge


def _smaller_side(adjacency, a, b):
	"""After removing edge a-b, explore both sides in lockstep; return (start, nodes) of the smaller."""
	seen = ({a}, {b})
	queues = (deque([a]), deque([b]))
	while True:
		for side in (0, 1):
			if not queues[side]:
				return (a, b)[side], seen[side]
			u = queues[side].popleft()
			for w in adjacency[u]:
				if w not in seen[side]:
					seen[side].add(w)
					queues[side].append(w)


def _tree_labels(t):
	return t.labels if t.labels is not None else tuple(range(1, t.size + 1))


def cut_tree(t, rng):
	"""
	Cut(t): remove a uniform edge, recurse on both components, join the two cut-trees at a new root.

	The leaves of the result carry the labels of the vertices of t.
	"""
	n = t.size
	labels = _tree_labels(t)
	adjacency = [set() for _ in range(n)]
	pool = _EdgePool()
	for v in range(1, n):
		p = int(t.parent[v])
		adjacency[v].add(p)
		adjacency[p].add(v)
		pool.add((p, v))

	out_parent, out_labels = [], []
	stack = [(pool, 0, -1)]
	while stack:
		pool, vertex, attach = stack.pop()
		me = len(out_parent)
		out_parent.append(attach)
		if not len(pool):
			out_labels.append(labels[vertex])
			continue
		out_labels.append(None)

		a, b = pool.pick(rng)
		adjacency[a].discard(b)
		adjacency[b].discard(a)
		start, nodes = _smaller_side(adjacency, a, b)
		side = _EdgePool()
		for u in nodes:
			for w in adjacency[u]:
				if u < w:
					edge = (u, w) if (u, w) in pool.index else (w, u)
					pool.remove(edge)
					side.add(edge)
		other = b if start == a else a
		stack.append((pool, other, me))
		stack.append((side, start, me))
	return Tree(out_parent, labels=out_labels)


def cut_tree_union_find(t, rng):
	"""Cut(t) by merging components along a uniform edge order, last cut first."""
	n = t.size
	labels = _tree_labels(t)
	out_parent = [-1] * (2 * n - 1)
	out_labels = list(labels) + [None] * (n - 1)
	root = list(range(n))
	top = list(range(n))

	def find(u):
		while root[u] != u:
			root[u] = root[root[u]]
			u = root[u]
		return u

	edges = np.arange(1, n)
	rng.shuffle(edges)
	node = n
	for v in edges[::-1]:
		ra, rb = find(int(v)), find(int(t.parent[v]))
		out_parent[top[ra]] = node
		out_parent[top[rb]] = node
		root[ra] = rb
		top[rb] = node
		node += 1
	return Tree(out_parent, labels=out_labels)


def grow_alpha_gamma(alpha, gamma, n, rng):
	"""
	α-γ growth from the cherry to n leaves.

	A new leaf goes on an edge ending in a leaf (weight 1-α), on an edge ending in an internal vertex
	(weight γ, the root edge included) or on an internal vertex u directly (weight (c_u - 1)α - γ).

	Args:
		alpha, gamma: 0 <= γ <= α <= 1
		n: number of leaves

	Returns:
		Tree with n leaves
	"""
	if not 0 <= gamma <= alpha <= 1:
		throw(f"The α-γ model needs 0 <= γ <= α <= 1, got α={alpha}, γ={gamma}")
	n = _require_size(n)
	if n == 1:
		return Tree.single_vertex()

	parent = [-1, 0, 0]
	child_count = [2, 0, 0]
	leaves = [1, 2]
	internal = [0]
	# vertex u appears c_u - 1 times
	slots = [0]

	def insert_on_edge(v):
		w = len(parent)
		parent.append(parent[v])
		child_count.append(2)
		parent[v] = w
		parent.append(w)
		child_count.append(0)
		internal.append(w)
		slots.append(w)
		leaves.append(w + 1)

	def attach_to(u):
		parent.append(u)
		child_count.append(0)
		child_count[u] += 1
		slots.append(u)
		leaves.append(len(parent) - 1)

	for _ in range(n - 2):
		leaf_weight = len(leaves) * (1 - alpha)
		edge_weight = len(internal) * gamma
		vertex_weight = alpha * len(slots) - gamma * len(internal)
		u = rng.random() * (leaf_weight + edge_weight + max(vertex_weight, 0.0))
		if u < leaf_weight:
			insert_on_edge(leaves[int(rng.integers(len(leaves)))])
		elif u < leaf_weight + edge_weight or vertex_weight <= 0:
			insert_on_edge(internal[int(rng.integers(len(internal)))])
		else:
			while True:
				v = slots[int(rng.integers(len(slots)))]
				weight = (child_count[v] - 1) * alpha
				if rng.random() * weight < weight - gamma:
					break
			attach_to(v)
	return Tree(parent)


def grow_kary(k, n, rng):
	"""k-ary growth: n times, pick a uniform edge of the planted tree, split it and hang k-1 new leaves."""
	if int(k) != k or k < 2:
		throw(f"k-ary growth needs an integer k >= 2, got {k}")
	k = int(k)
	n = _require_size(n, smallest=0)
	parent = [-1]
	for _ in range(n):
		v = int(rng.integers(len(parent)))
		w = len(parent)
		parent.append(parent[v])
		parent[v] = w
		parent.extend([w] * (k - 1))
	return Tree(parent)


def kesten_ball(xi, R, rng, xi_hat=None, node_cap=DEFAULT_NODE_CAP):
	"""
	Radius-R ball of Kesten's tree: a spine whose vertices have X + 1 ~ ξ̂ children, the X extra ones
	roots of independent ξ-Galton-Watson trees.

	Generations are drawn one level beyond R so leaf flags at depth R are exact.
	"""
	xi = xi.require_critical()
	if R < 0:
		throw(f"Ball radius must be >= 0, got {R}")
	xi_hat = xi_hat or size_biased(xi)
	arena = TreeArena()
	spine = arena.add(-1, backbone=True)
	bush = np.empty(0, dtype=np.int64)
	for d in range(R + 1):
		counts = xi.sample(rng, size=len(bush)) if len(bush) else np.empty(0, dtype=np.int64)
		extra = xi_hat.sample(rng) - 1
		if arena.size + extra + float(counts.sum()) > node_cap:
			throw(f"Kesten ball of radius {R} exceeds {node_cap} nodes", BudgetExceededError)
		next_spine = arena.add(spine, backbone=True)
		parents = np.concatenate([np.full(extra, spine, dtype=np.int64), np.repeat(bush, counts)])
		bush = arena.extend(parents, depth=d + 1)
		spine = next_spine
	return arena.to_ball(R)


def ball_shape(code):
	"""Canonical ball code as nested tuples: a vertex is the sorted tuple of its children."""
	stack = [[]]
	for ch in code:
		if ch == "(":
			stack.append([])
		elif ch == ")":
			if len(stack) == 1:
				throw(f"Malformed tree code {code!r}")
			node = tuple(sorted(stack.pop()))
			stack[-1].append(node)
	if len(stack) != 1 or len(stack[0]) != 1:
		throw(f"Malformed tree code {code!r}")
	return stack[0][0]


def _arrangements(children):
	"""Plane orderings k!/∏ m_j! of an unordered child multiset."""
	out = math.factorial(len(children))
	for m in Counter(children).values():
		out //= math.factorial(m)
	return out


def kesten_ball_law(xi, R, xi_hat=None):
	"""
	Exact law of the unordered radius-R ball of Kesten's tree.

	A ξ-Galton-Watson vertex with children c_1..c_k has weight ξ(k) k!/∏ m_j! ∏ G(c_i). A spine vertex
	has weight ξ̂(k) (k-1)!/∏ m_j! Σ_c m_c K(c) ∏_{others} G, the sum running over distinct child
	shapes that may carry the spine.

	Returns:
		callable code (or Tree) -> probability
	"""
	xi = xi.require_critical()
	if R < 0:
		throw(f"Ball radius must be >= 0, got {R}")
	xi_hat = xi_hat or size_biased(xi)

	@lru_cache(maxsize=None)
	def bush(shape, r):
		if r == 0:
			return 1.0 if not shape else 0.0
		p = xi.pmf(len(shape)) * _arrangements(shape)
		for child in shape:
			if p == 0:
				break
			p *= bush(child, r - 1)
		return p

	@lru_cache(maxsize=None)
	def spine(shape, r):
		if r == 0:
			return 1.0 if not shape else 0.0
		if not shape:
			return 0.0
		counts = Counter(shape)
		total = 0.0
		for carrier, m in counts.items():
			rest = list(shape)
			rest.remove(carrier)
			term = m * spine(carrier, r - 1)
			for child in rest:
				if term == 0:
					break
				term *= bush(child, r - 1)
			total += term
		return xi_hat.pmf(len(shape)) * _arrangements(shape) / len(shape) * total

	def pmf(code):
		code = code.to_text() if isinstance(code, Tree) else code
		return spine(ball_shape(code), R)

	return pmf


def kesten_volume_curve(xi, R, rng, measure="vertices", xi_hat=None):
	"""
	V(0..R) of Kesten's tree from generation sizes alone.

	Z_{d+1} = (children of the Z_d bush vertices) + X_d with X_d + 1 ~ ξ̂. Depth d holds Z_d + 1 vertices
	and as many leaves as bush vertices without children.
	"""
	xi = xi.require_critical()
	xi_hat = xi_hat or size_biased(xi)
	if measure not in ("vertices", "leaves"):
		throw(f"Unknown measure {measure!r}", ValidationError)
	z = 0
	per_level = np.empty(R + 1, dtype=np.float64)
	for d in range(R + 1):
		total, childless = xi.sample_generation(rng, z)
		per_level[d] = z + 1 if measure == "vertices" else childless
		z = int(min(total + xi_hat.sample(rng) - 1, INT_CAP))
	values = np.minimum(np.cumsum(per_level), INT_CAP).astype(np.int64)
	return VolumeCurve(np.arange(R + 1), values, measure)


def sample_conditioned_gw(xi, n, rng, attempts=CONDITIONING_ATTEMPTS):
	"""
	ξ-Galton-Watson tree conditioned on n vertices by the cycle lemma.

	Offspring counts are drawn until they sum to n - 1, rotated to start after the first minimum of
	the Łukasiewicz path and decoded as a depth-first child-count sequence.
	"""
	n = _require_size(n)
	for _ in range(attempts):
		counts = np.atleast_1d(xi.sample(rng, size=n))
		if int(counts.sum()) == n - 1:
			break
	else:
		throw(f"No offspring sequence of length {n} summed to {n - 1}", BudgetExceededError)

	walk = np.cumsum(counts - 1)
	counts = np.roll(counts, -(int(np.argmin(walk)) + 1))

	parent = np.empty(n, dtype=np.int64)
	parent[0] = -1
	open_nodes, remaining = [], []
	for i, c in enumerate(counts.tolist()):
		if i:
			parent[i] = open_nodes[-1]
			remaining[-1] -= 1
			if not remaining[-1]:
				open_nodes.pop()
				remaining.pop()
		if c:
			open_nodes.append(i)
			remaining.append(c)
	return Tree(parent)


def offspring_law(params):
	"""OffspringLaw from {"xi": poisson|geometric|binary|stable, "beta": ...}."""
	name = params.get("xi", "poisson")
	if name == "poisson":
		return poisson_offspring()
	if name == "geometric":
		return geometric_offspring()
	if name == "binary":
		return binary_offspring()
	if name == "stable":
		return stable_offspring(float(params.get("beta", 1.5)))
	throw(f"Unknown offspring law {name!r}", ValidationError)


def cayley_model(params, n, rng):
	return sample_cayley(n, rng)


def recursive_model(params, n, rng):
	return sample_recursive_tree(n, rng)


def cayley_cut_model(params, n, rng):
	return cut_tree(sample_cayley(n, rng), rng)


def recursive_cut_model(params, n, rng):
	return cut_tree(sample_recursive_tree(n, rng), rng)


def alpha_gamma_model(params, n, rng):
	return grow_alpha_gamma(float(params.get("alpha", 0.5)), float(params.get("gamma", 0.5)), n, rng)


def kary_model(params, n, rng):
	return grow_kary(int(params.get("k", 3)), n, rng)


def kesten_model(params, n, rng):
	"""The radius-n ball of Kesten's tree."""
	return kesten_ball(offspring_law(params), n, rng).tree
