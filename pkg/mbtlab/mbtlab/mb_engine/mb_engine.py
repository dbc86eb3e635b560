# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Markov branching samplers.

Finite trees: a node carrying a subtree of size s draws its first split from q_s and passes the parts
to its children. Vertex and internal-vertex semantics split once per node; leaf semantics first grow a
unary branch of geometric length with parameter 1 - q_s(s), then split conditioned on not being unary.

Infinite trees: backbone nodes draw (m_∞, λ) from the limit split, have m_∞ backbone children and
graft finite Markov branching subtrees of sizes λ. Only the radius-R ball is built, plus one level to
decide which nodes at depth R are leaves.
"""

import math
from dataclasses import dataclass

import numpy as np

from mbtlab.exceptions import BudgetExceededError, ValidationError, throw
from mbtlab.mbtlab.analysis.analysis import VolumeCurve
from mbtlab.mbtlab.split_laws.split_laws import INTERNAL, LEAVES, VERTICES
from mbtlab.mbtlab.tree_core.tree_core import Tree

DEFAULT_BACKBONE_NODE_CAP = 10**7
INFINITE = -1


@dataclass(frozen=True, eq=False)
class InfiniteTreeBall:
	"""
	The radius-R ball of an infinite tree.

	Per-node arrays follow the arena order of `tree`. `residual` is the size of the finite subtree
	rooted at a node (INFINITE on the backbone) or None when the construction does not track sizes.
	"""

	tree: Tree
	R: int
	backbone: np.ndarray
	frontier: np.ndarray
	is_leaf: np.ndarray
	residual: np.ndarray | None = None
	measure: str = VERTICES

	@property
	def n_vertices(self):
		return self.tree.size

	@property
	def n_leaves(self):
		return int(np.count_nonzero(self.is_leaf))

	@property
	def spine_length(self):
		return int(self.tree.depth[self.backbone].max())


class TreeArena:
	"""Growing parent array with per-node depth, backbone flag and residual size."""

	def __init__(self):
		self.parent = []
		self.depth = []
		self.backbone = []
		self.residual = []

	@property
	def size(self):
		return len(self.parent)

	def add(self, parent, residual=INFINITE, backbone=False):
		self.parent.append(parent)
		self.depth.append(0 if parent < 0 else self.depth[parent] + 1)
		self.backbone.append(backbone)
		self.residual.append(residual)
		return len(self.parent) - 1

	def extend(self, parents, depth, residual=INFINITE):
		"""Add one node per entry of `parents`, all at `depth`; return their indices."""
		start = len(self.parent)
		count = len(parents)
		self.parent.extend(np.asarray(parents).tolist())
		self.depth.extend([depth] * count)
		self.backbone.extend([False] * count)
		self.residual.extend([residual] * count)
		return np.arange(start, start + count, dtype=np.int64)

	def to_tree(self):
		return Tree(self.parent)

	def to_ball(self, R, measure=VERTICES, track_residual=False):
		"""Keep depths <= R; nodes at depth R + 1 only decide leaf and frontier flags."""
		parent = np.asarray(self.parent, dtype=np.int64)
		depth = np.asarray(self.depth, dtype=np.int64)
		has_child = np.bincount(parent[parent >= 0], minlength=len(parent)) > 0
		keep = depth <= R
		new_index = np.cumsum(keep) - 1
		kept_parent = parent[keep]
		kept_parent = np.where(kept_parent < 0, -1, new_index[np.maximum(kept_parent, 0)])
		tree = Tree(kept_parent)
		order = tree.source_index

		def reorder(values):
			return np.asarray(values)[keep][order]

		residual = reorder(np.asarray(self.residual, dtype=np.int64)) if track_residual else None
		return InfiniteTreeBall(
			tree=tree,
			R=R,
			backbone=reorder(np.asarray(self.backbone, dtype=bool)),
			frontier=reorder((depth == R) & has_child),
			is_leaf=reorder(~has_child),
			residual=residual,
			measure=measure,
		)


class _Expander:
	"""Expands finite Markov branching subtrees node by node up to a depth limit."""

	def __init__(self, law, arena, rng, limit):
		self.law = law
		self.arena = arena
		self.rng = rng
		self.limit = limit
		self.stack = []
		self._unsplit = {}

	def push(self, node, size):
		self.stack.append((node, size))

	def run(self):
		arena = self.arena
		while self.stack:
			node, size = self.stack.pop()
			if arena.depth[node] >= self.limit:
				continue
			if self.law.semantics == LEAVES:
				node = self._unary_branch(node, size)
				if node is None:
					continue
				parts = self.law.sample_proper_split(size, self.rng).parts
			elif size <= self.law.min_size:
				continue
			else:
				parts = tuple(self.law.sample_split(size, self.rng))
			for part in parts:
				self.push(arena.add(node, part), part)

	def unsplit(self, size):
		if size not in self._unsplit:
			u = self.law.prob_unsplit(size)
			if u >= 1:
				throw(f"{self.law.describe()} never splits a tree with {size} leaves", ValidationError)
			self._unsplit[size] = u
		return self._unsplit[size]

	def _unary_branch(self, node, size):
		"""Grow the geometric unary branch below node; return its bottom or None when cut by the limit."""
		u = self.unsplit(size)
		length = int(self.rng.geometric(1 - u)) - 1 if u > 0 else 0
		room = self.limit - self.arena.depth[node]
		for _ in range(min(length, room)):
			node = self.arena.add(node, size)
		return node if length < room else None


def _sample_finite(law, n, rng, semantics, depth):
	if law.semantics != semantics:
		throw(f"{law.describe()} counts {law.semantics}, not {semantics}")
	law.require_supported(n)
	if depth is not None and depth < 0:
		throw(f"Depth must be >= 0, got {depth}")
	arena = TreeArena()
	root = arena.add(-1, n)
	expander = _Expander(law, arena, rng, math.inf if depth is None else depth)
	expander.push(root, n)
	expander.run()
	return arena.to_tree()


def sample_mb_vertices(law, n, rng, depth=None):
	"""
	MB^q_n: a tree with n vertices, or its ball of radius `depth`.

	Args:
		law: SplitLaw with vertex semantics
		n: number of vertices
		depth: stop expanding below this depth; the result is then distributed as ball(T_n, depth)
	"""
	return _sample_finite(law, n, rng, VERTICES, depth)


def sample_mb_leaves(law, n, rng, depth=None):
	"""MB^{L,q}_n: a tree with n leaves, or its ball of radius `depth`."""
	return _sample_finite(law, n, rng, LEAVES, depth)


def sample_mb_internal(law, n, rng, depth=None):
	"""A k-ary Markov branching tree with n internal vertices."""
	return _sample_finite(law, n, rng, INTERNAL, depth)


def sample_mb(law, n, rng, depth=None):
	return _sample_finite(law, n, rng, law.semantics, depth)


def sample_infinite_ball(
	law, R, rng, measure=None, limit_split=None, backbone_node_cap=DEFAULT_BACKBONE_NODE_CAP
):
	"""
	Radius-R ball of the infinite Markov branching tree of `law`.

	Args:
		law: SplitLaw for the finite grafts
		R: ball radius
		measure: "vertices" or "leaves", defaults to the natural measure of the law
		limit_split: callable rng -> (m_∞, λ) replacing law.sample_limit_split
		backbone_node_cap: largest number of backbone nodes before giving up

	Returns:
		InfiniteTreeBall
	"""
	if R < 0:
		throw(f"Ball radius must be >= 0, got {R}")
	limit_split = limit_split or law.sample_limit_split
	arena = TreeArena()
	expander = _Expander(law, arena, rng, R + 1)
	spine = [arena.add(-1, INFINITE, backbone=True)]
	backbone_nodes = 1
	while spine:
		node = spine.pop()
		if arena.depth[node] > R:
			continue
		m_inf, lam = limit_split(rng)
		backbone_nodes += m_inf
		if backbone_nodes > backbone_node_cap:
			throw(f"Backbone exceeds {backbone_node_cap} nodes within radius {R}", BudgetExceededError)
		for _ in range(m_inf):
			spine.append(arena.add(node, INFINITE, backbone=True))
		for part in tuple(lam):
			expander.push(arena.add(node, part), part)
	expander.run()
	return arena.to_ball(R, measure or law.measure, track_residual=True)


def volume_curve(ball, measure=None, r_max=None):
	"""
	V(r) = μ(T|_r) for r = 0..r_max.

	The vertex measure counts every node (V(0) = 1); the leaf measure counts leaves.
	"""
	measure = measure or ball.measure
	r_max = ball.R if r_max is None else r_max
	if r_max > ball.R:
		throw(f"Ball of radius {ball.R} cannot give V({r_max})")
	depth = ball.tree.depth
	if measure == VERTICES:
		mass = np.ones(len(depth), dtype=np.int64)
	elif measure == LEAVES:
		if ball.is_leaf is None:
			throw("Leaf flags of this ball are not resolved at the frontier")
		mass = ball.is_leaf.astype(np.int64)
	else:
		throw(f"Unknown measure {measure!r}")
	per_level = np.bincount(depth, weights=mass, minlength=ball.R + 1)[: r_max + 1]
	return VolumeCurve(np.arange(r_max + 1), np.cumsum(per_level).astype(np.int64), measure)
