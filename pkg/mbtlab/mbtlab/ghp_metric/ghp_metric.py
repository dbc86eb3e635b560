# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Pointed weighted finite metric spaces and the Gromov-Hausdorff-Prokhorov distance.

d_GHP(X, Y) = inf over pointed correspondences C and finite measures π on X × Y of
½ dis C ∨ D(π; μ_X, μ_Y) ∨ π(C^c). The exact value is computed for tiny spaces only; larger inputs get
an interval between the height/mass lower bound and a constructive upper bound.
"""

import math
from collections import namedtuple
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from mbtlab.exceptions import BudgetExceededError, NumericalError, ValidationError, throw

DEFAULT_EXACT_CAP = 30
METRIC_TOL = 1e-12
TRIANGLE_CHECK_CAP = 200
LP_PAIR_CAP = 40_000

GHPInterval = namedtuple("GHPInterval", ["lower", "upper", "exact"])
ExtendedGHP = namedtuple("ExtendedGHP", ["value", "lower", "error"])


@dataclass(frozen=True, eq=False)
class PointedMetricSpace:
	"""(X, d, ρ, μ) on points 0..m-1."""

	dist: np.ndarray
	root: int = 0
	mass: np.ndarray | None = None

	def __post_init__(self):
		d = np.asarray(self.dist, dtype=np.float64)
		if d.ndim != 2 or d.shape[0] != d.shape[1] or not len(d):
			throw("A distance matrix is square and non-empty")
		mass = np.zeros(len(d)) if self.mass is None else np.asarray(self.mass, dtype=np.float64)
		object.__setattr__(self, "dist", d)
		object.__setattr__(self, "mass", mass)
		if mass.shape != (len(d),) or np.any(mass < 0):
			throw("Masses are non-negative, one per point")
		if not 0 <= self.root < len(d):
			throw(f"Root {self.root} is not a point of the space")
		if np.any(d < -METRIC_TOL) or np.any(np.abs(np.diag(d)) > METRIC_TOL):
			throw("Distances are non-negative with a zero diagonal")
		if np.max(np.abs(d - d.T)) > METRIC_TOL:
			throw("Distances are symmetric")
		if len(d) <= TRIANGLE_CHECK_CAP:
			violation = d[:, None, :] - d[:, :, None] - d[None, :, :]
			if violation.max() > METRIC_TOL:
				throw("Distances violate the triangle inequality")

	@property
	def size(self):
		return len(self.dist)

	@property
	def heights(self):
		return self.dist[self.root]

	@property
	def height(self):
		"""|X|: the largest distance to the root."""
		return float(self.heights.max())

	@property
	def total_mass(self):
		return float(self.mass.sum())


def from_tree(t, a=1.0, b=1.0, measure="vertices"):
	"""
	The vertex set of t with graph distance times a and counting measure times b.

	Args:
		measure: "vertices" puts mass b on every vertex, "leaves" on every leaf
	"""
	n = t.size
	if n == 1:
		dist = np.zeros((1, 1))
	else:
		child = np.arange(1, n)
		adjacency = csr_matrix((np.ones(n - 1), (child, t.parent[1:])), shape=(n, n))
		dist = shortest_path(adjacency, directed=False, unweighted=True) * a
	if measure == "vertices":
		mass = np.full(n, float(b))
	elif measure == "leaves":
		mass = np.where(t.child_counts == 0, float(b), 0.0)
	else:
		throw(f"Unknown measure {measure!r}")
	return PointedMetricSpace(dist, 0, mass)


def rescale(X, a, b):
	"""(aX, bμ_X)."""
	if a < 0 or b < 0:
		throw("Scale factors are non-negative")
	return PointedMetricSpace(X.dist * a, X.root, X.mass * b)


def truncate(X, r):
	"""X|_r: points at distance at most r from the root with the restricted measure."""
	keep = np.flatnonzero(X.heights <= r + METRIC_TOL)
	root = int(np.searchsorted(keep, X.root))
	return PointedMetricSpace(X.dist[np.ix_(keep, keep)], root, X.mass[keep])


def concatenate_spaces(spaces):
	"""⟨X_i⟩: glue the roots together; points of different pieces meet through the root."""
	if not spaces:
		throw("Nothing to concatenate")
	if len(spaces) == 1:
		return spaces[0]
	heights, blocks, masses = [], [], []
	root_mass = 0.0
	for X in spaces:
		others = np.flatnonzero(np.arange(X.size) != X.root)
		heights.append(X.heights[others])
		blocks.append(X.dist[np.ix_(others, others)])
		masses.append(X.mass[others])
		root_mass += X.mass[X.root]

	h = np.concatenate([[0.0], *heights])
	dist = h[:, None] + h[None, :]
	offset = 1
	for block in blocks:
		k = len(block)
		dist[offset : offset + k, offset : offset + k] = block
		offset += k
	np.fill_diagonal(dist, 0.0)
	return PointedMetricSpace(dist, 0, np.concatenate([[root_mass], *masses]))


def distortion(C, X, Y):
	"""dis C = max |d_X(x, x') - d_Y(y, y')| over pairs of C."""
	xs = np.array([x for x, _ in C], dtype=np.int64)
	ys = np.array([y for _, y in C], dtype=np.int64)
	return float(np.max(np.abs(X.dist[np.ix_(xs, xs)] - Y.dist[np.ix_(ys, ys)])))


def discrepancy(pi, mu_x, mu_y):
	"""‖μ_X - π p_X^-1‖ + ‖μ_Y - π p_Y^-1‖ in total variation norm."""
	pi = np.asarray(pi, dtype=np.float64)
	return float(np.abs(mu_x - pi.sum(axis=1)).sum() + np.abs(mu_y - pi.sum(axis=0)).sum())


def is_correspondence(C, X, Y):
	"""Whether C contains (ρ_X, ρ_Y) and covers both spaces."""
	pairs = set(C)
	return (
		(X.root, Y.root) in pairs
		and {x for x, _ in pairs} == set(range(X.size))
		and {y for _, y in pairs} == set(range(Y.size))
	)


def coupling_cost(C, X, Y):
	"""
	min over π >= 0 of D(π; μ_X, μ_Y) ∨ π(C^c), as a linear program.

	Returns:
		(value, optimal π as an |X| x |Y| matrix)
	"""
	m, n = X.size, Y.size
	k = m * n
	inside = np.zeros((m, n), dtype=bool)
	for x, y in C:
		inside[x, y] = True

	# variables: π (k), u (m), v (n), t
	size = k + m + n + 1
	rows, rhs = [], []
	for x in range(m):
		row = np.zeros(size)
		row[x * n : (x + 1) * n] = 1.0
		row[k + x] = -1.0
		rows.append(row)
		rhs.append(X.mass[x])
		low = -row
		low[k + x] = -1.0
		rows.append(low)
		rhs.append(-X.mass[x])
	for y in range(n):
		row = np.zeros(size)
		row[y:k:n] = 1.0
		row[k + m + y] = -1.0
		rows.append(row)
		rhs.append(Y.mass[y])
		low = -row
		low[k + m + y] = -1.0
		rows.append(low)
		rhs.append(-Y.mass[y])
	total = np.zeros(size)
	total[k : k + m + n] = 1.0
	total[-1] = -1.0
	rows.append(total)
	rhs.append(0.0)
	escape = np.zeros(size)
	escape[:k] = (~inside).ravel().astype(np.float64)
	escape[-1] = -1.0
	rows.append(escape)
	rhs.append(0.0)

	cost = np.zeros(size)
	cost[-1] = 1.0
	res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=(0, None), method="highs")
	if res.status != 0:
		raise NumericalError(f"Coupling program failed: {res.message}")
	return float(res.fun), res.x[:k].reshape(m, n)


def _greedy_coupling(C, X, Y):
	"""π supported on C, moving as much mass as each pair allows in order."""
	left, right = X.mass.copy(), Y.mass.copy()
	pi = np.zeros((X.size, Y.size))
	for x, y in C:
		moved = min(left[x], right[y])
		pi[x, y] += moved
		left[x] -= moved
		right[y] -= moved
	return pi


def _check_exact_cap(X, Y, cap):
	if X.size * Y.size > cap:
		throw(
			f"Exact GHP distance is limited to |X|·|Y| <= {cap}, got {X.size * Y.size}; use d_ghp_upper",
			BudgetExceededError,
		)


def d_ghp_exact(X, Y, cap=DEFAULT_EXACT_CAP):
	"""
	Exact d_GHP for tiny spaces.

	For each distortion level δ, in increasing order, the correspondences with ½ dis C <= δ that are
	maximal for inclusion are the maximal cliques of the pair compatibility graph containing the root
	pair. The coupling program is monotone in C, so only those are solved. The scan stops once δ
	reaches the best value found.
	"""
	_check_exact_cap(X, Y, cap)
	pairs = [(x, y) for x in range(X.size) for y in range(Y.size)]
	xs = np.array([p[0] for p in pairs])
	ys = np.array([p[1] for p in pairs])
	gap = 0.5 * np.abs(X.dist[np.ix_(xs, xs)] - Y.dist[np.ix_(ys, ys)])
	root = pairs.index((X.root, Y.root))

	best = math.inf
	solved = {}
	for delta in np.unique(gap):
		if delta >= best:
			break
		allowed = gap <= delta + METRIC_TOL
		members = np.flatnonzero(allowed[root])
		graph = nx.Graph()
		graph.add_nodes_from(members.tolist())
		for i, a in enumerate(members):
			for b in members[i + 1 :]:
				if allowed[a, b]:
					graph.add_edge(int(a), int(b))
		for clique in nx.find_cliques(graph):
			C = frozenset(pairs[i] for i in clique)
			if not is_correspondence(C, X, Y):
				continue
			if C not in solved:
				solved[C] = coupling_cost(C, X, Y)[0]
			value = max(0.5 * distortion(C, X, Y), solved[C])
			best = min(best, value)
	return float(best)


def lower_bound(X, Y):
	"""½ ||X| - |Y|| ∨ |μ_X(X) - μ_Y(Y)|."""
	return max(0.5 * abs(X.height - Y.height), abs(X.total_mass - Y.total_mass))


def _height_correspondence(X, Y):
	"""Each point paired with a point of closest height on the other side, roots paired."""
	hx, hy = X.heights, Y.heights
	C = {(X.root, Y.root)}
	for x in range(X.size):
		C.add((x, int(np.argmin(np.abs(hy - hx[x])))))
	for y in range(Y.size):
		C.add((int(np.argmin(np.abs(hx - hy[y]))), y))
	return sorted(C)


def d_ghp_upper(X, Y, cap=DEFAULT_EXACT_CAP):
	"""
	An upper bound on d_GHP, exact when |X|·|Y| <= cap.

	Larger inputs use the closest-height correspondence with an optimal coupling (or a greedy one
	beyond LP_PAIR_CAP pairs), and the product correspondence with the same coupling, keeping the
	smaller value.
	"""
	if X.size * Y.size <= cap:
		return d_ghp_exact(X, Y, cap)
	C = _height_correspondence(X, Y)
	if X.size * Y.size <= LP_PAIR_CAP:
		inner, pi = coupling_cost(C, X, Y)
	else:
		pi = _greedy_coupling(C, X, Y)
		inner = discrepancy(pi, X.mass, Y.mass)
	matched = max(0.5 * distortion(C, X, Y), inner)
	# product correspondence: distortion <= 2 max height, no coupling mass escapes
	product = max(max(X.height, Y.height), discrepancy(pi, X.mass, Y.mass))
	return float(min(matched, product))


def ghp_interval(X, Y, cap=DEFAULT_EXACT_CAP):
	if X.size * Y.size <= cap:
		d = d_ghp_exact(X, Y, cap)
		return GHPInterval(d, d, True)
	return GHPInterval(lower_bound(X, Y), d_ghp_upper(X, Y, cap), False)


def d_ghp_extended(X, Y, r_max=None, quad_step=0.01, margin=5.0, method="exact", cap=DEFAULT_EXACT_CAP):
	"""
	D_GHP(X, Y) = ∫_0^∞ e^-r [1 ∧ d_GHP(X|_r, Y|_r)] dr on [0, r_max].

	Args:
		r_max: integration bound, max height + margin by default
		method: "exact" integrates the piecewise constant integrand between truncation breakpoints,
			"trapezoid" uses a grid of step quad_step
		cap: exact GHP cap per truncation; larger truncations contribute their interval

	Returns:
		ExtendedGHP(value from upper bounds, value from lower bounds, error certificate)
	"""
	if r_max is None:
		r_max = max(X.height, Y.height) + margin
	if r_max < 0 or quad_step <= 0:
		throw("Need r_max >= 0 and quad_step > 0", ValidationError)
	breaks = np.unique(np.concatenate([[0.0], X.heights, Y.heights]))
	breaks = breaks[breaks <= r_max]
	intervals = {}

	def integrand(r):
		# truncations only change at point heights
		key = int(np.searchsorted(breaks, r + METRIC_TOL, side="right")) - 1
		if key not in intervals:
			iv = ghp_interval(truncate(X, breaks[key]), truncate(Y, breaks[key]), cap)
			intervals[key] = (min(1.0, iv.lower), min(1.0, iv.upper))
		return intervals[key]

	tail = math.exp(-r_max)
	if method == "exact":
		edges = np.append(breaks, r_max)
		upper = lower = 0.0
		for a, b in zip(edges[:-1], edges[1:]):
			lo, hi = integrand(a)
			weight = math.exp(-a) - math.exp(-b)
			upper += hi * weight
			lower += lo * weight
		return ExtendedGHP(upper, lower, tail)
	if method == "trapezoid":
		steps = max(1, math.ceil(r_max / quad_step))
		grid = np.linspace(0.0, r_max, steps + 1)
		values = np.array([integrand(r) for r in grid]) * np.exp(-grid)[:, None]
		h = grid[1] - grid[0] if steps else 0.0
		upper = float(trapezoid(values[:, 1], grid))
		lower = float(trapezoid(values[:, 0], grid))
		# each jump costs at most one cell; the smooth part is O(h^2)
		error = tail + h * len(breaks) + r_max * h * h / 12
		return ExtendedGHP(upper, lower, error)
	throw(f"Unknown quadrature method {method!r}", ValidationError)


def random_space(rng, max_points=4, scale=1.0):
	"""Points of the plane with Euclidean distances, random masses and root 0."""
	m = int(rng.integers(1, max_points + 1))
	points = rng.random((m, 2)) * scale
	dist = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1))
	np.fill_diagonal(dist, 0.0)
	return PointedMetricSpace(dist, 0, rng.random(m))
