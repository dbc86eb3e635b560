# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Finite-sample checks for local limits and scaling limits.

Everything here consumes samples or pmf tables and returns plain records; sampling itself lives in
mb_engine and growth_models.
"""

import math
from collections import Counter, namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from mbtlab.exceptions import ValidationError, throw
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition
from mbtlab.mbtlab.tree_core.tree_core import ball
from mbtlab.mbtlab.utils.logger import logger

ConvergenceRow = namedtuple("ConvergenceRow", ["n", "lam", "q_n", "q_star", "delta"])
GrowthFit = namedtuple("GrowthFit", ["slope", "stderr", "intercept", "statistic"])
ImmigrationRow = namedtuple("ImmigrationRow", ["n", "point", "tail", "constant"])
TVEstimate = namedtuple("TVEstimate", ["tv", "floor", "stderr", "bins"])

MIN_CURVES = 30
MIN_EXPECTED = 5.0
POOLED_EXPECTED = 25.0


@dataclass(frozen=True, eq=False)
class VolumeCurve:
	radii: np.ndarray
	values: np.ndarray
	measure: str = "vertices"

	def __post_init__(self):
		values = np.asarray(self.values)
		if len(values) != len(self.radii):
			throw("A volume curve needs one value per radius")
		if np.any(np.diff(values) < 0):
			throw("Volume curves are non-decreasing")

	def at(self, r):
		return self.values[int(np.searchsorted(self.radii, r))]

	def rescaled(self, gamma):
		"""V(R) / R^(1/γ) for R >= 1."""
		r = np.asarray(self.radii[1:], dtype=np.float64)
		return np.asarray(self.values[1:], dtype=np.float64) / r ** (1.0 / gamma)

	def to_rows(self):
		return [(int(r), int(v) if float(v).is_integer() else float(v)) for r, v in zip(self.radii, self.values)]


@dataclass
class BallLawHistogram:
	"""Counts of radius-R ball shapes keyed by canonical code."""

	R: int
	counts: Counter = field(default_factory=Counter)

	@property
	def total(self):
		return sum(self.counts.values())

	def add(self, tree):
		self.counts[ball(tree, self.R).to_text()] += 1

	def frequency(self, code):
		total = self.total
		return self.counts.get(code, 0) / total if total else 0.0

	def to_rows(self):
		return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

	@classmethod
	def from_trees(cls, trees, R):
		h = cls(R)
		for t in trees:
			h.add(t)
		return h


def empirical_ball_law(sampler, R, N, rng):
	"""
	Histogram of ball(T, R) over N draws.

	Args:
		sampler: callable rng -> Tree or InfiniteTreeBall
	"""
	h = BallLawHistogram(R)
	for _ in range(N):
		t = sampler(rng)
		h.add(getattr(t, "tree", t))
	return h


def tv_distance(h1, h2):
	"""Total variation distance between two histograms (BallLawHistogram or mapping of counts)."""
	c1 = h1.counts if isinstance(h1, BallLawHistogram) else h1
	c2 = h2.counts if isinstance(h2, BallLawHistogram) else h2
	n1, n2 = sum(c1.values()), sum(c2.values())
	if not n1 or not n2:
		return 0.0 if n1 == n2 else 1.0
	keys = set(c1) | set(c2)
	return 0.5 * sum(abs(c1.get(k, 0) / n1 - c2.get(k, 0) / n2) for k in keys)


def tv_to_law(observed, pmf, min_expected=POOLED_EXPECTED):
	"""
	Total variation between observed counts and an exact law, rare outcomes pooled.

	Outcomes with expected count below min_expected share one bin with everything unobserved, so
	the distance is taken on a coarsening and never exceeds the unpooled one. `floor` is the
	expected distance of an exact sample of the same size, Σ sqrt(2 p(1-p) / (π N)) / 2 over the
	bins, and `stderr` the normal-approximation standard deviation of the estimate.

	Args:
		observed: BallLawHistogram or mapping outcome -> count
		pmf: callable outcome -> exact probability
	"""
	counts = observed.counts if isinstance(observed, BallLawHistogram) else observed
	total = sum(counts.values())
	if not total:
		throw("No observations to compare")
	probs, freqs = [], []
	for key, count in counts.items():
		p = float(pmf(key))
		if p * total >= min_expected:
			probs.append(p)
			freqs.append(count / total)
	probs.append(max(0.0, 1.0 - sum(probs)))
	freqs.append(max(0.0, 1.0 - sum(freqs)))
	p, f = np.asarray(probs), np.asarray(freqs)
	var = p * (1 - p) / total
	return TVEstimate(
		float(0.5 * np.abs(f - p).sum()),
		float(0.5 * np.sqrt(2 * var / math.pi).sum()),
		float(0.5 * math.sqrt((1 - 2 / math.pi) * var.sum())),
		len(p),
	)


@dataclass
class ConvergenceTable:
	law: str
	rows: list
	monotone: dict

	def to_rows(self):
		return [(r.n, _lam_text(r.lam), r.q_n, r.q_star, r.delta) for r in self.rows]


def _lam_text(lam):
	return lam.to_text() if isinstance(lam, Partition) else ",".join(str(x) for x in lam)


def qn_convergence_table(law, lambdas, n_grid):
	"""
	q_n(n - ‖λ‖, λ) against q_*(λ) along n_grid.

	Returns:
		ConvergenceTable with |Δ| per (n, λ) and whether |Δ| is non-increasing along the grid per λ
	"""
	rows, monotone = [], {}
	for lam in lambdas:
		q_star = law.qstar_pmf(lam)
		deltas = []
		for n in n_grid:
			q_n = law.pmf(n, law.local_form(n, lam))
			delta = abs(q_n - q_star)
			deltas.append(delta)
			rows.append(ConvergenceRow(n, lam, q_n, q_star, delta))
		monotone[_lam_text(lam)] = bool(np.all(np.diff(deltas) <= 1e-15))
	logger("analysis").debug(f"[Converge] {law.describe()}: {len(rows)} rows")
	return ConvergenceTable(law.describe(), rows, monotone)


def _curve_matrix(curves, r_window):
	r_lo, r_hi = r_window
	if len(curves) < MIN_CURVES:
		throw(f"Exponent fits need at least {MIN_CURVES} curves, got {len(curves)}")
	if r_lo < 1 or r_hi <= r_lo:
		throw(f"Radius window must satisfy 1 <= r_lo < r_hi, got {r_window}")
	for c in curves:
		if c.radii[-1] < r_hi:
			throw(f"Curves stop at radius {c.radii[-1]}, the window needs {r_hi}")
	radii = np.arange(r_lo, r_hi + 1)
	return radii, np.array([np.asarray(c.values, dtype=np.float64)[r_lo : r_hi + 1] for c in curves])


def _slope(radii, values, statistic):
	center = np.median(values, axis=0) if statistic == "median" else values.mean(axis=0)
	slope, intercept = np.polyfit(np.log(radii), np.log(center), 1)
	return slope, intercept


def growth_exponent(curves, r_window, statistic="mean", resamples=200, rng=None):
	"""
	Least-squares slope of log V̄(R) against log R over the window.

	Args:
		curves: VolumeCurves starting at radius 0
		r_window: (r_lo, r_hi)
		statistic: "mean", or "median" for laws whose volume has infinite mean
		resamples: bootstrap resamples over curves for the standard error

	Returns:
		GrowthFit
	"""
	if statistic not in ("mean", "median"):
		throw(f"Unknown statistic {statistic!r}", ValidationError)
	radii, values = _curve_matrix(curves, r_window)
	slope, intercept = _slope(radii, values, statistic)
	stderr = 0.0
	if resamples and rng is not None:
		boot = [
			_slope(radii, values[rng.integers(len(values), size=len(values))], statistic)[0]
			for _ in range(resamples)
		]
		stderr = float(np.std(boot, ddof=1))
	return GrowthFit(float(slope), stderr, float(intercept), statistic)


def bootstrap_mean(values, resamples, rng):
	"""(mean, bootstrap standard error)."""
	values = np.asarray(values, dtype=np.float64)
	means = [values[rng.integers(len(values), size=len(values))].mean() for _ in range(resamples)]
	return float(values.mean()), float(np.std(means, ddof=1))


def quantile_stability(curves, gamma, radii, quantiles=(0.1, 0.25, 0.5, 0.75, 0.9)):
	"""Quantiles of V(R)/R^(1/γ) at each radius and their largest relative gap."""
	table = {}
	for r in radii:
		scaled = [c.at(r) / r ** (1.0 / gamma) for c in curves]
		table[r] = np.quantile(scaled, quantiles)
	first, *rest = (table[r] for r in radii)
	gap = max((float(np.max(np.abs(q - first) / np.maximum(first, 1e-300))) for q in rest), default=0.0)
	return {"quantiles": quantiles, "table": table, "max_relative_gap": gap}


def progeny_by_recursion(xi, n_max):
	"""
	P(#T = n) for n <= n_max from the first-generation decomposition
	P(#T = n) = Σ_k ξ(k) P(#T_1 + … + #T_k = n - 1), without the hitting-time formula.
	"""
	xi_values = np.zeros(n_max + 1)
	head = xi.values[: n_max + 1]
	xi_values[: len(head)] = head
	single = np.zeros(n_max + 1)
	# forest[k, m] = P(#T_1 + … + #T_k = m)
	forest = np.zeros((n_max + 1, n_max + 1))
	forest[0, 0] = 1.0
	for n in range(1, n_max + 1):
		single[n] = float(np.dot(xi_values[:n], forest[:n, n - 1]))
		s = np.arange(1, n + 1)
		forest[1:, n] = forest[:-1, n - s] @ single[s]
	return single


def otter_dwass_check(xi, k_max, n_max):
	"""
	max |P(#T_1 + … + #T_k = n) - (k/n) P(S_n = -k)| over k <= k_max, n <= n_max.

	The left side convolves the single-tree law of progeny_by_recursion, the right side convolves ξ
	directly, so the k = 1 rows compare two independent computations.
	"""
	single = progeny_by_recursion(xi, n_max)
	xi_values = np.zeros(n_max + 1)
	head = xi.values[: n_max + 1]
	xi_values[: len(head)] = head

	forests = [None, single]
	for _ in range(2, k_max + 1):
		forests.append(np.convolve(forests[-1], single)[: n_max + 1])

	worst = 0.0
	walk = np.zeros(n_max + 1)
	walk[0] = 1.0
	for n in range(1, n_max + 1):
		# walk holds the law of ξ_1 + … + ξ_n
		walk = np.convolve(walk, xi_values)[: n_max + 1]
		for k in range(1, min(k_max, n) + 1):
			right = k / n * walk[n - k]
			worst = max(worst, abs(forests[k][n] - right))
	return worst


def unary_immigration_check(law, n_grid):
	"""
	n^(1+γ) q_*(‖λ‖ = n) and γ n^γ q_*(‖λ‖ >= n) against the immigration constant c.

	Returns:
		list of ImmigrationRow
	"""
	if law.immigration is None:
		throw(f"{law.describe()} has no immigration constant", ValidationError)
	c, gamma = law.immigration
	top = max(n_grid)
	masses = [law.qstar_pmf(EMPTY)]
	for m in range(1, top + 1):
		p = law.qstar_norm_pmf(m)
		if p is None:
			throw(f"{law.describe()} has no closed form for q_*(‖λ‖ = {m})", ValidationError)
		masses.append(p)
	below = np.cumsum(masses)
	rows = []
	for n in n_grid:
		tail = max(0.0, 1.0 - float(below[n - 1]))
		rows.append(ImmigrationRow(n, n ** (1 + gamma) * masses[n], gamma * n**gamma * tail, c))
	return rows


def chi_square_pvalue(observed, probs):
	"""
	Goodness of fit of observed counts to probabilities.

	Args:
		observed: mapping key -> count
		probs: mapping key -> probability; bins with expected count below 5 are pooled

	Returns:
		p-value of Pearson's chi-square test
	"""
	total = sum(observed.values())
	if not total:
		throw("No observations to test")
	unknown = set(observed) - set(probs)
	if any(observed[k] for k in unknown):
		return 0.0
	keys = sorted(probs, key=lambda k: -probs[k])
	obs, exp = [], []
	pooled_obs, pooled_exp = 0.0, 0.0
	for k in keys:
		e = probs[k] * total
		if e >= MIN_EXPECTED:
			obs.append(observed.get(k, 0))
			exp.append(e)
		else:
			pooled_obs += observed.get(k, 0)
			pooled_exp += e
	if pooled_exp > 0:
		obs.append(pooled_obs)
		exp.append(pooled_exp)
	if len(obs) < 2:
		return 1.0
	exp = np.asarray(exp)
	exp *= sum(obs) / exp.sum()
	return float(stats.chisquare(obs, exp).pvalue)


def binomial_zscore(count, total, p):
	"""(count - total p) / sqrt(total p (1 - p))."""
	sd = math.sqrt(total * p * (1 - p))
	return (count - total * p) / sd if sd else 0.0
