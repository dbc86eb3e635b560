# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Scalar and vector laws the split-law catalogue is built from.

All pmfs are evaluated in log space with scipy.special.gammaln. Integer laws with heavy tails are
held as a dense table up to a cap plus a Pareto tail descriptor pmf(n) ~ c * n^(-1-a); samplers
invert the table and draw beyond the cap from the Pareto tail.
"""

import csv
import math

import numpy as np
from scipy import stats
from scipy.special import gammaln

from mbtlab.exceptions import NumericalError, ValidationError, throw

INT_CAP = 2**62
STABLE_TABLE_CAP = 2**16
BOREL_TABLE_CAP = 2**17
PMF_FLOOR = 1e-300
LOG_PMF_FLOOR = math.log(PMF_FLOOR)


class DiscreteTable:
	"""
	Integer law tabulated on start, start+1, … with an optional Pareto tail beyond the table.

	Args:
		values: pmf values for start, start+1, …
		start: integer carried by values[0]
		tail_exponent: a with pmf(n) ~ c n^(-1-a) beyond the table, None for a light tail
		tail_constant: c; fitted from the last positive table entry when omitted
		period: lattice span d of the support; tail values stay on start + dℤ
	"""

	def __init__(self, values, start=0, tail_exponent=None, tail_constant=None, period=1):
		values = np.asarray(values, dtype=np.float64)
		if not len(values) or np.any(values < 0):
			throw("Probabilities must be non-negative")
		self.values = values
		self.start = int(start)
		self.period = int(period)
		self.tail_exponent = tail_exponent
		self.cdf = np.cumsum(values)
		self.tail_mass = max(0.0, 1.0 - float(self.cdf[-1]))
		if tail_exponent is not None and tail_constant is None:
			last = np.flatnonzero(values)[-1]
			tail_constant = values[last] * float(self.start + last) ** (1 + tail_exponent)
		self.tail_constant = tail_constant

	@property
	def stop(self):
		"""First integer not covered by the table."""
		return self.start + len(self.values)

	def pmf(self, n):
		n = np.asarray(n)
		idx = n - self.start
		inside = (idx >= 0) & (idx < len(self.values))
		out = np.where(inside, self.values[np.clip(idx, 0, len(self.values) - 1)], 0.0)
		if self.tail_exponent is not None:
			beyond = (idx >= len(self.values)) & (idx % self.period == 0)
			tail = self.tail_constant * np.maximum(n, 1).astype(np.float64) ** (-1.0 - self.tail_exponent)
			out = np.where(beyond, tail, out)
		return out if out.ndim else float(out)

	def tail_bound(self):
		"""Pareto estimate of the mass beyond the table."""
		if self.tail_exponent is None:
			return self.tail_mass
		return self.tail_constant * (self.stop - 0.5) ** (-self.tail_exponent) / (self.tail_exponent * self.period)

	def sample(self, rng, size=None):
		u = np.atleast_1d(rng.random(size))
		idx = np.searchsorted(self.cdf, u, side="right")
		out = self.start + np.minimum(idx, len(self.values) - 1)
		beyond = idx >= len(self.values)
		if self.tail_exponent is not None and np.any(beyond):
			out[beyond] = self._tail_draws(rng, int(np.count_nonzero(beyond)))
		return out.reshape(np.shape(u)) if size is not None else int(out[0])

	def _tail_draws(self, rng, count):
		v = rng.random(count)
		draws = np.minimum(np.ceil(self.stop * v ** (-1.0 / self.tail_exponent)), INT_CAP).astype(np.int64)
		return draws + (self.start - draws) % self.period

	def to_rows(self):
		return [(self.start + i, float(p)) for i, p in enumerate(self.values)]


class OffspringLaw(DiscreteTable):
	"""Offspring distribution ξ on ℤ₊."""

	def __init__(self, name, values, mean=None, variance=None, tail_exponent=None, tail_constant=None):
		super().__init__(values, 0, tail_exponent, tail_constant)
		self.name = name
		k = np.arange(len(self.values))
		self.mean = float(np.dot(k, self.values)) if mean is None else mean
		self.variance = variance if variance is not None else float(np.dot(k * k, self.values) - self.mean**2)

	def __repr__(self):
		return f"OffspringLaw({self.name})"

	def is_critical(self, tol=1e-9):
		return abs(self.mean - 1.0) <= tol and self.values[1] < 1.0

	def require_critical(self):
		if not self.is_critical():
			throw(f"Offspring law {self.name} is not critical (mean {self.mean!r})")
		return self

	def sample_generation(self, rng, count):
		"""
		Offspring of `count` independent individuals.

		Returns:
			(total number of children, number of individuals with no child)
		"""
		count = int(count)
		if count == 0:
			return 0, 0
		probs = np.append(self.values, self.tail_mass)
		probs = probs / probs.sum()
		counts = rng.multinomial(count, probs)
		# float sums; totals are capped at INT_CAP
		total = float(np.dot(counts[:-1], np.arange(len(self.values), dtype=np.float64)))
		if counts[-1]:
			if self.tail_exponent is None:
				total += float(counts[-1]) * (len(self.values) - 1)
			else:
				total += float(self._tail_draws(rng, int(counts[-1])).astype(np.float64).sum())
		return int(min(total, INT_CAP)), int(counts[0])


def poisson_offspring(mean=1.0):
	"""Poisson(mean) tabulated until the pmf drops below PMF_FLOOR."""
	if mean <= 0:
		return OffspringLaw(f"poisson({mean:g})", [1.0], mean=0.0, variance=0.0)
	cap = int(mean + 10 * math.sqrt(mean)) + 16
	while stats.poisson.logpmf(cap, mean) > LOG_PMF_FLOOR:
		cap *= 2
	log_values = stats.poisson.logpmf(np.arange(cap + 1), mean)
	last = int(np.flatnonzero(log_values > LOG_PMF_FLOOR)[-1])
	values = np.exp(log_values[: last + 1])
	return OffspringLaw(f"poisson({mean:g})", values, mean=mean, variance=mean)


def geometric_offspring(p=0.5):
	"""ξ(k) = (1-p)^k p; critical at p = 1/2."""
	if not 0 < p <= 1:
		throw(f"Geometric parameter must lie in (0, 1], got {p}")
	if p == 1:
		values = np.array([1.0])
	else:
		k = np.arange(int(math.ceil(-700 / math.log1p(-p))))
		values = np.exp(k * math.log1p(-p) + math.log(p))
	return OffspringLaw(f"geometric({p:g})", values, mean=(1 - p) / p, variance=(1 - p) / p**2)


def binary_offspring():
	return OffspringLaw("binary", [0.5, 0.0, 0.5], mean=1.0, variance=1.0)


def stable_offspring(beta, cap=STABLE_TABLE_CAP):
	"""
	Offspring law with generating function s + (1-s)^β / β.

	ξ(0) = 1/β, ξ(1) = 0 and ξ(k) = |binom(β, k)| / β for k >= 2.
	"""
	if not 1 < beta <= 2:
		throw(f"Stable offspring needs 1 < β <= 2, got {beta}")
	k = np.arange(cap)
	with np.errstate(divide="ignore"):
		log_falling = np.concatenate([[0.0], np.cumsum(np.log(np.abs(beta - k[:-1])))])
	values = np.exp(log_falling - gammaln(k + 1) - math.log(beta))
	values[0] = 1.0 / beta
	values[1] = 0.0
	if beta == 2:
		return OffspringLaw("stable(2)", values, mean=1.0, variance=1.0)
	return OffspringLaw(f"stable({beta:g})", values, mean=1.0, variance=math.inf, tail_exponent=beta)


def size_biased(xi):
	"""ξ̂(k) = k ξ(k); requires a critical ξ."""
	xi.require_critical()
	k = np.arange(len(xi.values))
	name = f"size-biased {xi.name}"
	if xi.tail_exponent is None:
		return OffspringLaw(name, k * xi.values)
	return OffspringLaw(
		name, k * xi.values, mean=math.inf, variance=math.inf,
		tail_exponent=xi.tail_exponent - 1.0, tail_constant=xi.tail_constant,
	)


def beta_geometric_logpmf(theta, n):
	_check_bg(theta)
	n = np.asarray(n, dtype=np.float64)
	if theta == 1:
		return np.where(n == 0, 0.0, -np.inf)
	return math.log(theta) + gammaln(n + 1 - theta) - gammaln(1 - theta) - gammaln(n + 2)


def beta_geometric_pmf(theta, n):
	"""P(X = n) = θ Γ(n+1-θ) / (Γ(1-θ) (n+1)!); θ = 1 is the point mass at 0."""
	out = np.exp(beta_geometric_logpmf(theta, n))
	return out if np.ndim(out) else float(out)


def sample_beta_geometric(theta, rng, size=None):
	"""Geometric number of failures with success probability Beta(θ, 1-θ)."""
	_check_bg(theta)
	if theta == 1:
		return np.zeros(size, dtype=np.int64) if size is not None else 0
	q = rng.beta(theta, 1 - theta, size)
	out = _geometric_failures(q, rng.random(size))
	return out if size is not None else int(out)


def _geometric_failures(q, u):
	with np.errstate(divide="ignore"):
		x = np.floor(np.log(u) / np.log1p(-np.minimum(q, 1.0)))
	x = np.where(q >= 1.0, 0.0, x)
	return np.minimum(np.nan_to_num(x, posinf=INT_CAP), INT_CAP).astype(np.int64)


def _check_bg(theta):
	if not 0 < theta <= 1:
		throw(f"Beta-geometric parameter must lie in (0, 1], got {theta}")


def borel_logpmf(k):
	k = np.asarray(k, dtype=np.float64)
	return (k - 1) * np.log(k) - k - gammaln(k + 1)


def borel_pmf(k):
	"""k^(k-1) e^(-k) / k!: total progeny of a Poisson(1) Galton-Watson tree."""
	if np.any(np.asarray(k) < 1):
		throw("Borel sizes start at 1")
	out = np.exp(borel_logpmf(k))
	return out if np.ndim(out) else float(out)


_borel_table = None


def borel_table():
	global _borel_table
	if _borel_table is None:
		k = np.arange(1, BOREL_TABLE_CAP + 1)
		_borel_table = DiscreteTable(np.exp(borel_logpmf(k)), 1, 0.5, (2 * math.pi) ** -0.5)
	return _borel_table


def sample_borel(rng, size=None):
	return borel_table().sample(rng, size)


def neg_dirichlet_multinomial_logpmf(k, counts):
	counts = np.asarray(counts, dtype=np.float64)
	if k < 2 or counts.shape[-1] != k - 1:
		throw(f"Negative Dirichlet multinomial of order {k} takes {k - 1} counts")
	if np.any(counts < 0):
		return -np.inf
	a = 1.0 / k
	total = counts.sum(axis=-1)
	return -math.log(k) - np.log1p(total) + np.sum(gammaln(counts + a) - gammaln(a) - gammaln(counts + 1), axis=-1)


def neg_dirichlet_multinomial_pmf(k, counts):
	"""(1/k) (1/(1+N)) ∏ Γ(n_i + 1/k) / (Γ(1/k) n_i!) with N = Σ n_i."""
	out = np.exp(neg_dirichlet_multinomial_logpmf(k, counts))
	return out if np.ndim(out) else float(out)


def sample_neg_dirichlet_multinomial(k, rng):
	"""Counts of the first k-1 colours seen before colour k, under Dirichlet(1/k, …, 1/k) weights."""
	weights = dirichlet_sample(k, np.full(k, 1.0 / k), rng)
	n = int(_geometric_failures(weights[-1:], rng.random(1))[0])
	rest = weights[:-1]
	if n == 0 or rest.sum() <= 0:
		return np.zeros(k - 1, dtype=np.int64)
	return rng.multinomial(n, rest / rest.sum())


def dirichlet_sample(dim, params, rng):
	params = np.broadcast_to(np.asarray(params, dtype=np.float64), (dim,))
	if np.any(params <= 0):
		throw("Dirichlet parameters must be positive")
	return rng.dirichlet(params)


def geometric_sample(p, rng, size=None):
	"""Number of failures before the first success, success probability p."""
	if not 0 < p <= 1:
		throw(f"Geometric parameter must lie in (0, 1], got {p}")
	out = rng.geometric(p, size) - 1
	return out if size is not None else int(out)


def categorical_sample(weights, rng, size=None):
	weights = np.asarray(weights, dtype=np.float64)
	total = weights.sum()
	if not len(weights) or total <= 0 or np.any(weights < 0):
		throw("Categorical weights must be non-negative with a positive sum")
	out = rng.choice(len(weights), size=size, p=weights / total)
	return out if size is not None else int(out)


class SizePmfTable:
	"""
	Total progeny law of a critical Galton-Watson tree and its forest convolutions.

	forest[x, r] = P(#T_1 + … + #T_r = x) for x, r <= n_max, counting vertices or leaves.
	Sizes beyond n_max are treated as supported when they lie on the lattice of the tabulated
	support, with P(#T = n) ~ c n^(-1-a) where a = 1/2 for finite variance and 1/β for stable ξ.
	"""

	def __init__(self, xi, n_max, forest, count="vertices", truncation_error=0.0):
		self.xi = xi
		self.n_max = n_max
		self.forest = forest
		self.count = count
		self.truncation_error = truncation_error
		self.values = forest[:, 1].copy()
		self.tail_exponent = 0.5 if xi.tail_exponent is None else 1.0 / xi.tail_exponent
		support = np.flatnonzero(self.values[1:]) + 1
		self.period = int(np.gcd.reduce(np.diff(support))) if len(support) > 1 else 1
		self.residue = int(support[0] % self.period) if len(support) else 1
		self._sampler = None

	def pmf(self, n):
		"""P(#T = n), zero beyond the table."""
		n = np.asarray(n)
		out = np.where((n >= 0) & (n <= self.n_max), self.values[np.clip(n, 0, self.n_max)], 0.0)
		return out if out.ndim else float(out)

	def forest_pmf(self, r, x):
		if x < 0 or r < 0 or x > self.n_max or r > self.n_max:
			return 0.0
		return float(self.forest[x, r])

	def supported(self, n):
		if n < 1:
			return False
		if n <= self.n_max:
			return bool(self.values[n] > 0)
		return self.period == 1 or n % self.period == self.residue

	def sampler(self):
		"""Sizes drawn from the table with a Pareto tail beyond n_max."""
		if self._sampler is None:
			self._sampler = DiscreteTable(self.values[1:], 1, self.tail_exponent, period=self.period)
		return self._sampler

	def to_rows(self):
		return [(n, float(self.values[n])) for n in range(1, self.n_max + 1)]


def gw_size_pmf(xi, n_max, count="vertices"):
	"""
	Build the progeny table of ξ up to n_max.

	Vertex counts use the Otter-Dwass identity P(#T_1+…+#T_r = x) = (r/x) P(S_x = -r) with
	S_x + x distributed as the x-fold convolution of ξ. Leaf counts use the recursion
	g_1(n) (1 - ξ(1)) = ξ(0) 1{n=1} + Σ_{p>=2} ξ(p) g_p(n) with g_p = g_1^{*p}.

	Args:
		xi: critical OffspringLaw
		n_max: largest size tabulated
		count: "vertices" or "leaves"

	Returns:
		SizePmfTable
	"""
	xi.require_critical()
	if n_max < 1:
		throw("n_max must be >= 1")
	if count == "vertices":
		forest, error = _vertex_forest(xi, n_max)
	elif count == "leaves":
		forest, error = _leaf_forest(xi, n_max), 0.0
	else:
		raise ValidationError(f"Unknown size count {count!r}")

	sizes = forest[1:, 1]
	tiny = np.finfo(np.float64).tiny
	if np.any((sizes > 0) & (sizes < tiny)):
		first = int(np.flatnonzero((sizes > 0) & (sizes < tiny))[0]) + 1
		raise NumericalError(f"Size table of {xi.name} underflows at n = {first}; lower n_max below {first}")
	return SizePmfTable(xi, n_max, forest, count, error)


def _vertex_forest(xi, n_max):
	support = xi.values[: n_max + 1]
	dropped = float(xi.values[n_max + 1 :].sum()) + xi.tail_mass
	forest = np.zeros((n_max + 1, n_max + 1))
	forest[0, 0] = 1.0
	power = np.zeros(n_max + 1)
	power[0] = 1.0
	r = np.arange(1, n_max + 1)
	for x in range(1, n_max + 1):
		# power[j] = P(ξ_1 + … + ξ_x = j)
		power = np.convolve(power, support)[: n_max + 1]
		rr = r[:x]
		forest[x, 1 : x + 1] = rr / x * power[x - rr]
	return forest, n_max * dropped


def _leaf_forest(xi, n_max):
	forest = np.zeros((n_max + 1, n_max + 1))
	forest[0, 0] = 1.0
	xi_values = np.zeros(n_max + 2)
	m = min(len(xi.values), n_max + 2)
	xi_values[:m] = xi.values[:m]
	if xi_values[1] >= 1:
		throw("Leaf counts need ξ(1) < 1")
	g1 = forest[:, 1]
	for n in range(1, n_max + 1):
		if n >= 2:
			# forest[n, p] = Σ_s g1[s] forest[n - s, p - 1], s = 1..n-1
			s = np.arange(1, n)
			forest[n, 2 : n + 1] = g1[s] @ forest[n - s, 1:n]
		total = xi_values[0] * (n == 1) + np.dot(xi_values[2 : n + 1], forest[n, 2 : n + 1])
		forest[n, 1] = total / (1 - xi_values[1])
	return forest


def export_table_csv(path, rows, header=("n", "pmf"), comments=()):
	"""Write (n, value) rows with optional leading # comment lines."""
	with open(path, "w", newline="") as f:
		for line in comments:
			f.write(f"# {line}\n")
		writer = csv.writer(f)
		writer.writerow(header)
		writer.writerows(rows)
