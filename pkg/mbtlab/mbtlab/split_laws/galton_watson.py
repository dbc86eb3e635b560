# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Galton-Watson trees conditioned on their number of vertices or leaves.

q_{n-1}(λ) = p! ξ(p) / ∏ m_j(λ)! · ∏ P(#T = λ_i) / P(#T = n), p = len(λ); the leaf variant uses
P(#_L T = ·). The local limit is Kesten's tree: a spine vertex has p ~ ξ̂ children, p - 1 of them
roots of unconditioned trees.
"""

import math

import numpy as np
from scipy.special import gammaln

from mbtlab.mbtlab.dist_lib.dist_lib import (
	binary_offspring,
	borel_logpmf,
	geometric_offspring,
	gw_size_pmf,
	poisson_offspring,
	size_biased,
	stable_offspring,
)
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition
from mbtlab.mbtlab.split_laws.split_laws import (
	DEFAULT_SPLIT_TABLE_CAP,
	LEAVES,
	VERTICES,
	SplitLaw,
	symmetry_log_factor,
)

DEFAULT_GW_TABLE_CAP = 2048


def catalan_size_logpmf(n):
	"""log C_{n-1} 2^(1-2n): vertex count of the geometric(1/2) tree, leaf count of the binary one."""
	n = np.asarray(n, dtype=np.float64)
	return gammaln(2 * n - 1) - gammaln(n) - gammaln(n + 1) - (2 * n - 1) * math.log(2)


def binary_vertex_logpmf(n):
	"""Vertex count 2m+1 of the binary tree has probability C_m 2^(-2m-1)."""
	n = np.asarray(n, dtype=np.float64)
	m = (n - 1) / 2
	with np.errstate(invalid="ignore"):
		out = gammaln(2 * m + 1) - gammaln(m + 1) - gammaln(m + 2) - n * math.log(2)
	return np.where((n % 2 == 1) & (n >= 1), out, -np.inf)


class GaltonWatsonSplit(SplitLaw):
	has_qstar = True

	def __init__(
		self,
		xi,
		count=VERTICES,
		name="gw",
		gw_table_cap=DEFAULT_GW_TABLE_CAP,
		split_table_cap=DEFAULT_SPLIT_TABLE_CAP,
		size_logpmf=None,
	):
		"""
		Args:
			xi: critical OffspringLaw
			count: VERTICES or LEAVES
			gw_table_cap: largest size with an exact convolution table
			size_logpmf: closed form of log P(#T = n) used beyond the table, when known
		"""
		super().__init__(split_table_cap=min(split_table_cap, gw_table_cap))
		self.xi = xi.require_critical()
		self.semantics = count
		self.name = name
		self.params = {"xi": xi.name}
		self.table = gw_size_pmf(xi, gw_table_cap, count)
		self.xi_hat = size_biased(xi)
		self._closed_form = size_logpmf

	@property
	def min_size(self):
		return 1

	def supported(self, n):
		return self.table.supported(n)

	def supported_part(self, size):
		return self.table.supported(size)

	def size_logpmf(self, n):
		"""log P(#T = n): table, then closed form, then the Pareto tail of the table."""
		if n <= self.table.n_max:
			p = self.table.pmf(n)
			return math.log(p) if p > 0 else -math.inf
		if self._closed_form is not None:
			return float(self._closed_form(n))
		p = self.table.sampler().pmf(n)
		return math.log(p) if p > 0 else -math.inf

	def pmf(self, n, lam):
		lam = lam if isinstance(lam, Partition) else Partition.of(lam)
		if self.semantics == LEAVES and n == 1 and lam == EMPTY:
			return math.exp(math.log(self.xi.pmf(0)) - self.size_logpmf(1))
		if not self.supported(n) or lam.norm != self.split_total(n):
			return 0.0
		p = len(lam)
		xi_p = self.xi.pmf(p)
		if xi_p <= 0:
			return 0.0
		log_p = math.lgamma(p + 1) + math.log(xi_p) + symmetry_log_factor(lam)
		for part in lam.parts:
			log_p += self.size_logpmf(part)
		return math.exp(log_p - self.size_logpmf(n))

	def _child_count_weights(self, n):
		total = self.split_total(n)
		forest = self.table.forest
		p = np.arange(total + 1)
		weights = self.xi.pmf(p) * forest[total, : total + 1]
		if self.semantics == LEAVES:
			weights[0] = self.xi.pmf(0) if n == 1 else 0.0
		return weights

	def _sample_exact(self, n, rng):
		weights = self._child_count_weights(n)
		cdf = np.cumsum(weights)
		p = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
		if p == 0:
			return EMPTY

		forest = self.table.forest
		single = self.table.values
		m, parts = self.split_total(n), []
		for r in range(p, 1, -1):
			# first size s of r trees totalling m: P(#T = s) P(r-1 trees total m - s)
			s = np.arange(1, m - r + 2)
			w = single[s] * forest[m - s, r - 1]
			c = np.cumsum(w)
			size = int(s[min(np.searchsorted(c, rng.random() * c[-1], side="right"), len(s) - 1)])
			parts.append(size)
			m -= size
		parts.append(m)
		return Partition.of(parts)

	def qstar_pmf(self, lam):
		"""ξ̂(p) (p-1)! / ∏ m_j(λ)! · ∏ P(#T = λ_i), p = len(λ) + 1."""
		lam = lam if isinstance(lam, Partition) else Partition.of(lam)
		p = len(lam) + 1
		w = self.xi_hat.pmf(p)
		if w <= 0:
			return 0.0
		log_p = math.log(w) + math.lgamma(p) + symmetry_log_factor(lam)
		for part in lam.parts:
			log_p += self.size_logpmf(part)
		return math.exp(log_p)

	def sample_qstar(self, rng):
		p = self.xi_hat.sample(rng)
		if p <= 1:
			return EMPTY
		return Partition.of(self.table.sampler().sample(rng, size=p - 1).tolist())

	def qstar_norm_pmf(self, n):
		if n > self.table.n_max:
			return None
		r = np.arange(0, n + 1)
		return float(np.dot(self.xi_hat.pmf(r + 1), self.table.forest[n, : n + 1]))

	@property
	def gamma(self):
		if self.xi.tail_exponent is None:
			return 0.5
		return 1.0 - 1.0 / self.xi.tail_exponent

	@property
	def immigration(self):
		if self.semantics != VERTICES or not math.isfinite(self.xi.variance):
			return None
		return math.sqrt(self.xi.variance / (2 * math.pi)), 0.5


def _gw(xi, count, name, size_logpmf=None, **caps):
	return GaltonWatsonSplit(xi, count=count, name=name, size_logpmf=size_logpmf, **caps)


def gw_poisson(params, **caps):
	return _gw(poisson_offspring(), VERTICES, "gw-poisson", borel_logpmf, **caps)


def gw_geometric(params, **caps):
	return _gw(geometric_offspring(), VERTICES, "gw-geometric", catalan_size_logpmf, **caps)


def gw_binary(params, **caps):
	return _gw(binary_offspring(), VERTICES, "gw-binary", binary_vertex_logpmf, **caps)


def gw_stable(params, **caps):
	beta = float(params.get("beta", 1.5))
	law = _gw(stable_offspring(beta), VERTICES, "gw-stable", **caps)
	law.params = {"beta": beta}
	return law


def gw_poisson_leaves(params, **caps):
	return _gw(poisson_offspring(), LEAVES, "gw-poisson-leaves", **caps)


def gw_geometric_leaves(params, **caps):
	return _gw(geometric_offspring(), LEAVES, "gw-geometric-leaves", **caps)


def gw_stable_leaves(params, **caps):
	beta = float(params.get("beta", 1.5))
	closed_form = catalan_size_logpmf if beta == 2 else None
	law = _gw(stable_offspring(beta), LEAVES, "gw-stable-leaves", closed_form, **caps)
	law.params = {"beta": beta}
	return law


def gw_split_pmf(xi, n, lam):
	return GaltonWatsonSplit(xi, gw_table_cap=max(int(n), 2)).pmf(n, lam)


def kesten_qstar_pmf(xi, lam):
	lam = lam if isinstance(lam, Partition) else Partition.of(lam)
	return GaltonWatsonSplit(xi, gw_table_cap=max(lam.norm, 2)).qstar_pmf(lam)
