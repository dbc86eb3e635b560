# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""Binary leaf laws: cut-trees of Cayley and recursive trees, Ford's α-model and Aldous' β-splitting."""

import math

import numpy as np
from scipy.special import gammaln, logsumexp

from mbtlab.exceptions import throw
from mbtlab.mbtlab.dist_lib.dist_lib import (
	beta_geometric_logpmf,
	borel_logpmf,
	borel_pmf,
	sample_beta_geometric,
	sample_borel,
)
from mbtlab.mbtlab.partition_core.partition_core import Partition
from mbtlab.mbtlab.split_laws.split_laws import DEFAULT_SPLIT_TABLE_CAP, BinarySplitLaw


def _middle_weight(n, k):
	"""log(2 - 1{2k = n}) - log 2: halves the mass of the balanced split."""
	return np.where(2 * k == n, -math.log(2), 0.0)


def _single_part(lam):
	lam = lam if isinstance(lam, Partition) else Partition.of(lam)
	return lam[0] if len(lam) == 1 else None


class CayleyCutSplit(BinarySplitLaw):
	"""
	Cut-tree of a uniform labelled tree on n vertices.

	q_n(n-k, k) = (2 - 1{2k=n})/2 · (n-k)^(n-k-1)/(n-k)! · k^(k-1)/k! · (n-2)!/n^(n-3); the finite part
	of the limit split is Borel distributed.
	"""

	name = "cayley-cut"
	has_qstar = True

	def binary_logpmf(self, n, k):
		k = np.asarray(k, dtype=np.float64)
		j = n - k
		with np.errstate(divide="ignore", invalid="ignore"):
			log_a = (j - 1) * np.log(j) - gammaln(j + 1) + (k - 1) * np.log(k) - gammaln(k + 1)
		return _middle_weight(n, k) + log_a + gammaln(n - 1) - (n - 3) * math.log(n)

	def qstar_pmf(self, lam):
		k = _single_part(lam)
		return borel_pmf(k) if k is not None and k >= 1 else 0.0

	def sample_qstar(self, rng):
		return Partition((sample_borel(rng),))

	def qstar_norm_pmf(self, n):
		return float(np.exp(borel_logpmf(n)))

	@property
	def gamma(self):
		return 0.5

	@property
	def immigration(self):
		return (2 * math.pi) ** -0.5, 0.5


class RecursiveCutSplit(BinarySplitLaw):
	"""
	Cut-tree of a uniform recursive tree.

	q_n(n-k, k) = n/(n-1) (1/(k(k+1)) + 1/((n-k)(n-k+1))) for k < n/2 and 4/((n-1)(n+2)) at k = n/2;
	the limit part has π(k) = 1/(k(k+1)).
	"""

	name = "recursive-cut"
	has_qstar = True

	def binary_logpmf(self, n, k):
		k = np.asarray(k, dtype=np.float64)
		j = n - k
		off_middle = n / (n - 1) * (1 / (k * (k + 1)) + 1 / (j * (j + 1)))
		middle = 4 / ((n - 1) * (n + 2))
		return np.log(np.where(2 * k == n, middle, off_middle))

	def qstar_pmf(self, lam):
		k = _single_part(lam)
		return 1 / (k * (k + 1)) if k is not None and k >= 1 else 0.0

	def sample_qstar(self, rng):
		# P(K >= k) = 1/k
		u = 1.0 - rng.random()
		return Partition((int(min(math.floor(1 / u), 2**62)),))

	def qstar_norm_pmf(self, n):
		return 1 / (n * (n + 1))

	@property
	def gamma(self):
		return 1.0


class FordSplit(BinarySplitLaw):
	"""
	Ford's α-model, 0 <= α <= 1.

	q_n(n-k, k) = (2 - 1{2k=n}) C(n,k) Γ(n-k-α)Γ(k-α)/(Γ(1-α)Γ(n-α)) (α/2 + (1-2α)(n-k)k/(n(n-1))).
	α = 0 is Yule's model, α = 1/2 the uniform binary tree, α = 1 the comb.
	"""

	name = "ford"

	def __init__(self, alpha, split_table_cap=DEFAULT_SPLIT_TABLE_CAP):
		super().__init__(split_table_cap)
		if not 0 <= alpha <= 1:
			throw(f"Ford's model needs 0 <= α <= 1, got {alpha}")
		self.alpha = alpha
		self.params = {"alpha": alpha}
		self.has_qstar = alpha > 0
		self.m_inf = 1 if alpha > 0 else 2

	def binary_logpmf(self, n, k):
		a = self.alpha
		k = np.asarray(k, dtype=np.float64)
		if a == 1:
			return np.where(k == 1, 0.0, -np.inf)
		j = n - k
		shape = a / 2 + (1 - 2 * a) * j * k / (n * (n - 1))
		with np.errstate(divide="ignore"):
			log_shape = np.log(shape)
		log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(j + 1)
		log_gamma = gammaln(j - a) + gammaln(k - a) - gammaln(1 - a) - gammaln(n - a)
		return math.log(2) + _middle_weight(n, k) + log_binom + log_gamma + log_shape

	def qstar_pmf(self, lam):
		self._require_qstar()
		k = _single_part(lam)
		if k is None or k < 1:
			return 0.0
		return float(np.exp(beta_geometric_logpmf(self.alpha, k - 1)))

	def sample_qstar(self, rng):
		self._require_qstar()
		return Partition((1 + sample_beta_geometric(self.alpha, rng),))

	def qstar_norm_pmf(self, n):
		return self.qstar_pmf(Partition((n,)))

	@property
	def gamma(self):
		return self.alpha if self.alpha > 0 else None

	@property
	def immigration(self):
		if not 0 < self.alpha < 1:
			return None
		return self.alpha / math.gamma(1 - self.alpha), self.alpha


class BetaSplitting(BinarySplitLaw):
	"""
	Aldous' β-splitting model, β > -2.

	q_n(n-k, k) ∝ (2 - 1{2k=n}) Γ(n-k+1+β)/(n-k)! · Γ(k+1+β)/k!. For β < -1 the limit part is
	1 + BG(-1-β); for β >= -1 the local limit is the complete binary tree.
	"""

	name = "beta-splitting"

	def __init__(self, beta, split_table_cap=DEFAULT_SPLIT_TABLE_CAP):
		super().__init__(split_table_cap)
		if not beta > -2:
			throw(f"β-splitting needs β > -2, got {beta}")
		self.beta = beta
		self.params = {"beta": beta}
		self.has_qstar = beta < -1
		self.m_inf = 1 if beta < -1 else 2

	def binary_logpmf(self, n, k):
		k = np.asarray(k, dtype=np.float64)
		all_k = np.arange(1, n // 2 + 1, dtype=np.float64)
		log_z = logsumexp(self._unnormalized(n, all_k))
		return self._unnormalized(n, k) - log_z

	def _unnormalized(self, n, k):
		b = self.beta
		j = n - k
		return (
			math.log(2)
			+ _middle_weight(n, k)
			+ gammaln(j + 1 + b)
			- gammaln(j + 1)
			+ gammaln(k + 1 + b)
			- gammaln(k + 1)
		)

	def binary_pmf(self, n):
		log_w = self._unnormalized(n, np.arange(1, n // 2 + 1, dtype=np.float64))
		return np.exp(log_w - logsumexp(log_w))

	@property
	def theta(self):
		return -1 - self.beta

	def qstar_pmf(self, lam):
		self._require_qstar()
		k = _single_part(lam)
		if k is None or k < 1:
			return 0.0
		return float(np.exp(beta_geometric_logpmf(self.theta, k - 1)))

	def sample_qstar(self, rng):
		self._require_qstar()
		return Partition((1 + sample_beta_geometric(self.theta, rng),))

	def qstar_norm_pmf(self, n):
		return self.qstar_pmf(Partition((n,)))

	@property
	def gamma(self):
		return self.theta if self.beta < -1 else None

	@property
	def immigration(self):
		if not self.beta < -1:
			return None
		return self.theta / math.gamma(1 - self.theta), self.theta


def cayley_cut(params, split_table_cap=DEFAULT_SPLIT_TABLE_CAP, **caps):
	return CayleyCutSplit(split_table_cap)


def recursive_cut(params, split_table_cap=DEFAULT_SPLIT_TABLE_CAP, **caps):
	return RecursiveCutSplit(split_table_cap)


def ford(params, split_table_cap=DEFAULT_SPLIT_TABLE_CAP, **caps):
	return FordSplit(float(params.get("alpha", 0.5)), split_table_cap)


def beta_splitting(params, split_table_cap=DEFAULT_SPLIT_TABLE_CAP, **caps):
	return BetaSplitting(float(params.get("beta", -1.5)), split_table_cap)


def cayley_cut_split_pmf(n, k):
	return CayleyCutSplit().pmf(n, Partition.of([n - k, k]))


def recursive_cut_split_pmf(n, k):
	return RecursiveCutSplit().pmf(n, Partition.of([n - k, k]))


def ford_split_pmf(alpha, n, k):
	return FordSplit(alpha).pmf(n, Partition.of([n - k, k]))


def beta_splitting_pmf(beta, n, k):
	return BetaSplitting(beta).pmf(n, Partition.of([n - k, k]))


def beta_splitting_qstar(beta, k):
	return BetaSplitting(beta).qstar_pmf(Partition((k,)))
