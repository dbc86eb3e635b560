# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
k-ary growing trees as a split law on internal vertices.

A split of a tree with n internal vertices is the non-increasing k-tuple of internal-vertex counts
of the root subtrees, zeros kept, summing to m = n - 1:

	q°(λ) = (k-1)!/∏_{j>=0} m_j(λ)! · (1/k) Γ(1/k)/Γ(m+1+1/k) · ∏ Γ(λ_i+1/k)/(Γ(1/k) λ_i!)
	        · Σ_i λ_i! Σ_{j=0}^{λ_i} (j+m-λ_i)!/j!

The k-1 finite subtrees beside the spine of the limit tree carry negative Dirichlet multinomial
counts.
"""

import math
from collections import Counter
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from mbtlab.exceptions import UnsupportedSizeError, ValidationError, throw
from mbtlab.mbtlab.dist_lib.dist_lib import (
	beta_geometric_pmf,
	neg_dirichlet_multinomial_logpmf,
	sample_neg_dirichlet_multinomial,
)
from mbtlab.mbtlab.growth_models.growth_models import grow_kary
from mbtlab.mbtlab.partition_core.partition_core import padded_tuples
from mbtlab.mbtlab.split_laws.split_laws import (
	DEFAULT_SPLIT_TABLE_CAP,
	INTERNAL,
	LOCAL_FORM_ATTEMPTS,
	VERTICES,
	SplitLaw,
)

ENUM_CAP = 20


def _multiplicity_log_factor(tup):
	return -sum(math.lgamma(m + 1) for m in Counter(tup).values())


class KarySplit(SplitLaw):
	name = "kary"
	semantics = INTERNAL
	has_qstar = True

	def __init__(self, k, split_table_cap=DEFAULT_SPLIT_TABLE_CAP):
		super().__init__(split_table_cap)
		if int(k) != k or k < 2:
			throw(f"k-ary trees need an integer k >= 2, got {k}")
		self.k = int(k)
		self.params = {"k": self.k}
		self._enumerated = lru_cache(maxsize=ENUM_CAP + 2)(self._build_enumerated)

	def supported(self, n):
		return n >= 1

	def _as_tuple(self, lam, length):
		tup = tuple(sorted((int(x) for x in lam), reverse=True))
		if len(tup) > length or any(x < 0 for x in tup):
			throw(f"A {self.k}-ary split has {length} non-negative entries, got {lam}", ValidationError)
		return tup + (0,) * (length - len(tup))

	def pmf(self, n, lam):
		lam = self._as_tuple(lam, self.k)
		m = n - 1
		if n < 1 or sum(lam) != m:
			return 0.0
		k = self.k
		a = 1.0 / k
		x = np.array(lam, dtype=np.float64)
		log_p = math.lgamma(k) + _multiplicity_log_factor(lam) - math.log(k)
		log_p += math.lgamma(a) - math.lgamma(m + 1 + a)
		log_p += float(np.sum(gammaln(x + a) - gammaln(a) - gammaln(x + 1)))
		log_p += self._log_slot_sum(lam, m)
		return math.exp(log_p)

	@staticmethod
	def _log_slot_sum(lam, m):
		"""log Σ_i λ_i! Σ_{j=0}^{λ_i} (j+m-λ_i)!/j!, grouping equal entries."""
		terms = []
		for value, mult in Counter(lam).items():
			j = np.arange(value + 1, dtype=np.float64)
			inner = logsumexp(gammaln(j + m - value + 1) - gammaln(j + 1))
			terms.append(math.log(mult) + math.lgamma(value + 1) + inner)
		return float(logsumexp(terms))

	def support(self, n):
		return padded_tuples(n - 1, self.k)

	def _build_enumerated(self, n):
		rows = self.pmf_table(n)
		return [lam for lam, _ in rows], np.cumsum([p for _, p in rows])

	def _sample_exact(self, n, rng):
		if n - 1 <= ENUM_CAP:
			splits, cdf = self._enumerated(n)
			i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
			return splits[min(i, len(splits) - 1)]
		t = grow_kary(self.k, n, rng)
		internal = t.subtree_sizes - t.subtree_leaves
		return self._as_tuple(internal[1 : t.child_ptr[1]].tolist(), self.k)

	def local_form(self, n, lam):
		lam = self._as_tuple(lam, self.k - 1)
		rest = n - 1 - sum(lam)
		if rest < 0:
			throw(f"Finite parts {lam} do not fit in a tree with {n} internal vertices")
		return self._as_tuple((rest, *lam), self.k)

	def _sample_local_form(self, n, rng):
		for _ in range(LOCAL_FORM_ATTEMPTS):
			lam = self.sample_qstar(rng)
			if sum(lam) < n - 1:
				return self.local_form(n, lam)
		throw(f"No limit split of {self.describe()} fits size {n}", UnsupportedSizeError)

	def qstar_pmf(self, lam):
		"""(k-1)!/∏ m_j! · NDM_k(λ) for a (k-1)-tuple λ."""
		lam = self._as_tuple(lam, self.k - 1)
		log_p = math.lgamma(self.k) + _multiplicity_log_factor(lam)
		log_p += float(neg_dirichlet_multinomial_logpmf(self.k, np.array(lam, dtype=np.float64)))
		return math.exp(log_p)

	def sample_qstar(self, rng):
		return self._as_tuple(sample_neg_dirichlet_multinomial(self.k, rng).tolist(), self.k - 1)

	def qstar_norm_pmf(self, n):
		return beta_geometric_pmf(1.0 / self.k, n)

	def sample_limit_split(self, rng):
		return 1, self.sample_qstar(rng)

	@property
	def gamma(self):
		return 1.0 / self.k

	@property
	def measure(self):
		return VERTICES

	@property
	def immigration(self):
		a = 1.0 / self.k
		return a / math.gamma(1 - a), a


def kary(params, split_table_cap=DEFAULT_SPLIT_TABLE_CAP, **caps):
	return KarySplit(float(params.get("k", 3)), split_table_cap)


def kary_split_pmf(k, n, lam):
	return KarySplit(k).pmf(n, lam)


def kary_qstar(k, lam):
	return KarySplit(k).qstar_pmf(lam)
