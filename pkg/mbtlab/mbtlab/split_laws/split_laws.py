# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
First-split distributions q_n and their local limits.

A split law answers four questions about a size-n tree: the probability of a first split
(`pmf`), a draw from it (`sample_split`), the limit law q_* of the finite parts seen from an
infinite spine (`qstar_pmf`, `sample_qstar`) and the scaling descriptor of the model.

Size semantics:
	vertices: n counts vertices, λ ∈ P_{n-1}
	leaves: n counts leaves, λ ∈ P_n; λ = (n) is the unary split
	internal: n counts internal vertices of a k-ary tree, λ is a k-tuple summing to n-1
"""

import math
from functools import lru_cache

import numpy as np

from mbtlab.exceptions import UnknownModelError, UnsupportedSizeError, ValidationError, throw
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition, partitions_of

VERTICES = "vertices"
LEAVES = "leaves"
INTERNAL = "internal"

DEFAULT_SPLIT_TABLE_CAP = 20000
LOCAL_FORM_ATTEMPTS = 10_000


class SplitLaw:
	name = "split"
	semantics = VERTICES
	# number of infinite parts of a limit split
	m_inf = 1
	has_qstar = False

	def __init__(self, split_table_cap=DEFAULT_SPLIT_TABLE_CAP):
		self.split_table_cap = int(split_table_cap)
		self.params = {}

	def __repr__(self):
		params = ", ".join(f"{k}={v}" for k, v in self.params.items())
		return f"{type(self).__name__}({params})"

	def describe(self):
		"""Model name with its parameters, as written in report headers."""
		params = " ".join(f"{k}={v}" for k, v in self.params.items())
		return f"{self.name} {params}".strip()

	def split_total(self, n):
		"""‖λ‖ of every first split of a size-n tree."""
		return n if self.semantics == LEAVES else n - 1

	@property
	def min_size(self):
		return 0 if self.semantics == INTERNAL else 1

	def supported(self, n):
		return n >= self.min_size

	def require_supported(self, n):
		if not self.supported(n):
			throw(f"{self.describe()} has no tree of size {n}", UnsupportedSizeError)

	def pmf(self, n, lam):
		raise NotImplementedError

	def support(self, n):
		"""Every first split a size-n tree can have."""
		if self.semantics == LEAVES:
			# one leaf: either no children or the top of a unary branch
			return [EMPTY, Partition((1,))] if n == 1 else list(partitions_of(n))
		return partitions_of(n - 1)

	def pmf_table(self, n):
		"""[(λ, q_n(λ))] over the support, zero entries dropped."""
		self.require_supported(n)
		rows = []
		for lam in self.support(n):
			p = self.pmf(n, lam)
			if p > 0:
				rows.append((lam, p))
		return rows

	def sample_split(self, n, rng):
		self.require_supported(n)
		if n <= self.split_table_cap:
			return self._sample_exact(n, rng)
		return self._sample_local_form(n, rng)

	def _sample_exact(self, n, rng):
		raise NotImplementedError

	def local_form(self, n, lam):
		"""(total - ‖λ‖, λ): the split of a size-n tree whose large part carries the rest."""
		rest = self.split_total(n) - lam.norm
		if rest <= 0:
			throw(f"Finite parts {lam} do not fit in a tree of size {n}")
		return Partition.of([rest, *lam.parts])

	def _sample_local_form(self, n, rng):
		if not self.has_qstar:
			throw(
				f"{self.describe()} has no limit law to split size {n} beyond the table cap "
				f"{self.split_table_cap}",
				UnsupportedSizeError,
			)
		total = self.split_total(n)
		for _ in range(LOCAL_FORM_ATTEMPTS):
			lam = self.sample_qstar(rng)
			if lam.norm < total:
				split = self.local_form(n, lam)
				if all(self.supported_part(x) for x in split.parts):
					return split
		throw(f"No limit split of {self.describe()} fits size {n}", UnsupportedSizeError)

	def supported_part(self, size):
		"""Whether a subtree of this size exists."""
		return size >= 1

	def prob_unsplit(self, n):
		"""q_n((n)): the unary split of a leaf law."""
		if self.semantics != LEAVES:
			return 0.0
		return self.pmf(n, Partition((n,)))

	def sample_proper_split(self, n, rng):
		"""A first split conditioned on not being unary."""
		if self.prob_unsplit(n) >= 1:
			throw(f"{self.describe()} never splits a tree with {n} leaves", ValidationError)
		while True:
			lam = self.sample_split(n, rng)
			if self.semantics != LEAVES or lam.parts != (n,):
				return lam

	def qstar_pmf(self, lam):
		self._require_qstar()
		raise NotImplementedError

	def sample_qstar(self, rng):
		self._require_qstar()
		raise NotImplementedError

	def qstar_norm_pmf(self, n):
		"""P(‖λ‖ = n) under q_*; None when no closed form is coded."""
		return None

	def _require_qstar(self):
		if not self.has_qstar:
			throw(f"{self.describe()} has no limit law of finite parts", ValidationError)

	def sample_limit_split(self, rng):
		"""(number of infinite parts, finite parts) of a spine vertex of the infinite tree."""
		if not self.has_qstar:
			return self.m_inf, EMPTY
		return self.m_inf, self.sample_qstar(rng)

	@property
	def gamma(self):
		"""Self-similarity index; None when the model has no polynomial scaling."""
		return None

	@property
	def measure(self):
		return self.semantics

	@property
	def immigration(self):
		"""(c, γ) with n^(1+γ) q_*(‖λ‖ = n) -> c, or None."""
		return None

	def scaling(self):
		gamma = self.gamma
		return {
			"model": self.describe(),
			"gamma": gamma,
			"measure": self.measure,
			"volume_exponent": None if not gamma else 1.0 / gamma,
		}


class BinarySplitLaw(SplitLaw):
	"""
	Leaf law supported on binary splits (n-k, k), 1 <= k <= n/2, with q_1 = δ_∅.

	Subclasses implement `binary_logpmf(n, k)` for an array k of small parts.
	"""

	semantics = LEAVES

	def __init__(self, split_table_cap=DEFAULT_SPLIT_TABLE_CAP):
		super().__init__(split_table_cap)
		self._cdf = lru_cache(maxsize=512)(self._build_cdf)

	def binary_logpmf(self, n, k):
		raise NotImplementedError

	def binary_pmf(self, n):
		"""q_n(n-k, k) for k = 1..n//2."""
		k = np.arange(1, n // 2 + 1)
		return np.exp(self.binary_logpmf(n, k))

	def pmf(self, n, lam):
		lam = lam if isinstance(lam, Partition) else Partition.of(lam)
		if n == 1:
			return 1.0 if lam == EMPTY else 0.0
		if len(lam) != 2 or lam.norm != n:
			return 0.0
		return float(np.exp(self.binary_logpmf(n, np.array([lam[1]]))[0]))

	def support(self, n):
		if n == 1:
			return [EMPTY]
		return [Partition((n - k, k)) for k in range(1, n // 2 + 1)]

	def _build_cdf(self, n):
		return np.cumsum(self.binary_pmf(n))

	def _sample_exact(self, n, rng):
		if n == 1:
			return EMPTY
		cdf = self._cdf(n)
		k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")) + 1
		k = min(k, n // 2)
		return Partition((n - k, k))


def symmetry_log_factor(lam):
	"""-Σ log m_j(λ)! over the distinct parts."""
	return -sum(math.lgamma(m + 1) for m in lam.multiplicities().values())


def get_split_law(name, params=None, settings=None):
	"""
	Build a registered split law.

	Args:
		name: registry name, e.g. "gw-poisson" or "beta-splitting"
		params: model parameters, e.g. {"beta": -1.5}
		settings: LabSettings supplying table caps

	Returns:
		SplitLaw
	"""
	from mbtlab.hooks import get_attr, split_law_registry

	if name not in split_law_registry:
		throw(f"Unknown split law {name!r}; known: {', '.join(sorted(split_law_registry))}", UnknownModelError)
	factory = get_attr(split_law_registry[name])
	caps = {}
	if settings is not None:
		caps = {"split_table_cap": settings.split_table_cap, "gw_table_cap": settings.gw_table_cap}
	return factory(params or {}, **caps)
