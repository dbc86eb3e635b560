# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Integer partitions with possibly infinite parts, their truncations and the d_P ultrametric.

A Partition is a non-increasing tuple of positive integers and INF markers. The same type covers
finite partitions of n (the first split of a size-n tree) and partitions with infinite parts
(the first split of an infinite tree).
"""

import math
from dataclasses import dataclass

from sympy.utilities.iterables import partitions as _sympy_partitions

from mbtlab.exceptions import throw

INF = math.inf
INF_TOKEN = "inf"


def _is_part(x):
	return x == INF or (isinstance(x, int) and not isinstance(x, bool) and x > 0)


@dataclass(frozen=True, order=True)
class Partition:
	parts: tuple = ()

	def __post_init__(self):
		parts = tuple(INF if x == INF else int(x) for x in self.parts)
		for x in parts:
			if not _is_part(x):
				throw(f"Partition parts must be positive integers or INF, got {x!r}")
		if any(a < b for a, b in zip(parts, parts[1:])):
			throw(f"Partition parts must be non-increasing, got {parts}")
		object.__setattr__(self, "parts", parts)

	@classmethod
	def of(cls, values):
		"""Build a partition from parts in any order."""
		return cls(tuple(sorted(values, reverse=True)))

	def __len__(self):
		return len(self.parts)

	def __iter__(self):
		return iter(self.parts)

	def __getitem__(self, i):
		return self.parts[i]

	def __str__(self):
		return self.to_text()

	@property
	def is_finite(self):
		return INF not in self.parts

	@property
	def norm(self):
		"""‖λ‖; INF when some part is infinite."""
		return INF if not self.is_finite else sum(self.parts)

	def multiplicity(self, k):
		return self.parts.count(k)

	def multiplicities(self):
		"""{part: m_part(λ)} for the distinct parts."""
		counts = {}
		for x in self.parts:
			counts[x] = counts.get(x, 0) + 1
		return counts

	def finite_part(self):
		"""The partition formed by the finite parts."""
		return Partition(tuple(x for x in self.parts if x != INF))

	def truncate(self, K):
		return truncate(self, K)

	def to_text(self):
		return ",".join(INF_TOKEN if x == INF else str(x) for x in self.parts)

	@classmethod
	def from_text(cls, text):
		text = text.strip().strip("()")
		if not text:
			return cls()
		values = []
		for token in text.split(","):
			token = token.strip()
			if token.lower() in (INF_TOKEN, "∞"):
				values.append(INF)
			elif token.isdigit():
				values.append(int(token))
			else:
				throw(f"Invalid partition token {token!r}")
		return cls(tuple(values))


EMPTY = Partition()


@dataclass(frozen=True)
class MassSeq:
	"""Non-increasing summable sequence; trailing zeros are implicit."""

	masses: tuple = ()

	def __post_init__(self):
		masses = tuple(float(x) for x in self.masses)
		if any(x < 0 for x in masses):
			throw("Mass sequences hold non-negative values")
		if any(a < b for a, b in zip(masses, masses[1:])):
			throw("Mass sequences must be non-increasing")
		while masses and masses[-1] == 0.0:
			masses = masses[:-1]
		object.__setattr__(self, "masses", masses)

	@property
	def norm(self):
		return math.fsum(self.masses)

	def __getitem__(self, i):
		return self.masses[i] if i < len(self.masses) else 0.0


def truncate(lam, K):
	"""λ∧K: componentwise min(part, K), length preserved, not re-sorted."""
	if K < 0:
		throw(f"Truncation level must be >= 0, got {K}")
	return tuple(K if x >= K else x for x in lam)


def d_P(lam, mu):
	"""
	exp(-inf{K >= 0 : λ∧K != μ∧K}), 0 when the partitions are equal.

	Partitions of different lengths already differ at K = 0. Otherwise the first differing level is
	one above the smaller of the first mismatching pair of parts.
	"""
	lam, mu = tuple(lam), tuple(mu)
	if lam == mu:
		return 0.0
	if len(lam) != len(mu):
		return 1.0
	K = min(min(a, b) + 1 for a, b in zip(lam, mu) if a != b)
	return math.exp(-K)


def iota(lam):
	"""Embed λ ∈ P_n as the mass sequence (λ_1/n, …, λ_p/n)."""
	lam = lam if isinstance(lam, Partition) else Partition.of(lam)
	if not len(lam) or not lam.is_finite:
		throw("iota needs a non-empty finite partition")
	n = lam.norm
	return MassSeq(tuple(x / n for x in lam.parts))


def multiplicity(lam, k):
	return tuple(lam).count(k)


def partitions_of(n, max_parts=None, max_part=None):
	"""
	Enumerate the partitions of n in reverse lexicographic order.

	Args:
		n: non-negative integer; n = 0 yields the empty partition
		max_parts: keep partitions with at most this many parts
		max_part: keep partitions whose largest part is at most this

	Yields:
		Partition
	"""
	if n < 0:
		return
	if n == 0:
		yield EMPTY
		return
	for counts in _sympy_partitions(n, m=max_parts, k=max_part):
		parts = []
		for part in sorted(counts, reverse=True):
			parts.extend([part] * counts[part])
		yield Partition(tuple(parts))


def padded_tuples(total, k):
	"""Non-increasing k-tuples of non-negative integers summing to `total` (zeros allowed)."""
	for lam in partitions_of(total, max_parts=k):
		yield lam.parts + (0,) * (k - len(lam))
