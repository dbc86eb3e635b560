# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
The α-γ model, 0 < γ <= α <= 1, as a leaf split law.

With θ = γ/α, p = len(λ) >= 2 and F(λ) = γ + (1-α-γ)/(n(n-1)) Σ_{i≠j} λ_i λ_j:

	q_n(λ) = 1/∏ m_j! · F(λ) · Γ(1-α) n!/Γ(n-α) · α^(p-2) Γ(p-1-θ)/Γ(1-θ) · ∏ Γ(λ_i-α)/(Γ(1-α) λ_i!)

The limit split has 1 + BG(θ) finite parts, i.i.d. 1 + BG(α).
"""

import math
from functools import lru_cache

import numpy as np

from mbtlab.exceptions import BudgetExceededError, throw
from mbtlab.mbtlab.dist_lib.dist_lib import beta_geometric_logpmf, sample_beta_geometric
from mbtlab.mbtlab.growth_models.growth_models import grow_alpha_gamma
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition
from mbtlab.mbtlab.split_laws.split_laws import (
	DEFAULT_SPLIT_TABLE_CAP,
	LEAVES,
	SplitLaw,
	symmetry_log_factor,
)
from mbtlab.mbtlab.tree_core.tree_core import first_split_leaves

ENUM_CAP = 20
QSTAR_PARTS_CAP = 10**7


class AlphaGammaSplit(SplitLaw):
	name = "alpha-gamma"
	semantics = LEAVES
	has_qstar = True

	def __init__(self, alpha, gamma, split_table_cap=DEFAULT_SPLIT_TABLE_CAP):
		super().__init__(split_table_cap)
		if not 0 < gamma <= alpha <= 1:
			throw(f"The α-γ model needs 0 < γ <= α <= 1, got α={alpha}, γ={gamma}")
		self.alpha = alpha
		self.gamma_param = gamma
		self.theta = gamma / alpha
		self.params = {"alpha": alpha, "gamma": gamma}
		self._enumerated = lru_cache(maxsize=ENUM_CAP + 1)(self._build_enumerated)

	def pmf(self, n, lam):
		lam = lam if isinstance(lam, Partition) else Partition.of(lam)
		if n == 1:
			return 1.0 if lam == EMPTY else 0.0
		p = len(lam)
		if lam.norm != n or p < 2:
			return 0.0
		a, theta = self.alpha, self.theta
		if p >= 3 and theta == 1:
			return 0.0

		big = [x for x in lam.parts if x >= 2]
		if big:
			spread = (n * n - sum(x * x for x in lam.parts)) / (n * (n - 1))
			F = self.gamma_param + (1 - a - self.gamma_param) * spread
			G = F * (1 - a) ** (len(big) - 1)
			if G <= 0:
				return 0.0
			log_g = math.log(G)
		else:
			# F (1-α)^(-1) = 1 when every part is 1
			log_g = 0.0

		log_p = symmetry_log_factor(lam) + log_g
		log_p += math.lgamma(n + 1) + math.lgamma(2 - a) - math.lgamma(n - a)
		log_p += (p - 2) * math.log(a)
		if p >= 3:
			log_p += math.lgamma(p - 1 - theta) - math.lgamma(1 - theta)
		for x in big:
			log_p += math.lgamma(x - a) - math.lgamma(2 - a) - math.lgamma(x + 1)
		return math.exp(log_p)

	def _build_enumerated(self, n):
		rows = self.pmf_table(n)
		return [lam for lam, _ in rows], np.cumsum([p for _, p in rows])

	def _sample_exact(self, n, rng):
		if n == 1:
			return EMPTY
		if n <= ENUM_CAP:
			splits, cdf = self._enumerated(n)
			i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
			return splits[min(i, len(splits) - 1)]
		return first_split_leaves(grow_alpha_gamma(self.alpha, self.gamma_param, n, rng))

	def qstar_pmf(self, lam):
		"""BG(θ)(p-1) · p!/∏ m_j! · ∏ BG(α)(λ_i - 1)."""
		lam = lam if isinstance(lam, Partition) else Partition.of(lam)
		p = len(lam)
		if p == 0 or not lam.is_finite:
			return 0.0
		log_p = float(beta_geometric_logpmf(self.theta, p - 1)) + math.lgamma(p + 1) + symmetry_log_factor(lam)
		log_p += float(np.sum(beta_geometric_logpmf(self.alpha, np.array(lam.parts) - 1)))
		return math.exp(log_p)

	def sample_qstar(self, rng):
		p = 1 + sample_beta_geometric(self.theta, rng)
		if p > QSTAR_PARTS_CAP:
			throw(f"Limit split with {p} finite parts exceeds {QSTAR_PARTS_CAP}", BudgetExceededError)
		parts = 1 + sample_beta_geometric(self.alpha, rng, size=p)
		return Partition.of(parts.tolist())

	@property
	def gamma(self):
		return self.gamma_param


def alpha_gamma(params, split_table_cap=DEFAULT_SPLIT_TABLE_CAP, **caps):
	return AlphaGammaSplit(float(params.get("alpha", 0.5)), float(params.get("gamma", 0.5)), split_table_cap)


def alpha_gamma_split_pmf(alpha, gamma, n, lam):
	return AlphaGammaSplit(alpha, gamma).pmf(n, lam)


def alpha_gamma_qstar(alpha, gamma, lam):
	return AlphaGammaSplit(alpha, gamma).qstar_pmf(lam)
