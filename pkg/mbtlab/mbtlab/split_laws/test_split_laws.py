# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import math
from collections import Counter

import numpy as np
import pytest

from mbtlab.exceptions import UnknownModelError, UnsupportedSizeError, ValidationError
from mbtlab.mbtlab.analysis.analysis import binomial_zscore, chi_square_pvalue
from mbtlab.mbtlab.dist_lib.dist_lib import beta_geometric_pmf, borel_pmf, poisson_offspring
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition, padded_tuples
from mbtlab.mbtlab.split_laws.alpha_gamma import AlphaGammaSplit
from mbtlab.mbtlab.split_laws.binary_laws import (
	BetaSplitting,
	CayleyCutSplit,
	FordSplit,
	RecursiveCutSplit,
	beta_splitting_pmf,
)
from mbtlab.mbtlab.split_laws.galton_watson import (
	gw_binary,
	gw_geometric,
	gw_poisson,
	gw_poisson_leaves,
	gw_split_pmf,
	kesten_qstar_pmf,
)
from mbtlab.mbtlab.split_laws.kary import KarySplit
from mbtlab.mbtlab.split_laws.split_laws import LEAVES, VERTICES, get_split_law

SMALL_TABLE = {"gw_table_cap": 64}


def total_mass(law, n):
	return sum(p for _, p in law.pmf_table(n))


def sampled_pvalue(law, n, rng, draws=3000):
	observed = Counter(law.sample_split(n, rng) for _ in range(draws))
	return chi_square_pvalue(observed, dict(law.pmf_table(n)))


def test_beta_splitting_examples():
	assert beta_splitting_pmf(-1, 4, 1) == pytest.approx(8 / 11)
	assert beta_splitting_pmf(-1, 4, 2) == pytest.approx(3 / 11)
	law = BetaSplitting(-1.5)
	assert law.pmf(1, EMPTY) == 1.0
	assert law.pmf(4, Partition((2, 1, 1))) == 0.0
	with pytest.raises(ValidationError):
		BetaSplitting(-2)


def test_yule_splits_uniformly():
	law = FordSplit(0.0)
	for n in range(3, 9):
		for k in range(1, n // 2 + 1):
			expected = (1 if 2 * k == n else 2) / (n - 1)
			assert law.pmf(n, Partition((n - k, k))) == pytest.approx(expected)


def test_cayley_cut_examples():
	law = CayleyCutSplit()
	assert law.pmf(3, Partition((2, 1))) == pytest.approx(1.0)
	assert law.pmf(4, Partition((3, 1))) == pytest.approx(0.75)
	assert law.pmf(4, Partition((2, 2))) == pytest.approx(0.25)
	for k in range(1, 6):
		assert law.qstar_pmf(Partition((k,))) == pytest.approx(borel_pmf(k))


def test_gw_examples():
	poisson = gw_poisson({}, **SMALL_TABLE)
	assert poisson.pmf(3, Partition((2,))) == pytest.approx(2 / 3)
	assert poisson.pmf(3, Partition((1, 1))) == pytest.approx(1 / 3)
	geometric = gw_geometric({}, **SMALL_TABLE)
	assert geometric.pmf(3, Partition((2,))) == pytest.approx(0.5)
	assert geometric.pmf(3, Partition((1, 1))) == pytest.approx(0.5)
	assert poisson.pmf(1, EMPTY) == pytest.approx(1.0)


def test_gw_functional_forms():
	xi = poisson_offspring()
	assert gw_split_pmf(xi, 3, (2,)) == pytest.approx(2 / 3)
	assert gw_split_pmf(xi, 3, (1, 1)) == pytest.approx(1 / 3)
	assert gw_split_pmf(xi, 2, (1,)) == pytest.approx(1.0)
	assert gw_split_pmf(xi, 3, (1,)) == 0.0
	assert kesten_qstar_pmf(xi, EMPTY) == pytest.approx(math.exp(-1))
	assert kesten_qstar_pmf(xi, (1,)) == pytest.approx(math.exp(-2))


@pytest.mark.parametrize(
	"law",
	[
		CayleyCutSplit(),
		RecursiveCutSplit(),
		FordSplit(0.3),
		FordSplit(1.0),
		BetaSplitting(-1.7),
		BetaSplitting(0.5),
		AlphaGammaSplit(0.7, 0.4),
		AlphaGammaSplit(0.5, 0.2),
		AlphaGammaSplit(1.0, 1.0),
		KarySplit(2),
		KarySplit(3),
		gw_poisson({}, **SMALL_TABLE),
		gw_geometric({}, **SMALL_TABLE),
		gw_poisson_leaves({}, **SMALL_TABLE),
	],
	ids=repr,
)
def test_split_laws_normalize(law):
	for n in range(1, 9):
		if law.supported(n):
			assert total_mass(law, n) == pytest.approx(1.0, abs=1e-9)


def test_equivalent_parametrisations():
	uniform_beta, uniform_ford = BetaSplitting(-1.5), FordSplit(0.5)
	for n in range(2, 11):
		for k in range(1, n // 2 + 1):
			lam = Partition((n - k, k))
			assert uniform_beta.pmf(n, lam) == pytest.approx(uniform_ford.pmf(n, lam))
	# γ = α leaves only binary splits, which are Ford's
	for a in (0.3, 0.6):
		ag, ford = AlphaGammaSplit(a, a), FordSplit(a)
		for n in range(2, 9):
			for lam, p in ag.pmf_table(n):
				assert len(lam) == 2
				assert p == pytest.approx(ford.pmf(n, lam))


def test_semantics_and_support():
	assert CayleyCutSplit().semantics == LEAVES
	assert gw_poisson({}, **SMALL_TABLE).semantics == VERTICES
	binary = gw_binary({}, **SMALL_TABLE)
	assert binary.supported(5)
	assert not binary.supported(4)
	with pytest.raises(UnsupportedSizeError):
		binary.sample_split(4, np.random.default_rng(0))
	leaf_law = gw_poisson_leaves({}, **SMALL_TABLE)
	assert 0 < leaf_law.prob_unsplit(4) < 1
	assert FordSplit(0.5).prob_unsplit(4) == 0.0


@pytest.mark.parametrize(
	"law, n",
	[
		(CayleyCutSplit(), 7),
		(RecursiveCutSplit(), 6),
		(BetaSplitting(-1.2), 8),
		(AlphaGammaSplit(0.7, 0.4), 6),
		(KarySplit(3), 5),
		(gw_poisson({}, **SMALL_TABLE), 6),
		(gw_poisson_leaves({}, **SMALL_TABLE), 4),
	],
	ids=repr,
)
def test_sample_split_matches_pmf(law, n):
	assert sampled_pvalue(law, n, np.random.default_rng(7)) > 1e-3


def test_proper_split_is_never_unary():
	law = gw_poisson_leaves({}, **SMALL_TABLE)
	rng = np.random.default_rng(3)
	for _ in range(200):
		assert law.sample_proper_split(4, rng).parts != (4,)


def test_split_beyond_table_uses_limit_law():
	rng = np.random.default_rng(11)
	law = BetaSplitting(-1.5, split_table_cap=10)
	for _ in range(50):
		lam = law.sample_split(1000, rng)
		assert lam.norm == 1000
		assert len(lam) == 2
	with pytest.raises(UnsupportedSizeError):
		BetaSplitting(0.0, split_table_cap=10).sample_split(1000, rng)


def test_local_form_approaches_qstar():
	law = CayleyCutSplit()
	lam = Partition((2,))
	q_star = law.qstar_pmf(lam)
	gaps = [abs(law.pmf(n, law.local_form(n, lam)) - q_star) for n in (10, 40, 160)]
	assert gaps[0] > gaps[1] > gaps[2]
	assert gaps[2] < 0.01
	with pytest.raises(ValidationError):
		law.local_form(2, lam)


def test_alpha_gamma_qstar():
	law = AlphaGammaSplit(0.7, 0.4)
	rng = np.random.default_rng(5)
	draws = [law.sample_qstar(rng) for _ in range(4000)]
	singles = sum(len(lam) == 1 for lam in draws)
	assert abs(binomial_zscore(singles, len(draws), beta_geometric_pmf(law.theta, 0))) < 4
	ones = sum(lam == Partition((1,)) for lam in draws)
	assert abs(binomial_zscore(ones, len(draws), law.qstar_pmf(Partition((1,))))) < 4


def test_kary_qstar_norm_is_beta_geometric():
	law = KarySplit(3)
	for m in range(6):
		mass = sum(law.qstar_pmf(t) for t in padded_tuples(m, 2))
		assert mass == pytest.approx(beta_geometric_pmf(1 / 3, m))
	binary = KarySplit(2)
	for m in range(6):
		assert binary.qstar_pmf((m,)) == pytest.approx(binary.qstar_norm_pmf(m))


def test_qstar_samplers():
	rng = np.random.default_rng(9)
	law = BetaSplitting(-1.5)
	cutoff = 2000
	# q_* has a k^(-1/2) tail: draws from cutoff on share one bin
	observed = Counter(min(law.sample_qstar(rng)[0], cutoff) for _ in range(3000))
	probs = {k: law.qstar_pmf(Partition((k,))) for k in range(1, cutoff)}
	probs[cutoff] = 1.0 - sum(probs.values())
	assert probs[cutoff] > 0
	assert chi_square_pvalue(observed, probs) > 1e-3
	with pytest.raises(ValidationError):
		BetaSplitting(-0.5).sample_qstar(rng)


def test_scaling_descriptors():
	assert FordSplit(0.3).gamma == 0.3
	assert FordSplit(0.0).gamma is None
	assert KarySplit(4).scaling()["volume_exponent"] == pytest.approx(4.0)
	assert gw_poisson({}, **SMALL_TABLE).immigration == pytest.approx((math.sqrt(1 / (2 * math.pi)), 0.5))
	assert BetaSplitting(-1.5).immigration[1] == pytest.approx(0.5)


def test_registry():
	law = get_split_law("beta-splitting", {"beta": -1.2})
	assert isinstance(law, BetaSplitting)
	assert law.describe() == "beta-splitting beta=-1.2"
	with pytest.raises(UnknownModelError):
		get_split_law("no-such-law")
