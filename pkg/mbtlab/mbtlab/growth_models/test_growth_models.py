# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import math
from collections import Counter

import numpy as np
import pytest

from mbtlab.exceptions import BudgetExceededError, ValidationError
from mbtlab.mbtlab.analysis.analysis import binomial_zscore, chi_square_pvalue, tv_to_law
from mbtlab.mbtlab.dist_lib.dist_lib import binary_offspring, geometric_offspring, poisson_offspring
from mbtlab.mbtlab.growth_models.growth_models import (
	cut_tree,
	cut_tree_union_find,
	grow_alpha_gamma,
	grow_kary,
	ball_shape,
	kesten_ball,
	kesten_ball_law,
	kesten_volume_curve,
	offspring_law,
	sample_cayley,
	sample_conditioned_gw,
	sample_recursive_tree,
)
from mbtlab.mbtlab.split_laws.alpha_gamma import AlphaGammaSplit
from mbtlab.mbtlab.split_laws.binary_laws import CayleyCutSplit, RecursiveCutSplit
from mbtlab.mbtlab.split_laws.kary import KarySplit
from mbtlab.mbtlab.tree_core.tree_core import Tree, first_split_leaves

PATH_3 = Tree.branch(2)


def shape_share(sampler, shape, draws, rng):
	return sum(sampler(rng) == shape for _ in range(draws))


def test_cayley_tree():
	rng = np.random.default_rng(1)
	t = sample_cayley(12, rng)
	assert t.size == 12
	assert sorted(t.labels) == list(range(1, 13))
	assert sample_cayley(1, rng).labels == (1,)
	# 6 of the 9 rooted labelled trees on 3 vertices are paths
	hits = shape_share(lambda r: sample_cayley(3, r), PATH_3, 3000, rng)
	assert abs(binomial_zscore(hits, 3000, 2 / 3)) < 4


def test_recursive_tree():
	rng = np.random.default_rng(2)
	t = sample_recursive_tree(10, rng)
	assert t.size == 10
	# labels increase away from the root
	for v in range(1, t.size):
		assert t.labels[v] > t.labels[t.parent[v]]
	hits = shape_share(lambda r: sample_recursive_tree(3, r), PATH_3, 3000, rng)
	assert abs(binomial_zscore(hits, 3000, 0.5)) < 4
	with pytest.raises(ValidationError):
		sample_recursive_tree(0, rng)


@pytest.mark.parametrize("cut", [cut_tree, cut_tree_union_find])
def test_cut_tree_structure(cut):
	rng = np.random.default_rng(3)
	t = sample_cayley(15, rng)
	c = cut(t, rng)
	assert c.size == 2 * t.size - 1
	assert c.n_leaves == t.size
	assert set(np.unique(c.child_counts)) <= {0, 2}
	leaf_labels = sorted(c.labels[u] for u in range(c.size) if c.is_leaf(u))
	assert leaf_labels == list(range(1, 16))
	assert cut(Tree.single_vertex(), rng).size == 1


@pytest.mark.parametrize("cut", [cut_tree, cut_tree_union_find])
@pytest.mark.parametrize(
	"sampler, law",
	[(sample_cayley, CayleyCutSplit()), (sample_recursive_tree, RecursiveCutSplit())],
	ids=["cayley", "recursive"],
)
def test_cut_tree_first_split(cut, sampler, law):
	rng = np.random.default_rng(4)
	n = 6
	observed = Counter(first_split_leaves(cut(sampler(n, rng), rng)) for _ in range(3000))
	assert chi_square_pvalue(observed, dict(law.pmf_table(n))) > 1e-3


def test_alpha_gamma_growth():
	rng = np.random.default_rng(5)
	t = grow_alpha_gamma(0.7, 0.4, 40, rng)
	assert t.n_leaves == 40
	assert not np.any(t.child_counts == 1)
	assert grow_alpha_gamma(0.5, 0.5, 1, rng).size == 1
	observed = Counter(first_split_leaves(grow_alpha_gamma(0.7, 0.4, 5, rng)) for _ in range(3000))
	assert chi_square_pvalue(observed, dict(AlphaGammaSplit(0.7, 0.4).pmf_table(5))) > 1e-3
	with pytest.raises(ValidationError):
		grow_alpha_gamma(0.3, 0.5, 5, rng)


def test_kary_growth():
	rng = np.random.default_rng(6)
	t = grow_kary(3, 4, rng)
	assert t.size == 13
	assert t.n_leaves == 9
	assert set(np.unique(t.child_counts)) == {0, 3}
	assert grow_kary(2, 0, rng).size == 1

	def first_split(r):
		g = grow_kary(3, 5, r)
		internal = g.subtree_sizes - g.subtree_leaves
		return tuple(sorted(internal[1 : g.child_ptr[1]].tolist(), reverse=True))

	observed = Counter(first_split(rng) for _ in range(3000))
	assert chi_square_pvalue(observed, dict(KarySplit(3).pmf_table(5))) > 1e-3


def test_kesten_ball():
	rng = np.random.default_rng(7)
	b = kesten_ball(poisson_offspring(), 6, rng)
	assert b.tree.height <= 6
	assert b.spine_length == 6
	assert np.count_nonzero(b.backbone) == 7
	spine_tip = np.flatnonzero(b.backbone & (b.tree.depth == 6))
	assert b.frontier[spine_tip].all()
	assert not b.is_leaf[b.backbone].any()
	with pytest.raises(BudgetExceededError):
		kesten_ball(geometric_offspring(), 400, rng, node_cap=50)


def test_kesten_ball_law_examples():
	law = kesten_ball_law(poisson_offspring(), 1)
	for k in range(1, 6):
		assert law(Tree.star(k)) == pytest.approx(math.exp(-1) / math.factorial(k - 1))
	assert sum(law(Tree.star(k)) for k in range(1, 40)) == pytest.approx(1.0)
	assert law(Tree([-1])) == 0.0
	law = kesten_ball_law(poisson_offspring(), 2)
	assert law(Tree([-1, 0, 1])) == pytest.approx(math.exp(-2))
	assert law(Tree([-1, 0, 0, 1])) == pytest.approx(math.exp(-3))
	# depth-1 leaves of the bush are not truncated
	assert law(Tree.star(2)) == 0.0
	assert kesten_ball_law(poisson_offspring(), 0)(Tree([-1])) == 1.0
	with pytest.raises(ValidationError):
		kesten_ball_law(poisson_offspring(2.0), 2)


def test_ball_shape():
	assert ball_shape("(()(()))") == ball_shape("((())())")
	assert ball_shape(Tree.star(2).to_text()) == ((), ())
	for bad in ("(()", "())", "()()"):
		with pytest.raises(ValidationError):
			ball_shape(bad)


def test_kesten_ball_sampler_matches_exact_law():
	rng = np.random.default_rng(19)
	observed = Counter(kesten_ball(poisson_offspring(), 2, rng).tree.to_text() for _ in range(4000))
	est = tv_to_law(observed, kesten_ball_law(poisson_offspring(), 2))
	assert est.bins > 3
	assert est.tv < est.floor + 5 * est.stderr


def test_kesten_volume_curve_mean():
	rng = np.random.default_rng(8)
	R = 10
	curves = [kesten_volume_curve(poisson_offspring(), R, rng) for _ in range(3000)]
	assert all(c.values[0] == 1 for c in curves)
	mean = np.mean([c.values[-1] for c in curves])
	# E V(R) = (R + 1)(R + 2)/2 when ξ has unit variance
	assert mean == pytest.approx((R + 1) * (R + 2) / 2, rel=0.06)
	leaves = kesten_volume_curve(binary_offspring(), R, rng, measure="leaves")
	assert leaves.values[0] == 0
	with pytest.raises(ValidationError):
		kesten_volume_curve(poisson_offspring(), R, rng, measure="edges")


def test_conditioned_gw():
	rng = np.random.default_rng(9)
	assert sample_conditioned_gw(poisson_offspring(), 25, rng).size == 25
	assert sample_conditioned_gw(binary_offspring(), 9, rng).n_leaves == 5
	# geometric(1/2) conditioned on n vertices is a uniform plane tree
	hits = shape_share(lambda r: sample_conditioned_gw(geometric_offspring(), 3, r), PATH_3, 3000, rng)
	assert abs(binomial_zscore(hits, 3000, 0.5)) < 4


def test_offspring_law():
	assert offspring_law({"xi": "geometric"}).name == geometric_offspring().name
	assert offspring_law({"xi": "stable", "beta": 1.5}).tail_exponent == pytest.approx(1.5)
	with pytest.raises(ValidationError):
		offspring_law({"xi": "zeta"})
