# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import math

import numpy as np
import pytest

from mbtlab.exceptions import BudgetExceededError, ValidationError
from mbtlab.mbtlab.ghp_metric.ghp_metric import (
	PointedMetricSpace,
	concatenate_spaces,
	coupling_cost,
	d_ghp_exact,
	d_ghp_extended,
	d_ghp_upper,
	discrepancy,
	distortion,
	from_tree,
	ghp_interval,
	is_correspondence,
	lower_bound,
	random_space,
	rescale,
	truncate,
)
from mbtlab.mbtlab.tree_core.tree_core import Tree


def point(mass=0.0):
	return PointedMetricSpace(np.zeros((1, 1)), 0, [mass])


def segment(h, masses=(0.0, 0.0)):
	return PointedMetricSpace(np.array([[0.0, h], [h, 0.0]]), 0, list(masses))


def test_space_validation():
	with pytest.raises(ValidationError):
		PointedMetricSpace(np.array([[0.0, 1.0], [2.0, 0.0]]))
	with pytest.raises(ValidationError):
		PointedMetricSpace(np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]))
	with pytest.raises(ValidationError):
		PointedMetricSpace(np.zeros((2, 2)), root=2)
	with pytest.raises(ValidationError):
		PointedMetricSpace(np.zeros((2, 2)), mass=[1.0, -1.0])
	X = segment(3.0, (1.0, 2.0))
	assert X.size == 2
	assert X.height == 3.0
	assert X.total_mass == 3.0


def test_from_tree():
	X = from_tree(Tree.branch(2), a=0.5, b=2.0)
	assert X.heights.tolist() == [0.0, 0.5, 1.0]
	assert X.mass.tolist() == [2.0, 2.0, 2.0]
	leaves = from_tree(Tree.star(3), measure="leaves")
	assert leaves.total_mass == 3.0
	assert leaves.dist[1, 2] == 2.0
	assert from_tree(Tree.single_vertex()).size == 1
	with pytest.raises(ValidationError):
		from_tree(Tree.branch(1), measure="edges")


def test_rescale_truncate_concatenate():
	X = from_tree(Tree.branch(3))
	assert rescale(X, 2.0, 0.5).height == 6.0
	assert rescale(X, 2.0, 0.5).total_mass == 2.0
	assert truncate(X, 1).size == 2
	assert truncate(X, 1.5).total_mass == 2.0
	glued = concatenate_spaces([from_tree(Tree.branch(1)), from_tree(Tree.branch(1))])
	assert glued.size == 3
	assert glued.total_mass == 4.0
	assert glued.dist[1, 2] == 2.0
	assert concatenate_spaces([X]) is X
	with pytest.raises(ValidationError):
		concatenate_spaces([])


def test_correspondence_helpers():
	X, Y = segment(1.0), segment(3.0)
	C = [(0, 0), (1, 1)]
	assert is_correspondence(C, X, Y)
	assert not is_correspondence([(1, 1), (0, 1), (1, 0)], X, Y)
	assert distortion(C, X, Y) == 2.0
	pi = np.array([[0.5, 0.0], [0.0, 0.0]])
	assert discrepancy(pi, np.array([1.0, 0.0]), np.array([0.5, 0.5])) == pytest.approx(1.0)


def test_coupling_cost():
	X = segment(1.0, (1.0, 1.0))
	Y = segment(1.0, (1.0, 1.0))
	value, pi = coupling_cost([(0, 0), (1, 1)], X, Y)
	assert value == pytest.approx(0.0, abs=1e-9)
	assert pi.sum() == pytest.approx(2.0)
	# only the root pair is allowed: coupling (1, 1) with mass 2/3 balances escape and discrepancy
	value, _ = coupling_cost([(0, 0)], X, Y)
	assert value == pytest.approx(2 / 3, abs=1e-7)


def test_exact_small_cases():
	assert d_ghp_exact(point(1.0), point(3.0)) == pytest.approx(2.0)
	assert d_ghp_exact(point(), segment(4.0)) == pytest.approx(2.0)
	assert d_ghp_exact(segment(1.0), segment(3.0)) == pytest.approx(1.0)
	X = from_tree(Tree.star(2))
	assert d_ghp_exact(X, X) == pytest.approx(0.0, abs=1e-9)


def test_metric_axioms_on_random_spaces():
	rng = np.random.default_rng(1)
	for _ in range(15):
		X, Y, Z = (random_space(rng, max_points=3) for _ in range(3))
		xy = d_ghp_exact(X, Y)
		assert xy == pytest.approx(d_ghp_exact(Y, X), abs=1e-7)
		assert d_ghp_exact(X, X) == pytest.approx(0.0, abs=1e-7)
		assert xy >= lower_bound(X, Y) - 1e-9
		assert d_ghp_exact(X, Z) <= xy + d_ghp_exact(Y, Z) + 1e-7


def test_bounds_for_large_spaces():
	rng = np.random.default_rng(2)
	X = from_tree(Tree([-1] + [int(rng.integers(i)) for i in range(1, 12)]), a=0.3, b=0.1)
	Y = from_tree(Tree.branch(9), a=0.3, b=0.1)
	with pytest.raises(BudgetExceededError):
		d_ghp_exact(X, Y)
	iv = ghp_interval(X, Y)
	assert not iv.exact
	assert iv.lower <= iv.upper
	assert iv.lower == lower_bound(X, Y)


def test_upper_bound_dominates_exact():
	rng = np.random.default_rng(3)
	for _ in range(10):
		X, Y = random_space(rng), random_space(rng)
		exact = d_ghp_exact(X, Y)
		assert d_ghp_upper(X, Y, cap=1) >= exact - 1e-7
		assert d_ghp_upper(X, Y) == pytest.approx(exact)
		assert ghp_interval(X, Y).exact


def test_extended_distance():
	expected = 0.5 * (math.exp(-1.0) - math.exp(-6.0))
	exact = d_ghp_extended(point(), segment(1.0))
	assert exact.value == pytest.approx(expected)
	assert exact.lower == pytest.approx(expected)
	assert exact.error == pytest.approx(math.exp(-6.0))
	trap = d_ghp_extended(point(), segment(1.0), method="trapezoid", quad_step=0.005)
	assert abs(trap.value - expected) <= trap.error
	X = from_tree(Tree.star(2))
	assert d_ghp_extended(X, X).value == pytest.approx(0.0, abs=1e-9)
	with pytest.raises(ValidationError):
		d_ghp_extended(X, X, method="simpson")
	with pytest.raises(ValidationError):
		d_ghp_extended(X, X, quad_step=0)
