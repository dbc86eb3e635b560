# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

import math

import numpy as np
import pytest

from mbtlab.exceptions import ValidationError
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition, d_P
from mbtlab.mbtlab.tree_core.tree_core import (
	Tree,
	ball,
	concatenate,
	d_loc,
	first_split_leaves,
	first_split_vertices,
	graft,
	isomorphic,
	nodes_at_depth,
	read_trees,
	stats,
	write_tree,
)

LEAF = Tree.single_vertex()
CHERRY = concatenate([LEAF, LEAF])


def random_tree(rng, n):
	parent = [-1] + [int(rng.integers(i)) for i in range(1, n)]
	return Tree(parent)


def test_concatenate():
	assert concatenate([]) == LEAF
	assert stats(CHERRY) == (3, 2, 1)
	t = concatenate([CHERRY, LEAF])
	assert t.size == 5
	assert first_split_vertices(t) == Partition((3, 1))


def test_graft():
	t = concatenate([CHERRY, Tree.branch(2)])
	for u in range(t.size):
		assert graft(t, u, LEAF) == t
	assert graft(LEAF, 0, CHERRY) == CHERRY
	b2 = Tree.branch(2)
	grafted = graft(b2, b2.size - 1, CHERRY)
	assert grafted.size == 5
	assert grafted.height == 3
	with pytest.raises(ValidationError):
		graft(b2, 3, CHERRY)


def test_ball():
	t = concatenate([CHERRY, Tree.branch(3)])
	assert ball(t, 0) == LEAF
	assert ball(CHERRY, 1) == CHERRY
	assert ball(Tree.branch(5), 2) == Tree.branch(2)
	assert ball(t, t.height) == t


def test_ball_idempotence():
	rng = np.random.default_rng(1)
	for _ in range(50):
		t = random_tree(rng, 30)
		for R in range(5):
			for r in range(5):
				assert ball(ball(t, R), r) == ball(t, min(r, R))


def test_d_loc_examples():
	t = concatenate([CHERRY, LEAF])
	assert d_loc(t, t) == 0.0
	assert d_loc(LEAF, Tree.branch(1)) == pytest.approx(math.exp(-1))
	assert d_loc(CHERRY, Tree.branch(1)) == pytest.approx(math.exp(-1))
	assert d_loc(Tree.branch(4), Tree.branch(5)) == pytest.approx(math.exp(-5))


def test_d_loc_is_ultrametric():
	rng = np.random.default_rng(2)
	trees = [random_tree(rng, int(n)) for n in rng.integers(1, 9, size=60)]
	for _ in range(1500):
		a, b, c = (trees[i] for i in rng.integers(len(trees), size=3))
		assert d_loc(a, c) <= max(d_loc(a, b), d_loc(b, c)) + 1e-15


def test_first_split_is_lipschitz_on_equal_root_degree():
	rng = np.random.default_rng(4)
	trees = [random_tree(rng, int(n)) for n in rng.integers(2, 12, size=120)]
	checked = 0
	for t in trees:
		for s in trees:
			if t.child_counts[0] == s.child_counts[0]:
				assert d_P(first_split_vertices(t), first_split_vertices(s)) <= d_loc(t, s) + 1e-15
				checked += 1
	assert checked > 100


def test_first_split_with_unequal_root_degree():
	t = concatenate([CHERRY])
	s = concatenate([LEAF, LEAF])
	assert d_P(first_split_vertices(t), first_split_vertices(s)) == 1.0
	assert d_loc(t, s) == pytest.approx(math.exp(-1))


def test_first_split_examples():
	assert first_split_vertices(LEAF) == EMPTY
	assert first_split_vertices(CHERRY) == Partition((1, 1))
	assert first_split_leaves(CHERRY) == Partition((1, 1))
	t = concatenate([CHERRY, LEAF])
	assert first_split_vertices(t) == Partition((3, 1))
	assert first_split_leaves(t) == Partition((2, 1))


def test_first_split_round_trip_and_sums():
	rng = np.random.default_rng(5)
	for _ in range(40):
		parts = [random_tree(rng, int(n)) for n in rng.integers(1, 7, size=int(rng.integers(0, 5)))]
		t = concatenate(parts)
		assert first_split_vertices(t) == Partition.of([p.size for p in parts])
		assert first_split_vertices(t).norm == t.size - 1
		assert first_split_leaves(t).norm == (t.n_leaves if parts else 0)


def test_stats_and_depth_histogram():
	assert stats(LEAF) == (1, 1, 0)
	assert stats(Tree.branch(6)) == (7, 1, 6)
	t = concatenate([CHERRY, LEAF])
	assert nodes_at_depth(t).tolist() == [1, 2, 2]


def test_isomorphism_ignores_child_order():
	a = Tree([-1, 0, 0, 1])
	b = Tree([-1, 0, 0, 2])
	assert a == b
	assert hash(a) == hash(b)
	assert a != Tree.branch(3)


def test_large_trees_use_class_numbering():
	rng = np.random.default_rng(6)
	t = random_tree(rng, 3000)
	perm = rng.permutation(t.size)
	perm = np.concatenate([[0], perm[perm != 0]])
	inverse = np.empty_like(perm)
	inverse[perm] = np.arange(t.size)
	shuffled = Tree(np.where(t.parent[perm] < 0, -1, inverse[np.maximum(t.parent[perm], 0)]))
	assert isomorphic(t, shuffled)
	assert not isomorphic(t, graft(ball(t, t.height - 1), 0, LEAF))


def test_text_and_record_round_trip():
	rng = np.random.default_rng(7)
	for _ in range(20):
		t = random_tree(rng, 25)
		assert Tree.from_text(t.to_text()) == t
		back = Tree.from_record(t.to_record())
		assert back.parent.tolist() == t.parent.tolist()
	assert CHERRY.to_text() == "(()())"
	assert read_trees("(()())\n\n" + write_tree(LEAF, "json")) == [CHERRY, LEAF]


def test_invalid_inputs():
	with pytest.raises(ValidationError):
		Tree([0, 1])
	with pytest.raises(ValidationError):
		Tree([-1, 2, 1])
	with pytest.raises(ValidationError):
		Tree.from_text("(()")
	with pytest.raises(ValidationError):
		Tree.from_text("()()")
	with pytest.raises(ValidationError):
		write_tree(LEAF, "xml")
