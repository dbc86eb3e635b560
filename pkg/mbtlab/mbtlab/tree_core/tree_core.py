# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Finite unordered rooted trees stored as an immutable index arena.

Nodes are renumbered in breadth-first order on construction, so node 0 is the root, depths are
non-decreasing along the arena, the children of a node are contiguous, and every ball around the
root is a prefix of the arena. Child order is storage order only: equality and hashing go through
the canonical code, so two trees compare equal iff they are isomorphic as unordered rooted trees.

Text format: the canonical code, a leaf is "()" and a node wraps its sorted child codes,
e.g. the cherry is "(()())". Record format: {"parent": [-1, 0, 0, ...]} in arena order.
"""

import json
import math
from collections import namedtuple
from functools import cached_property

import numpy as np

from mbtlab.exceptions import ValidationError, throw
from mbtlab.mbtlab.partition_core.partition_core import Partition

TreeStats = namedtuple("TreeStats", ["n_vertices", "n_leaves", "height"])

OPEN, CLOSE = b"(", b")"


class Tree:
	def __init__(self, parent, labels=None):
		"""
		Args:
			parent: sequence with parent[i] the parent index of node i and -1 for the root,
				nodes in any order
			labels: optional per-node labels, carried through the renumbering
		"""
		parent = np.asarray(parent, dtype=np.int64)
		if parent.ndim != 1 or not len(parent):
			throw("A tree needs at least one node")
		n = len(parent)
		roots = np.flatnonzero(parent < 0)
		if len(roots) != 1:
			throw(f"A tree has exactly one root, found {len(roots)}")
		if parent.max() >= n or parent.min() < -1:
			throw("Parent references must be node indices")

		order, levels = _bfs_order(parent, int(roots[0]))
		if len(order) != n:
			throw("Parent references contain a cycle")

		new_id = np.empty(n, dtype=np.int64)
		new_id[order] = np.arange(n)
		old_parent = parent[order]
		new_parent = np.where(old_parent < 0, -1, new_id[np.maximum(old_parent, 0)])
		depth = np.repeat(np.arange(len(levels)), levels)
		counts = np.bincount(new_parent[1:], minlength=n)

		self.parent = _frozen(new_parent)
		self.depth = _frozen(depth)
		self.child_ptr = _frozen(np.concatenate([[1], 1 + np.cumsum(counts)]))
		# input index of each arena node
		self.source_index = _frozen(order)
		if labels is None:
			self.labels = None
		else:
			labels = list(labels)
			if len(labels) != n:
				throw("One label per node is required")
			self.labels = tuple(labels[i] for i in order)

	@classmethod
	def single_vertex(cls):
		return cls([-1])

	@classmethod
	def branch(cls, n):
		"""b_n: a path with n edges hanging from the root."""
		return cls(np.arange(-1, n))

	@classmethod
	def star(cls, k):
		return cls([-1] + [0] * k)

	@property
	def size(self):
		return len(self.parent)

	def __len__(self):
		return self.size

	@cached_property
	def child_counts(self):
		return _frozen(np.diff(self.child_ptr))

	def children(self, u):
		return range(self.child_ptr[u], self.child_ptr[u + 1])

	@property
	def height(self):
		return int(self.depth[-1])

	@property
	def n_leaves(self):
		return int(np.count_nonzero(self.child_counts == 0))

	def is_leaf(self, u):
		return self.child_counts[u] == 0

	@cached_property
	def subtree_sizes(self):
		return _frozen(_accumulate_up(self, np.ones(self.size, dtype=np.int64)))

	@cached_property
	def subtree_leaves(self):
		return _frozen(_accumulate_up(self, (self.child_counts == 0).astype(np.int64)))

	@cached_property
	def canonical_code(self):
		codes = [b""] * self.size
		ptr = self.child_ptr
		for u in range(self.size - 1, -1, -1):
			a, b = ptr[u], ptr[u + 1]
			if a == b:
				codes[u] = OPEN + CLOSE
			else:
				codes[u] = OPEN + b"".join(sorted(codes[a:b])) + CLOSE
				codes[a:b] = [b""] * (b - a)
		return codes[0]

	def __eq__(self, other):
		if not isinstance(other, Tree):
			return NotImplemented
		return isomorphic(self, other)

	def __hash__(self):
		return hash(self.canonical_code)

	def __repr__(self):
		return f"Tree(size={self.size}, leaves={self.n_leaves}, height={self.height})"

	def to_text(self):
		return self.canonical_code.decode("ascii")

	@classmethod
	def from_text(cls, text):
		"""Parse the parenthesized format; whitespace is ignored."""
		parent = []
		stack = []
		for ch in "".join(text.split()):
			if ch == "(":
				parent.append(stack[-1] if stack else -1)
				if not stack and len(parent) > 1:
					throw("Tree text has more than one root")
				stack.append(len(parent) - 1)
			elif ch == ")":
				if not stack:
					throw("Unbalanced parenthesis in tree text")
				stack.pop()
			else:
				throw(f"Unexpected character {ch!r} in tree text")
		if stack or not parent:
			throw("Unbalanced parenthesis in tree text")
		return cls(parent)

	def to_record(self):
		record = {"parent": self.parent.tolist()}
		if self.labels is not None:
			record["labels"] = list(self.labels)
		return record

	@classmethod
	def from_record(cls, record):
		if isinstance(record, str):
			record = json.loads(record)
		if "parent" not in record:
			throw("Tree record needs a 'parent' array")
		return cls(record["parent"], labels=record.get("labels"))


def _frozen(a):
	a = np.ascontiguousarray(a)
	a.flags.writeable = False
	return a


def _bfs_order(parent, root):
	"""Breadth-first order of the nodes reachable from root, and the node count per level."""
	child_order = np.argsort(parent, kind="stable")[1:]
	counts = np.bincount(parent[parent >= 0], minlength=len(parent))
	ptr = np.concatenate([[0], np.cumsum(counts)])

	order, levels = [], []
	frontier = np.array([root], dtype=np.int64)
	while len(frontier):
		order.append(frontier)
		levels.append(len(frontier))
		frontier = child_order[_gather_ranges(ptr[frontier], counts[frontier])]
	return np.concatenate(order), levels


def _gather_ranges(starts, lengths):
	"""Indices of the concatenated ranges [starts[i], starts[i] + lengths[i])."""
	total = int(lengths.sum())
	if not total:
		return np.empty(0, dtype=np.int64)
	offsets = np.repeat(starts - np.cumsum(lengths) + lengths, lengths)
	return offsets + np.arange(total)


def _accumulate_up(t, values):
	"""Subtree sums of per-node values, processed one depth level at a time."""
	values = values.copy()
	bounds = np.searchsorted(t.depth, np.arange(t.height + 2))
	for d in range(t.height, 0, -1):
		nodes = np.arange(bounds[d], bounds[d + 1])
		np.add.at(values, t.parent[nodes], values[nodes])
	return values


def isomorphic(t, s):
	"""Unordered rooted isomorphism by shared AHU class numbering, level by level."""
	if t.size != s.size or t.height != s.height:
		return False
	if t.size > 2048:
		classes = {}
		return _ahu_root_class(t, classes) == _ahu_root_class(s, classes)
	return t.canonical_code == s.canonical_code


def _ahu_root_class(t, classes):
	ids = np.zeros(t.size, dtype=np.int64)
	ptr = t.child_ptr
	for u in range(t.size - 1, -1, -1):
		key = tuple(sorted(ids[ptr[u] : ptr[u + 1]].tolist()))
		ids[u] = classes.setdefault(key, len(classes))
	return ids[0]


def canonical_encode(t):
	return t.canonical_code


def concatenate(parts):
	"""⟦t_1, …, t_p⟧: attach the roots of the parts to a new common root."""
	parent = [np.array([-1], dtype=np.int64)]
	offset = 1
	for part in parts:
		p = part.parent.copy()
		p[1:] += offset
		p[0] = 0
		parent.append(p)
		offset += part.size
	return Tree(np.concatenate(parent))


def graft(t, u, s):
	"""Identify the root of s with node u of t."""
	if not 0 <= u < t.size:
		throw(f"Node {u} is not in a tree of size {t.size}")
	p = s.parent[1:] + t.size - 1
	p[s.parent[1:] == 0] = u
	return Tree(np.concatenate([t.parent, p]))


def ball(t, R):
	"""t|_R: the nodes at depth at most R."""
	if R < 0:
		throw(f"Ball radius must be >= 0, got {R}")
	count = int(np.searchsorted(t.depth, R, side="right"))
	if count == t.size:
		return t
	labels = t.labels[:count] if t.labels is not None else None
	return Tree(t.parent[:count], labels=labels)


def d_loc(t, s):
	"""exp(-inf{R : t|_R != s|_R}); 0 when t and s are isomorphic."""
	for R in range(max(t.height, s.height) + 1):
		if not isomorphic(ball(t, R), ball(s, R)):
			return math.exp(-R)
	return 0.0


def first_split_vertices(t):
	"""Λ(t): the sorted vertex counts of the root subtrees."""
	return Partition.of(t.subtree_sizes[1 : t.child_ptr[1]].tolist())


def first_split_leaves(t):
	"""Λ^L(t): the sorted leaf counts of the root subtrees."""
	return Partition.of(t.subtree_leaves[1 : t.child_ptr[1]].tolist())


def stats(t):
	return TreeStats(t.size, t.n_leaves, t.height)


def nodes_at_depth(t):
	"""Histogram h with h[d] the number of nodes at depth d."""
	return np.bincount(t.depth)


def read_trees(text):
	"""Parse one tree per non-empty line, text or JSON record."""
	trees = []
	for line in text.splitlines():
		line = line.strip()
		if not line:
			continue
		trees.append(Tree.from_record(line) if line.startswith("{") else Tree.from_text(line))
	return trees


def write_tree(t, fmt="text"):
	if fmt == "text":
		return t.to_text()
	if fmt == "json":
		return json.dumps(t.to_record(), separators=(",", ":"))
	raise ValidationError(f"Unknown tree format {fmt!r}")
