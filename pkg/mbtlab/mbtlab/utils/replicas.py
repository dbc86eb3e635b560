# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Seeded replicas. Replica i always draws from child i of SeedSequence(seed), so results do not depend
on the worker count.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np


def replica_seeds(seed, n):
	return np.random.SeedSequence(seed).spawn(n)


def _run_one(fn, args, seed_seq):
	return fn(np.random.default_rng(seed_seq), *args)


def run_replicas(fn, n, seed, workers=1, *args):
	"""
	Evaluate fn(rng_i, *args) for i < n.

	Args:
		fn: module-level callable (it is pickled for worker processes)
		n: number of replicas
		seed: root seed
		workers: process count; <= 1 runs serially

	Returns:
		list of results in replica order
	"""
	call = partial(_run_one, fn, args)
	seeds = replica_seeds(seed, n)
	if workers <= 1 or n < 2:
		return [call(s) for s in seeds]
	chunksize = max(1, n // (4 * workers))
	with ProcessPoolExecutor(max_workers=workers) as pool:
		return list(pool.map(call, seeds, chunksize=chunksize))
