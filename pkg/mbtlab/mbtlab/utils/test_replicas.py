# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

from mbtlab.mbtlab.utils.replicas import replica_seeds, run_replicas


def uniform_draw(rng, scale=1.0):
	return float(rng.random()) * scale


def test_replicas_do_not_depend_on_worker_count():
	serial = run_replicas(uniform_draw, 8, 42)
	parallel = run_replicas(uniform_draw, 8, 42, 2)
	assert serial == parallel
	assert len(set(serial)) == 8


def test_replica_arguments_and_seeds():
	assert run_replicas(uniform_draw, 3, 5, 1, 10.0) == [10.0 * x for x in run_replicas(uniform_draw, 3, 5)]
	assert run_replicas(uniform_draw, 3, 5) != run_replicas(uniform_draw, 3, 6)
	assert run_replicas(uniform_draw, 0, 5) == []
	assert len(replica_seeds(1, 4)) == 4
