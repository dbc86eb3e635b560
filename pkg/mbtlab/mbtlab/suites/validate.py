# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Validation suites run by `mbtlab validate --suite <name>`.

Each suite takes LabSettings and returns a list of CheckResult. `scale=quick` shrinks replica counts
and grids so a suite finishes in seconds; `scale=full` runs the acceptance sizes.
"""

import math
from functools import lru_cache

import numpy as np

from mbtlab.mbtlab.analysis.analysis import (
	bootstrap_mean,
	chi_square_pvalue,
	growth_exponent,
	otter_dwass_check,
	qn_convergence_table,
	quantile_stability,
	tv_distance,
	tv_to_law,
	unary_immigration_check,
)
from mbtlab.mbtlab.dist_lib.dist_lib import (
	borel_pmf,
	geometric_offspring,
	gw_size_pmf,
	poisson_offspring,
	stable_offspring,
)
from mbtlab.mbtlab.ghp_metric.ghp_metric import (
	concatenate_spaces,
	d_ghp_exact,
	d_ghp_extended,
	d_ghp_upper,
	lower_bound,
	random_space,
	rescale,
	truncate,
)
from mbtlab.mbtlab.growth_models.growth_models import (
	cut_tree,
	grow_alpha_gamma,
	grow_kary,
	kesten_ball,
	kesten_ball_law,
	kesten_volume_curve,
	sample_cayley,
	sample_conditioned_gw,
	sample_recursive_tree,
)
from mbtlab.mbtlab.mb_engine.mb_engine import sample_infinite_ball, sample_mb, volume_curve
from mbtlab.mbtlab.partition_core.partition_core import EMPTY, Partition
from mbtlab.mbtlab.split_laws.split_laws import get_split_law
from mbtlab.mbtlab.tree_core.tree_core import Tree, first_split_leaves, first_split_vertices
from mbtlab.mbtlab.utils.jobs import job
from mbtlab.mbtlab.utils.replicas import run_replicas
from mbtlab.mbtlab.utils.report import CheckResult, check

NORMALIZATION_TOL = 1e-9

LOCAL_TARGETS = {
	"gw-poisson": ({}, [EMPTY, Partition((1,)), Partition((1, 1))]),
	"cayley-cut": ({}, [Partition((1,)), Partition((2,)), Partition((3,))]),
	"recursive-cut": ({}, [Partition((1,)), Partition((2,)), Partition((3,))]),
	"alpha-gamma": ({"alpha": 0.7, "gamma": 0.4}, [Partition((1,)), Partition((2,)), Partition((1, 1))]),
	"ford": ({"alpha": 0.5}, [Partition((1,)), Partition((2,)), Partition((3,))]),
	"beta-splitting": ({"beta": -1.5}, [Partition((1,)), Partition((2,)), Partition((3,))]),
	"kary": ({"k": 3}, [(0, 0), (1, 0), (1, 1)]),
}

IMMIGRATION_LAWS = (("cayley-cut", {}), ("ford", {"alpha": 0.5}), ("kary", {"k": 3}))
IMMIGRATION_GRID = [200, 800, 3200]

BALL_SIZES = (50, 500, 2000)
STABILITY_QUANTILES = (0.25, 0.5, 0.75, 0.9)


def _full(settings):
	return settings.scale == "full"


@lru_cache(maxsize=32)
def cached_law(name, params, split_table_cap, gw_table_cap):
	from mbtlab.mbtlab.lab_settings.lab_settings import LabSettings

	settings = LabSettings({"split_table_cap": split_table_cap, "gw_table_cap": gw_table_cap})
	return get_split_law(name, dict(params), settings)


def _law(name, params, settings):
	return cached_law(name, tuple(sorted(params.items())), settings.split_table_cap, settings.gw_table_cap)


def count_codes(items):
	counts = {}
	for item in items:
		counts[item] = counts.get(item, 0) + 1
	return counts


def pmf_suite(settings):
	checks = []
	table = gw_size_pmf(poisson_offspring(), 60)
	rel = max(abs(table.pmf(k) - borel_pmf(k)) / borel_pmf(k) for k in range(1, 31))
	checks.append(check("Borel progeny of Poisson(1), n <= 30", rel, 1e-10, "max relative error"))
	for xi in (poisson_offspring(), geometric_offspring()):
		checks.append(check(f"Otter-Dwass {xi.name}, k <= 4, n <= 60", otter_dwass_check(xi, 4, 60), 1e-9))

	binary_sizes = [2, 3, 10, 100, 1000] + ([10_000] if _full(settings) else [])
	for name, params in (
		("cayley-cut", {}),
		("recursive-cut", {}),
		("ford", {"alpha": 0.3}),
		("beta-splitting", {"beta": -1.5}),
	):
		law = _law(name, params, settings)
		worst = max(abs(law.binary_pmf(n).sum() - 1) for n in binary_sizes)
		checks.append(check(f"{law.describe()} sums to 1, n up to {binary_sizes[-1]}", worst, NORMALIZATION_TOL))

	general_max = 12 if _full(settings) else 8
	for name, params in (
		("gw-poisson", {}),
		("gw-geometric", {}),
		("gw-poisson-leaves", {}),
		("gw-stable-leaves", {"beta": 1.5}),
		("alpha-gamma", {"alpha": 0.7, "gamma": 0.4}),
		("kary", {"k": 3}),
	):
		law = _law(name, params, settings)
		worst = max(abs(sum(p for _, p in law.pmf_table(n)) - 1) for n in range(2, general_max + 1))
		checks.append(check(f"{law.describe()} sums to 1, n <= {general_max}", worst, NORMALIZATION_TOL))

	ford = _law("ford", {"alpha": 0.5}, settings)
	beta = _law("beta-splitting", {"beta": -1.5}, settings)
	worst = max(float(np.max(np.abs(ford.binary_pmf(n) - beta.binary_pmf(n)))) for n in range(2, 21))
	checks.append(check("β-splitting(-3/2) equals Ford(1/2), n <= 20", worst, 1e-12))

	for b in (1.5, 2.0):
		ag = _law("alpha-gamma", {"alpha": 1 / b, "gamma": 1 - 1 / b}, settings)
		gw = _law("gw-stable-leaves", {"beta": b}, settings)
		worst = max(abs(ag.pmf(n, lam) - gw.pmf(n, lam)) for n in range(2, 9) for lam in ag.support(n))
		checks.append(check(f"α-γ(1/{b:g}, 1-1/{b:g}) equals stable({b:g}) leaf splits, n <= 8", worst, 1e-9))
	return checks


def local_suite(settings):
	checks = []
	n_grid = [100, 1000, 10_000] if _full(settings) else [100, 1000]
	for name, (params, targets) in LOCAL_TARGETS.items():
		law = _law(name, params, settings)
		table = qn_convergence_table(law, targets, n_grid)
		last = [r for r in table.rows if r.n == n_grid[-1]]
		worst = max(r.delta / r.q_star for r in last)
		monotone = all(table.monotone.values())
		checks.append(
			CheckResult(
				f"{law.describe()}: q_n -> q_* at n = {n_grid[-1]}",
				monotone and worst <= 0.01,
				worst,
				0.01,
				"relative gap, decreasing" if monotone else "relative gap, not decreasing",
			)
		)
	for name, params in IMMIGRATION_LAWS:
		law = _law(name, params, settings)
		row = unary_immigration_check(law, IMMIGRATION_GRID)[-1]
		gap = max(abs(row.point - row.constant), abs(row.tail - row.constant)) / row.constant
		detail = f"c={row.constant:.6f}, point={row.point:.6f}, tail={row.tail:.6f}"
		label = f"{law.describe()}: unary immigration constant at n = {row.n}"
		checks.append(check(label, gap, 0.02, detail))
	return checks


def finite_ball_code(rng, name, params, n, R, split_table_cap, gw_table_cap):
	law = cached_law(name, params, split_table_cap, gw_table_cap)
	return sample_mb(law, n, rng, depth=R).to_text()


def infinite_ball_code(rng, name, params, R, split_table_cap, gw_table_cap):
	law = cached_law(name, params, split_table_cap, gw_table_cap)
	return sample_infinite_ball(law, R, rng).tree.to_text()


def kesten_ball_code(rng, R):
	return kesten_ball(poisson_offspring(), R, rng).tree.to_text()


def balls_suite(settings):
	"""
	Empirical radius-2 ball laws against the exact law of Kesten's tree.

	Rare shapes are pooled (analysis.tv_to_law); the distance along n must not increase by more
	than two standard errors of the difference.
	"""
	checks = []
	full = _full(settings)
	reps = 10_000 if full else 2000
	threshold = 0.05 if full else 0.08
	R = 2
	caps = (settings.split_table_cap, settings.gw_table_cap)
	workers = settings.effective_workers()
	exact = kesten_ball_law(poisson_offspring(), R)

	def against_exact(label, codes):
		est = tv_to_law(count_codes(codes), exact)
		checks.append(check(label, est.tv, threshold, _tv_detail(est)))
		return est

	kesten = run_replicas(kesten_ball_code, reps, settings.seed, workers, R)
	against_exact("Kesten ball sampler vs exact law, R = 2", kesten)
	spine =run_replicas(infinite_ball_code, reps, settings.seed + 1, workers, "gw-poisson", (), R, *caps)
	against_exact("Limit-split ball vs exact Kesten law, R = 2", spine)

	estimates = []
	for n in BALL_SIZES:
		codes = run_replicas(finite_ball_code, reps, settings.seed + n, workers, "gw-poisson", (), n, R, *caps)
		estimates.append(tv_to_law(count_codes(codes), exact))
	last = estimates[-1]
	label = f"GW-Poisson ball(T_{BALL_SIZES[-1]}, 2) vs exact Kesten law"
	checks.append(check(label, last.tv, threshold, _tv_detail(last)))

	# independent seeds per n: the difference has variance a.stderr^2 + b.stderr^2
	worst = max(b.tv - a.tv - 2 * math.hypot(a.stderr, b.stderr) for a, b in zip(estimates, estimates[1:]))
	series = ", ".join(f"{e.tv:.4f}±{e.stderr:.4f}" for e in estimates)
	sizes = ", ".join(map(str, BALL_SIZES))
	checks.append(check(f"Ball TV non-increasing along n = {sizes}", worst, 0.0, f"excess over 2 s.e.; {series}"))
	return checks


def _tv_detail(est):
	return f"noise floor {est.floor:.4f}, s.e. {est.stderr:.4f}, {est.bins} bins"


def _kesten_curve(rng, xi_name, R, measure):
	xi = poisson_offspring() if xi_name == "poisson" else stable_offspring(1.5)
	return kesten_volume_curve(xi, R, rng, measure)


def volume_suite(settings):
	checks = []
	full = _full(settings)
	workers = settings.effective_workers()
	rng = np.random.default_rng(settings.seed)

	r_max = 200 if full else 60
	window = (20, 200) if full else (10, 60)
	reps = 10_000 if full else 500
	curves = run_replicas(_kesten_curve, reps, settings.seed, workers, "poisson", r_max, "vertices")
	mean, se = bootstrap_mean([c.at(50) for c in curves], settings.bootstrap_resamples, rng)
	oracle = 51 + 50 * 51 / 2
	checks.append(check("Kesten/Poisson E V(50) vs (R+1) + R(R+1)/2", abs(mean - oracle) / se, 3.0, "in s.e."))
	fit = growth_exponent(curves, window, resamples=settings.bootstrap_resamples, rng=rng)
	tol = 0.1 if full else 0.2
	checks.append(check("Kesten/Poisson volume exponent", abs(fit.slope - 2.0), tol, f"slope={fit.slope:.4f}"))

	radii = (r_max // 2, r_max)
	stability = quantile_stability(curves, 0.5, radii, STABILITY_QUANTILES)
	checks.append(
		check(
			f"Kesten/Poisson quantiles of V(R)/R^2, R = {radii[0]} vs {radii[1]}",
			stability["max_relative_gap"],
			0.1 if full else 0.25,
			"max relative gap",
		)
	)

	comb = _law("ford", {"alpha": 1.0}, settings)
	comb_curves = [volume_curve(sample_infinite_ball(comb, r_max, rng)) for _ in range(30)]
	fit = growth_exponent(comb_curves, window, resamples=0)
	checks.append(check("Comb leaf volume exponent", abs(fit.slope - 1.0), 1e-9, f"slope={fit.slope:.6f}"))

	stable_reps = 1000 if full else 200
	stable = run_replicas(_kesten_curve, stable_reps, settings.seed + 2, workers, "stable", r_max, "vertices")
	fit = growth_exponent(stable, window, statistic="median", resamples=settings.bootstrap_resamples, rng=rng)
	checks.append(check("Kesten/stable(1.5) volume exponent", abs(fit.slope - 3.0), 0.3, f"slope={fit.slope:.4f}"))
	return checks


def growth_suite(settings):
	checks = []
	full = _full(settings)
	rng = np.random.default_rng(settings.seed)
	draws = 100_000 if full else 20_000
	alpha = settings.chi_square_pvalue

	shapes = count_codes(grow_alpha_gamma(0.5, 0.5, 4, rng).to_text() for _ in range(draws))
	caterpillar = Tree([-1, 0, 0, 2, 2, 4, 4]).to_text()
	balanced = Tree([-1, 0, 0, 1, 1, 2, 2]).to_text()
	expected = {caterpillar: 0.8 * draws, balanced: 0.2 * draws}
	checks.append(check("α-γ(1/2,1/2) 4-leaf shapes vs Rémy", tv_distance(shapes, expected), 0.01))

	def split_check(label, law, n, trees, split_of):
		observed = count_codes(tuple(split_of(t)) for t in trees)
		probs = {tuple(lam): p for lam, p in law.pmf_table(n)}
		p = chi_square_pvalue(observed, probs)
		return check(label, p, alpha, "chi-square p-value", below=False)

	ag = _law("alpha-gamma", {"alpha": 0.7, "gamma": 0.4}, settings)
	trees = [grow_alpha_gamma(0.7, 0.4, 6, rng) for _ in range(draws)]
	checks.append(split_check("α-γ(0.7,0.4) growth vs split law, n = 6", ag, 6, trees, first_split_leaves))

	kary = _law("kary", {"k": 3}, settings)
	trees = [grow_kary(3, 5, rng) for _ in range(draws)]
	checks.append(
		split_check("3-ary growth vs split law, n = 5", kary, 5, trees, lambda t: kary._as_tuple(_internal_split(t), 3))
	)

	n = 8
	for label, sampler, name in (
		("Cayley cut-tree", sample_cayley, "cayley-cut"),
		("recursive cut-tree", sample_recursive_tree, "recursive-cut"),
	):
		law = _law(name, {}, settings)
		trees = [cut_tree(sampler(n, rng), rng) for _ in range(draws // 4)]
		checks.append(split_check(f"{label} vs split law, n = {n}", law, n, trees, first_split_leaves))

	gw = _law("gw-poisson", {}, settings)
	trees = [sample_conditioned_gw(poisson_offspring(), 7, rng) for _ in range(draws // 4)]
	checks.append(split_check("cycle-lemma GW vs split law, n = 7", gw, 7, trees, first_split_vertices))
	return checks


def _internal_split(t):
	internal = t.subtree_sizes - t.subtree_leaves
	return internal[1 : t.child_ptr[1]].tolist()


def ghp_suite(settings):
	checks = []
	rng = np.random.default_rng(settings.seed)
	corpus_size = 200 if _full(settings) else 50
	cap = settings.ghp_exact_cap
	tol = 1e-9

	def d(a, b):
		return d_ghp_exact(a, b, cap)

	spaces = [random_space(rng, 4) for _ in range(corpus_size)]
	sym = tri = low = up = resc = conc = trunc = 0.0
	for i in range(corpus_size):
		X, Y, Z = spaces[i], spaces[(i + 1) % corpus_size], spaces[(i + 2) % corpus_size]
		dxy, dyx = d(X, Y), d(Y, X)
		sym = max(sym, abs(dxy - dyx))
		tri = max(tri, dxy - d(X, Z) - d(Z, Y))
		low = max(low, lower_bound(X, Y) - dxy)
		up = max(up, dxy - d_ghp_upper(X, Y, cap))

		a, b = rng.random(2) * 2
		scaled = d(rescale(X, a, b), rescale(Y, a, b))
		resc = max(resc, scaled - max(a, b) * dxy)
		c, e = rng.random(2) * 2
		bound = max(abs(a - c) * X.height, abs(b - e) * X.total_mass)
		resc = max(resc, d(rescale(X, a, b), rescale(X, c, e)) - bound)

		pieces_x = [random_space(rng, 2), random_space(rng, 2)]
		pieces_y = [random_space(rng, 2), random_space(rng, 2)]
		glued = d(concatenate_spaces(pieces_x), concatenate_spaces(pieces_y))
		conc = max(conc, glued - sum(d(p, q) for p, q in zip(pieces_x, pieces_y)))

		R = float(rng.random())
		whole = d_ghp_extended(X, Y, r_max=30.0, cap=cap).value
		cut = d_ghp_extended(truncate(X, R), truncate(Y, R), r_max=30.0, cap=cap).value
		trunc = max(trunc, abs(whole - cut) - math.exp(-R))

	checks.append(check("Symmetry", sym, tol))
	checks.append(check("Triangle inequality", tri, tol))
	checks.append(check("Height/mass lower bound", low, tol))
	checks.append(check("Upper bound dominates exact value", up, tol))
	checks.append(check("Rescaling bounds", resc, tol))
	checks.append(check("Concatenation subadditivity", conc, tol))
	checks.append(check("Truncation stability of D_GHP", trunc, 2 * math.exp(-30.0) + tol))
	return checks


def run_suite(name, settings):
	"""Resolve a registered suite and run it as a logged job."""
	from mbtlab.exceptions import UnknownModelError, throw
	from mbtlab.hooks import get_attr, validation_suites

	if name not in validation_suites:
		throw(f"Unknown suite {name!r}; known: {', '.join(validation_suites)}", UnknownModelError)
	with job(f"Validate {name}", title=f"Error in validation suite {name}", module="suites") as log:
		checks = get_attr(validation_suites[name])(settings)
		log.info(f"[Validate {name}] {sum(c.passed for c in checks)}/{len(checks)} checks passed")
	return checks
