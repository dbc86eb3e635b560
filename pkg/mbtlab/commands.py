# Copyright (c) 2025, MBTLab and contributors
# For license information, please see license.txt

"""
Command line entry point.

	mbtlab <command> [--config FILE] [--seed N] [--workers N] [--scale quick|full] ...

The settings flags are accepted before or after the command.

Commands: sample, grow, pmf, converge-local, volume, ghp, validate. Results go to stdout as CSV
(with # header lines) or one tree per line; logs go to stderr. Failures print a JSON error record on
stderr and exit with the error's code.
"""

import argparse
import csv
import json
import sys

import numpy as np

from mbtlab import __version__
from mbtlab.exceptions import MBTLabError, UnknownModelError, ValidationError, throw
from mbtlab.mbtlab.utils.logger import log_error

MODEL_FLAGS = ("alpha", "gamma", "beta", "k")
KESTEN_PREFIX = "kesten-"


def _add_model_flags(parser, registry_help):
	parser.add_argument("--model", required=True, help=registry_help)
	parser.add_argument("--alpha", type=float)
	parser.add_argument("--gamma", type=float)
	parser.add_argument("--beta", type=float)
	parser.add_argument("--k", type=int)
	parser.add_argument("--xi", choices=("poisson", "geometric", "binary", "stable"))


def _model_params(args):
	return {name: getattr(args, name) for name in (*MODEL_FLAGS, "xi") if getattr(args, name, None) is not None}


def _add_tree_output(parser):
	parser.add_argument("--count", type=int, default=1)
	parser.add_argument("--format", choices=("text", "json"), default="text")


class LabArgumentParser(argparse.ArgumentParser):
	"""Usage errors raise ValidationError so they leave through the error record."""

	def error(self, message):
		throw(f"{self.prog}: {message}")


def _add_common_flags(parser, default=None):
	parser.add_argument("--config", default=default, help="key=value settings file")
	parser.add_argument("--seed", type=int, default=default)
	parser.add_argument("--workers", type=int, default=default)
	parser.add_argument("--scale", choices=("quick", "full"), default=default)
	parser.add_argument(
		"--log-level", dest="log_level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), default=default
	)


def build_parser():
	parser = LabArgumentParser(prog="mbtlab", description="Markov branching trees lab")
	parser.add_argument("--version", action="version", version=f"mbtlab {__version__}")
	_add_common_flags(parser)
	# accepted after the command as well; a value given there wins
	common = LabArgumentParser(add_help=False)
	_add_common_flags(common, default=argparse.SUPPRESS)
	sub = parser.add_subparsers(dest="command", required=True, parser_class=LabArgumentParser)

	p = sub.add_parser("sample", parents=[common], help="Markov branching trees from a split law")
	_add_model_flags(p, "split law name")
	p.add_argument("--n", type=int, help="tree size in the law's own count")
	p.add_argument("--depth", type=int, help="return only the ball of this radius")
	p.add_argument("--radius", type=int, help="sample the ball of the infinite tree instead")
	_add_tree_output(p)

	p = sub.add_parser("grow", parents=[common], help="trees from a growth model")
	_add_model_flags(p, "growth model name")
	p.add_argument("--n", type=int, required=True)
	_add_tree_output(p)

	p = sub.add_parser("pmf", parents=[common], help="first-split table q_n")
	_add_model_flags(p, "split law name")
	p.add_argument("--n", type=int, required=True)

	p = sub.add_parser(
		"converge-local", parents=[common], help="q_n against q_*, or ball laws of T_n against T_∞"
	)
	_add_model_flags(p, "split law name")
	p.add_argument("--mode", choices=("table", "balls"), default="table")
	p.add_argument("--lambda", dest="lambdas", action="append", help="finite parts, e.g. 1,1 (repeatable)")
	p.add_argument("--n-grid", dest="n_grid", default="100,1000,10000")
	p.add_argument("--radius", type=int, default=2)
	p.add_argument("--reps", type=int, default=10_000)

	p = sub.add_parser("volume", parents=[common], help="volume growth curves of infinite trees")
	_add_model_flags(p, "kesten-<xi> or split law name")
	p.add_argument("--rmax", type=int, required=True)
	p.add_argument("--reps", type=int, default=1000)
	p.add_argument("--measure", choices=("vertices", "leaves"))
	p.add_argument("--window", help="r_lo,r_hi of the exponent fit")
	p.add_argument("--statistic", choices=("mean", "median"), default="mean")

	p = sub.add_parser("ghp", parents=[common], help="GHP distance interval between two trees")
	p.add_argument("--x", required=True, help="first tree, text or JSON record")
	p.add_argument("--y", required=True, help="second tree")
	p.add_argument("--a", type=float, default=1.0, help="edge length")
	p.add_argument("--b", type=float, default=1.0, help="mass per counted node")
	p.add_argument("--measure", choices=("vertices", "leaves"), default="vertices")
	p.add_argument("--extended", action="store_true", help="also report D_GHP")

	p = sub.add_parser("validate", parents=[common], help="run validation suites")
	p.add_argument("--suite", default="all")
	return parser


def _settings(args):
	from mbtlab.mbtlab.lab_settings.lab_settings import get_settings

	overrides = {"seed": args.seed, "workers": args.workers, "scale": args.scale, "log_level": args.log_level}
	return get_settings(args.config, overrides)


def _header(out, settings, model=None, params=None):
	out.write(f"# mbtlab {__version__}\n")
	if model:
		out.write(f"# model: {model}\n")
	if params is not None:
		out.write(f"# params: {json.dumps(params, sort_keys=True)}\n")
	out.write(f"# seed: {settings.seed}\n")


def _split_law(args, settings):
	from mbtlab.mbtlab.split_laws.split_laws import get_split_law

	return get_split_law(args.model, _model_params(args), settings)


def _write_trees(out, trees, fmt):
	from mbtlab.mbtlab.tree_core.tree_core import write_tree

	for t in trees:
		out.write(write_tree(t, fmt) + "\n")


def cmd_sample(args, settings, out):
	from mbtlab.mbtlab.mb_engine.mb_engine import sample_infinite_ball, sample_mb

	law = _split_law(args, settings)
	rng = np.random.default_rng(settings.seed)
	if args.radius is not None:
		trees = [
			sample_infinite_ball(law, args.radius, rng, backbone_node_cap=settings.backbone_node_cap).tree
			for _ in range(args.count)
		]
	elif args.n is None:
		throw("sample needs --n or --radius")
	else:
		trees = [sample_mb(law, args.n, rng, depth=args.depth) for _ in range(args.count)]
	_write_trees(out, trees, args.format)


def cmd_grow(args, settings, out):
	from mbtlab.hooks import get_attr, growth_registry

	if args.model not in growth_registry:
		throw(f"Unknown growth model {args.model!r}; known: {', '.join(growth_registry)}", UnknownModelError)
	model = get_attr(growth_registry[args.model])
	rng = np.random.default_rng(settings.seed)
	_write_trees(out, [model(_model_params(args), args.n, rng) for _ in range(args.count)], args.format)


def cmd_pmf(args, settings, out):
	law = _split_law(args, settings)
	_header(out, settings, law.describe(), law.params)
	writer = csv.writer(out, lineterminator="\n")
	writer.writerow(("n", "split", "probability"))
	for lam, p in law.pmf_table(args.n):
		text = lam.to_text() if hasattr(lam, "to_text") else ",".join(str(x) for x in lam)
		writer.writerow((args.n, f"({text})", repr(p)))


def _int_list(text):
	try:
		return [int(x) for x in text.split(",") if x.strip()]
	except ValueError:
		throw(f"Expected comma separated integers, got {text!r}")


def cmd_converge_local(args, settings, out):
	from mbtlab.mbtlab.analysis.analysis import qn_convergence_table
	from mbtlab.mbtlab.partition_core.partition_core import Partition

	law = _split_law(args, settings)
	n_grid = _int_list(args.n_grid)
	_header(out, settings, law.describe(), law.params)
	writer = csv.writer(out, lineterminator="\n")
	if args.mode == "table":
		if not args.lambdas:
			throw("converge-local --mode table needs at least one --lambda")
		if law.semantics == "internal":
			lambdas = [tuple(_int_list(text)) for text in args.lambdas]
		else:
			lambdas = [Partition.from_text(text) for text in args.lambdas]
		table = qn_convergence_table(law, lambdas, n_grid)
		writer.writerow(("n", "lambda", "q_n", "q_star", "abs_delta"))
		for n, lam, q_n, q_star, delta in table.to_rows():
			writer.writerow((n, f"({lam})", repr(q_n), repr(q_star), repr(delta)))
		for lam, flag in table.monotone.items():
			out.write(f"# monotone ({lam}): {flag}\n")
		return

	from mbtlab.mbtlab.analysis.analysis import tv_distance
	from mbtlab.mbtlab.suites.validate import count_codes, finite_ball_code, infinite_ball_code
	from mbtlab.mbtlab.utils.replicas import run_replicas

	params = tuple(sorted(_model_params(args).items()))
	caps = (settings.split_table_cap, settings.gw_table_cap)
	workers = settings.effective_workers()
	limit = count_codes(
		run_replicas(infinite_ball_code, args.reps, settings.seed, workers, args.model, params, args.radius, *caps)
	)
	writer.writerow(("n", "radius", "reps", "tv"))
	for n in n_grid:
		finite = count_codes(
			run_replicas(
				finite_ball_code, args.reps, settings.seed + n, workers, args.model, params, n, args.radius, *caps
			)
		)
		writer.writerow((n, args.radius, args.reps, repr(tv_distance(finite, limit))))


def _volume_replica(rng, model, params, rmax, measure, split_table_cap, gw_table_cap, backbone_node_cap):
	from mbtlab.mbtlab.growth_models.growth_models import kesten_volume_curve, offspring_law
	from mbtlab.mbtlab.mb_engine.mb_engine import sample_infinite_ball, volume_curve
	from mbtlab.mbtlab.suites.validate import cached_law

	if model.startswith(KESTEN_PREFIX):
		xi = offspring_law({**dict(params), "xi": model[len(KESTEN_PREFIX) :]})
		return kesten_volume_curve(xi, rmax, rng, measure or "vertices")
	law = cached_law(model, params, split_table_cap, gw_table_cap)
	ball = sample_infinite_ball(law, rmax, rng, backbone_node_cap=backbone_node_cap)
	return volume_curve(ball, measure)


def cmd_volume(args, settings, out):
	from mbtlab.mbtlab.analysis.analysis import growth_exponent
	from mbtlab.mbtlab.utils.replicas import run_replicas

	params = tuple(sorted(_model_params(args).items()))
	curves = run_replicas(
		_volume_replica,
		args.reps,
		settings.seed,
		settings.effective_workers(),
		args.model,
		params,
		args.rmax,
		args.measure,
		settings.split_table_cap,
		settings.gw_table_cap,
		settings.backbone_node_cap,
	)
	_header(out, settings, args.model, dict(params))
	out.write(f"# measure: {curves[0].measure}\n")
	writer = csv.writer(out, lineterminator="\n")
	writer.writerow(("replica", "R", "V"))
	for i, curve in enumerate(curves):
		for r, v in curve.to_rows():
			writer.writerow((i, r, v))
	window = _int_list(args.window) if args.window else [max(1, args.rmax // 10), args.rmax]
	if len(window) != 2:
		throw("--window takes r_lo,r_hi")
	if len(curves) >= 30:
		rng = np.random.default_rng(settings.seed)
		fit = growth_exponent(curves, tuple(window), args.statistic, settings.bootstrap_resamples, rng)
		out.write(f"# slope: {fit.slope!r}\n# stderr: {fit.stderr!r}\n# statistic: {fit.statistic}\n")


def cmd_ghp(args, settings, out):
	from mbtlab.mbtlab.ghp_metric.ghp_metric import d_ghp_extended, from_tree, ghp_interval
	from mbtlab.mbtlab.tree_core.tree_core import read_trees

	spaces = []
	for text in (args.x, args.y):
		trees = read_trees(text)
		if len(trees) != 1:
			throw("--x and --y each take exactly one tree", ValidationError)
		spaces.append(from_tree(trees[0], args.a, args.b, args.measure))
	X, Y = spaces
	_header(out, settings)
	writer = csv.writer(out, lineterminator="\n")
	interval = ghp_interval(X, Y, settings.ghp_exact_cap)
	row = [repr(interval.lower), repr(interval.upper), interval.exact]
	head = ["lower", "upper", "exact"]
	if args.extended:
		ext = d_ghp_extended(
			X, Y, quad_step=settings.quad_step, margin=settings.quad_margin, cap=settings.ghp_exact_cap
		)
		head += ["extended", "extended_lower", "extended_error"]
		row += [repr(ext.value), repr(ext.lower), repr(ext.error)]
	writer.writerow(head)
	writer.writerow(row)


def cmd_validate(args, settings, out):
	from mbtlab.hooks import validation_suites
	from mbtlab.mbtlab.suites.validate import run_suite
	from mbtlab.mbtlab.utils.report import all_passed, render_report

	names = list(validation_suites) if args.suite == "all" else [args.suite]
	sections = {name: run_suite(name, settings) for name in names}
	out.write(render_report(f"Validation report (seed {settings.seed}, scale {settings.scale})", sections) + "\n")
	return 0 if all_passed(sections) else 1


COMMANDS = {
	"sample": cmd_sample,
	"grow": cmd_grow,
	"pmf": cmd_pmf,
	"converge-local": cmd_converge_local,
	"volume": cmd_volume,
	"ghp": cmd_ghp,
	"validate": cmd_validate,
}


def main(argv=None, out=None, err=None):
	out = out or sys.stdout
	err = err or sys.stderr
	command = "mbtlab"
	try:
		args = build_parser().parse_args(argv)
		command = args.command
		settings = _settings(args)
		return COMMANDS[command](args, settings, out) or 0
	except MBTLabError as e:
		log_error(f"Error in {command}", str(e))
		err.write(json.dumps(e.to_record()) + "\n")
		return e.code
	except Exception as e:
		log_error(f"Error in {command}", repr(e))
		err.write(json.dumps({"error": type(e).__name__, "code": 1, "message": str(e)}) + "\n")
		return 1


if __name__ == "__main__":
	sys.exit(main())
