"""Command-line front end: scenario runner plus direct single-check commands.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error.
"""

import argparse
import importlib.resources
import json
import math
import os
import sys

import numpy as np

from .experiments import (
    ConfigError,
    Report,
    emit_report,
    good_lambda_experiment,
    op_norm_lower_bound,
    run_config,
    weak_type_experiment,
)
from .geometry import boundary_ball_family, interior_ball_family, ball_measure_mc, ball_measure_model
from .integration import forelli_rudin_exponent
from .kernels import KernelParams, kernel_bounds_scan, kernel_inner, kernel_series_partial
from .operators import OperatorSpec
from .streams import make_rng
from .weights import ClassSpec, membership_verdict, parse_weight


def _emit(reports, args):
    text = emit_report(reports, args.format)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"reports.{args.format}")
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        print(text, end="")


def _cmd_run(args):
    path = args.config
    if path == "paper_suite.json":
        ref = importlib.resources.files("holoball") / "configs" / "paper_suite.json"
        path = str(ref)
    reports = run_config(path, seed=args.seed)
    _emit(reports, args)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_kernel_check(args):
    params = KernelParams(args.N, args.q)
    rep = Report(scenario_id="kernel-check", seed=args.seed)
    rng = make_rng(args.seed, 501)
    ok = True
    if params.power_branch:
        v = 0.95 * np.sqrt(rng.uniform(0, 1, 1000)) * np.exp(
            2j * np.pi * rng.uniform(0, 1, 1000))
        closed = kernel_inner(params, v)
        series = kernel_series_partial(params, v)
        err = float(np.max(np.abs(series - closed) / np.abs(closed)))
        ok = err < 1e-10
        rep.add("series_vs_closed_rel_err", err, n=1000, seed=args.seed,
                verdict="pass" if ok else "fail")
    scan = kernel_bounds_scan(params)
    rep.add("min_modulus", scan.min_modulus)
    rep.add("max_modulus", scan.max_modulus,
            verdict="finite" if scan.max_is_finite else "unbounded")
    rep.add("rho0_estimate", scan.rho0_estimate)
    if scan.min_modulus <= 0:
        ok = False
    rep.passed = ok
    _emit([rep], args)
    return 0 if ok else 1


def _cmd_ball_measure(args):
    rep = Report(scenario_id="ball-measure", seed=args.seed)
    family = boundary_ball_family(args.N, j_max=6) + interior_ball_family(args.N, j_max=5)
    worst = 1.0
    for i, ball in enumerate(family):
        mc = ball_measure_mc(ball, args.q, args.samples, args.seed + i)
        model = ball_measure_model(ball, args.q)
        ratio = mc.real / model
        worst = max(worst, ratio, 1.0 / ratio if ratio > 0 else math.inf)
        rep.add(f"mc_over_model[R={ball.radius:g},r={ball.center.modulus:.4f}]",
                ratio, mc.stderr / model, args.samples, args.seed + i)
    rep.fits = {"C": worst}
    rep.add("fitted_C", worst, verdict="pass" if worst < 20 else "fail")
    rep.passed = worst < 20
    _emit([rep], args)
    return 0 if rep.passed else 1


def _cmd_forelli_rudin(args):
    fit = forelli_rudin_exponent(args.c, args.d, KernelParams(args.N, 0.0),
                                 n=args.samples, seed=args.seed)
    expected = max(args.c - args.d, 0.0)
    rep = Report(scenario_id="forelli-rudin", seed=args.seed)
    rep.add("fitted_exponent", fit.fitted_exponent, n=args.samples, seed=args.seed,
            verdict="log" if fit.log_flag else "power")
    if fit.log_flag:
        ok = args.c == args.d
    else:
        tol = 0.15 * max(expected, 1.0)
        ok = abs(fit.fitted_exponent - expected) <= tol
    rep.fits = {"expected": expected, "log_flag": fit.log_flag}
    rep.passed = ok
    _emit([rep], args)
    return 0 if ok else 1


def _cmd_weight_class(args):
    try:
        params = json.loads(args.params)
        w = parse_weight(args.weight)
        spec = ClassSpec(args.class_id, args.N, params.pop("p", 2.0), params)
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    family = boundary_ball_family(args.N, j_max=8)
    verdict, report = membership_verdict(spec, w, family=family,
                                         n=args.samples, seed=args.seed)
    rep = Report(scenario_id="weight-class", seed=args.seed)
    rep.add("class_constant", report.supremum, n=args.samples, seed=args.seed,
            verdict=verdict)
    rep.add("divergence_slope", report.slope)
    rep.passed = verdict != "inconclusive"
    _emit([rep], args)
    return 0 if rep.passed else 1


def _op_spec_from_args(args):
    if args.op == "P":
        return OperatorSpec("P", args.N, s=args.s, t=args.t, p=args.p,
                            q=args.q, Q=args.Q)
    return OperatorSpec(args.op, args.N, a=args.a, b=args.b, p=args.p,
                        q=args.q, Q=args.Q)


def _cmd_op_norm(args):
    spec = _op_spec_from_args(args)
    est = op_norm_lower_bound(spec, parse_weight(args.weight),
                              n=args.samples, seed=args.seed)
    rep = Report(scenario_id="op-norm", seed=args.seed)
    rep.add("op_norm_lower", est.real, est.stderr, args.samples, args.seed)
    rep.passed = math.isfinite(est.real)
    _emit([rep], args)
    return 0 if rep.passed else 1


def _cmd_weak_type(args):
    rep = weak_type_experiment(args.s, args.t, args.q, n=args.samples,
                               seed=args.seed, N=args.N, grid=args.grid)
    _emit([rep], args)
    return 0 if rep.passed else 1


def _cmd_good_lambda(args):
    rep = good_lambda_experiment(parse_weight(args.weight), args.s, args.t,
                                 args.q, args.Q, args.p, n=args.samples,
                                 seed=args.seed, N=args.N, grid=args.grid)
    _emit([rep], args)
    return 0 if rep.passed else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=20_000)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    parser = argparse.ArgumentParser(
        prog="holoball",
        description="Numerical checks for weighted integral operators on the "
                    "unit ball of C^N",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="execute a scenario config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("kernel-check", parents=[common], help="series/closed-form agreement and bounds scan")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--q", type=float, default=0.0)
    p.set_defaults(func=_cmd_kernel_check)

    p = sub.add_parser("ball-measure", parents=[common], help="MC ball measures vs the power model")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--q", type=float, default=0.0)
    p.set_defaults(func=_cmd_ball_measure)

    p = sub.add_parser("forelli-rudin", parents=[common], help="boundary growth exponent fit")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--N", type=int, default=1)
    p.set_defaults(func=_cmd_forelli_rudin)

    p = sub.add_parser("weight-class", parents=[common], help="class membership verdict")
    p.add_argument("--class", dest="class_id", required=True,
                   choices=("Bp", "ApAlpha", "BpABQQ", "Kp", "Dp"))
    p.add_argument("--params", required=True, help='JSON, e.g. \'{"a":0,"p":2}\'')
    p.add_argument("--weight", default="1")
    p.add_argument("--N", type=int, default=1)
    p.set_defaults(func=_cmd_weight_class)

    p = sub.add_parser("op-norm", parents=[common], help="operator norm lower bound")
    p.add_argument("--op", choices=("T", "S", "P"), default="T")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--Q", type=float, default=0.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--weight", default="1")
    p.set_defaults(func=_cmd_op_norm)

    p = sub.add_parser("weak-type", parents=[common], help="weak (1,1) vs strong (1,1) ratios")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.25)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--grid", type=int, default=60_000)
    p.set_defaults(func=_cmd_weak_type)

    p = sub.add_parser("good-lambda", parents=[common], help="good-lambda decay fit")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--Q", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--grid", type=int, default=32768)
    p.add_argument("--weight", default="1")
    p.set_defaults(func=_cmd_good_lambda)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
