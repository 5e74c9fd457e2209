"""Command-line entry point: ``geomreg {simulate,solve,lcurve,converge,benchmark}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure,
4 acceptance check failed.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DecompositionError,
    GeomRegError,
    NoRootError,
    StageError,
)
from .experiments import DEFAULT_DELTA_SCALES, convergence_study, run_benchmark
from .geomfix import closed_form_fixed_point, iterate_fixed_point
from .lcurve import LCURVE_METHODS, lcurve_generate
from .linalg import svd, write_csv
from .problem import SimulationConfig, load_problem, read_config_file, save_problem, simulate
from .regularizers import pinv_solve, tikhonov_solve, tsvd_solve

log = logging.getLogger("geomreg")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4
SOLVE_METHODS = ("pinv", "tikhonov", "tsvd", "geom")
SIM_KEYS = ("n", "spike_positions", "spike_amplitudes", "kernel_width", "noise_sigma", "seed")


class UsageError(GeomRegError):
    pass


def _add_sim_flags(p):
    p.add_argument("--n", type=int)
    p.add_argument("--spike-positions", help="comma-separated sample indices")
    p.add_argument("--spike-amplitudes", help="comma-separated amplitudes")
    p.add_argument("--kernel-width", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--seed", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="geomreg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; keys mirror flag names")
    common.add_argument("--out", help="output directory")

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic spike-deconvolution problem")
    _add_sim_flags(p)

    p = sub.add_parser("solve", parents=[common], help="solve a stored problem with one method")
    p.add_argument("--problem-dir")
    p.add_argument("--method", choices=SOLVE_METHODS)
    p.add_argument("--eps", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--iterate", action="store_true", help="geom: run the fixed-point iteration instead of the closed form")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)

    p = sub.add_parser("lcurve", parents=[common], help="L-curve sweep and corner")
    p.add_argument("--problem-dir")
    p.add_argument("--method", choices=LCURVE_METHODS)
    p.add_argument("--decades", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--solve", action="store_true", help="also write the estimate at the corner")

    p = sub.add_parser("converge", parents=[common], help="convergence study with eps = delta")
    p.add_argument("--problem-dir")
    p.add_argument("--scales", help="comma-separated noise scales relative to ||F x_true||")
    p.add_argument("--seed", type=int)
    p.add_argument("--zero-row", action="store_true", help="append a noise-free row")

    p = sub.add_parser("benchmark", parents=[common], help="full spike-deconvolution pipeline")
    _add_sim_flags(p)
    p.add_argument("--decades", type=float)
    p.add_argument("--points", type=int)
    return parser


DEFAULTS = {"decades": 30.0, "points": 100, "tol": 1e-12, "max_iter": 10000}


def _apply_config(args, parser):
    """Fill flags left unset on the command line from ``--config``, then defaults."""
    if getattr(args, "config", None):
        try:
            mapping = read_config_file(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        for key, value in mapping.items():
            dest = key.strip().replace("-", "_")
            if dest in ("command", "config") or not hasattr(args, dest):
                raise UsageError(f"config key {key!r} is not a flag of '{args.command}'")
            if getattr(args, dest) in (None, False):
                setattr(args, dest, _coerce(parser, args.command, dest, value))
    for dest, value in DEFAULTS.items():
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


def _coerce(parser, command, dest, text):
    sub = parser._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        if action.dest == dest:
            if isinstance(action, argparse._StoreTrueAction):
                return text.strip().lower() in ("1", "true", "yes", "on")
            if action.choices is not None and text not in action.choices:
                raise UsageError(f"config value {text!r} for {dest} not in {list(action.choices)}")
            return action.type(text) if action.type else text
    return text


def _sim_config(args):
    mapping = {k: getattr(args, k) for k in SIM_KEYS if getattr(args, k, None) is not None}
    return SimulationConfig.from_mapping(mapping)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise UsageError(f"'{args.command}' requires {flags}")


def _out_dir(args, default):
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def cmd_simulate(args):
    cfg = _sim_config(args)
    P = simulate(cfg)
    out = save_problem(P, _out_dir(args, "problem"))
    s = svd(P.F).sigma
    log.info("condition number of F: %.3e (numerical rank %d)", s[0] / s[-1], s.size)
    print(out)
    return EXIT_OK


def cmd_solve(args):
    _require(args, "problem_dir", "method")
    P = load_problem(args.problem_dir)
    S = svd(P.F)
    extra = {}
    if args.method == "pinv":
        est = pinv_solve(S, P.y)
    elif args.method == "tikhonov":
        _require(args, "gamma")
        est = tikhonov_solve(S, P.y, args.gamma)
    elif args.method == "tsvd":
        _require(args, "k")
        est = tsvd_solve(S, P.y, args.k)
    else:
        _require(args, "eps")
        if args.iterate:
            fp = iterate_fixed_point(S, P.y, args.eps, tol=args.tol, max_iter=args.max_iter)
        else:
            fp = closed_form_fixed_point(S, P.y, args.eps)
        est = fp.estimate
        extra = {"iterations": fp.iterations, "fixed_point_residual": fp.residual}
    out = _out_dir(args, ".")
    write_csv(out / "x.csv", est.x)
    meta = {k: v for k, v in est.to_dict().items() if k != "x"}
    meta.update(extra, solve_method=args.method, problem_dir=str(args.problem_dir))
    if P.x_true is not None:
        meta["relative_error"] = float(np.linalg.norm(P.x_true - est.x) / np.linalg.norm(P.x_true))
    _dump(out / "x.json", meta)
    return EXIT_OK


def cmd_lcurve(args):
    _require(args, "problem_dir", "method")
    P = load_problem(args.problem_dir)
    S = svd(P.F)
    curve = lcurve_generate(S, P.y, args.method, args.decades, args.points)
    out = _out_dir(args, ".")
    curve.write(out / f"lcurve_{args.method}.csv")
    for w in curve.warnings:
        log.warning(w)
    if args.solve:
        if args.method == "tikhonov":
            est = tikhonov_solve(S, P.y, curve.corner_param)
        else:
            est = closed_form_fixed_point(S, P.y, curve.corner_param).estimate
        write_csv(out / f"x_{args.method}.csv", est.x)
    print(f"corner {args.method}: param={curve.corner_param:.6g} index={curve.corner_index}")
    return EXIT_OK


def _parse_scales(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad --scales {text!r}: {exc}") from exc


def cmd_converge(args):
    _require(args, "problem_dir")
    P = load_problem(args.problem_dir)
    if P.x_true is None:
        raise UsageError("convergence study needs x_true.csv in the problem directory")
    scales = _parse_scales(args.scales) if args.scales else DEFAULT_DELTA_SCALES
    seed = args.seed if args.seed is not None else int(P.meta.get("seed", 0))
    study = convergence_study(P.F, P.x_true, scales, seed=seed, include_zero=args.zero_row)
    out = _out_dir(args, ".")
    study.write_csv(out / "convergence.csv")
    _dump(out / "convergence.json", study.to_dict())
    for r in study.rows:
        print(f"delta={r['delta']:.3e} rel_error={r['relative_error']:.6f} bound_ok={r['bound_holds']}")
    print(f"decrease factor {study.decrease_factor:.4g}, Spearman {study.spearman:.4f}")
    if not study.passed:
        failed = [k for k, ok in study.checks.items() if not ok]
        print(f"convergence check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


def cmd_benchmark(args):
    cfg = _sim_config(args)
    out = _out_dir(args, "benchmark")
    report = run_benchmark(cfg, args.decades, args.points, out)
    for name in ("pinv", "tikhonov", "geom"):
        m = report.methods[name]
        print(f"{name:9s} param={m['chosen_param']:.6g} relative_error={m['relative_error']:.6g}")
    print(f"report: {out / 'report.json'}")
    if not report.passed:
        failed = [k for k, ok in report.checks.items() if not ok]
        print(f"benchmark check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "lcurve": cmd_lcurve,
    "converge": cmd_converge,
    "benchmark": cmd_benchmark,
}

NUMERICAL = (ConvergenceError, DecompositionError, NoRootError, ConsistencyError, FloatingPointError)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        _apply_config(args, parser)
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(exc.cause, NUMERICAL + (ArithmeticError,)) else EXIT_USAGE
    except NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
