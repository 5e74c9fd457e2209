"""Convergence study and the spike-deconvolution benchmark pipeline."""
import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import svg
from .errors import DomainError, NoRootError, NotApplicableError, StageError
from .geomfix import (
    DEFAULT_MAX_ITER,
    attractivity_check,
    closed_form_fixed_point,
    covariance_consistency_check,
    error_decomposition,
    tangency_check,
)
from .lcurve import lcurve_generate
from .linalg import svd, write_csv
from .problem import SimulationConfig, save_problem, simulate
from .regularizers import discrepancy_principle_gamma, pinv_solve, tikhonov_solve

__all__ = [
    "DEFAULT_DELTA_SCALES",
    "EPS_MIN",
    "ConvergenceStudy",
    "convergence_study",
    "BenchmarkReport",
    "run_benchmark",
    "relative_error",
    "iteration_track",
    "REPORT_SCHEMA",
]

DEFAULT_DELTA_SCALES = tuple(10.0 ** -k for k in range(1, 7))
EPS_MIN = 1e-14
MIN_DECREASE = 10.0
MIN_SPEARMAN = 0.9


def relative_error(x_true, x_hat):
    return float(np.linalg.norm(x_true - x_hat) / np.linalg.norm(x_true))


@dataclass
class ConvergenceStudy:
    rows: list
    decrease_factor: float
    spearman: float
    bounds_hold: bool
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def write_csv(self, path):
        keys = list(self.rows[0].keys())
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for row in self.rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def convergence_study(F, x_true, scales=DEFAULT_DELTA_SCALES, seed=0, include_zero=False, S=None):
    """Solve with ``eps = delta = ||noise||`` along a decreasing noise sequence.

    For each scale a fresh Gaussian noise vector is drawn and rescaled to the
    exact norm ``delta = scale * ||F x_true||``.  With ``include_zero`` a final
    noise-free row is added, solved at ``eps = EPS_MIN``.
    """
    if x_true is None:
        raise DomainError("the convergence study needs a known x_true")
    scales = sorted((float(s) for s in scales), reverse=True)
    if len(scales) < 2 or scales[-1] <= 0:
        raise DomainError("need at least two positive noise scales")
    S = svd(F) if S is None else S
    clean = S.apply(x_true)
    base = float(np.linalg.norm(clean))
    rng = np.random.default_rng(seed)
    rows = []
    plan = [(s, s * base) for s in scales]
    if include_zero:
        plan.append((0.0, 0.0))
    for scale, delta in plan:
        if delta > 0:
            nu = rng.standard_normal(clean.shape[0])
            nu *= delta / np.linalg.norm(nu)
            y = clean + nu
            eps = delta
        else:
            y = clean.copy()
            eps = EPS_MIN
        fp = closed_form_fixed_point(S, y, eps)
        dec = error_decomposition(S, y, eps, x_true)
        rows.append(
            {
                "scale": scale,
                "delta": delta,
                "eps": eps,
                "relative_error": relative_error(x_true, fp.p),
                "kept": len(fp.kept_indices),
                "truncation_norm": dec.truncation_norm,
                "data_misfit_norm": dec.data_misfit_norm,
                "shrinkage_norm": dec.shrinkage_norm,
                "total_bound": dec.total_bound,
                "actual_error": dec.actual_error,
                "bound_holds": bool(dec.actual_error <= dec.total_bound + 1e-10),
            }
        )
    noisy = [r for r in rows if r["delta"] > 0]
    first, last = noisy[0]["relative_error"], noisy[-1]["relative_error"]
    decrease = first / last if last > 0 else float("inf")
    rho = float(spearmanr([r["delta"] for r in rows], [r["relative_error"] for r in rows]).correlation)
    bounds = all(r["bound_holds"] for r in rows)
    checks = {
        "decrease_factor_at_least_10": bool(decrease >= MIN_DECREASE),
        "spearman_above_0.9": bool(rho > MIN_SPEARMAN),
        "error_within_bound": bounds,
    }
    return ConvergenceStudy(rows, float(decrease), rho, bounds, checks)


def iteration_track(S, y, eps, max_steps=200, tol=1e-12):
    """L-curve coordinates ``(residual, solution norm)`` of successive iterates
    of the fixed-point map started from the pseudoinverse solution."""
    b = S.data_coeffs(y)
    sigma = S.sigma
    y_perp = y - S.U @ b
    yperp2 = float(y_perp @ y_perp)
    c = b / sigma
    rows = []
    for k in range(max_steps + 1):
        fit = b - sigma * c
        rows.append((k, float(np.sqrt(yperp2 + fit @ fit)), float(np.linalg.norm(c))))
        st = sigma * c
        c_new = sigma * b * c * c / (st * st + eps * eps)
        step = np.linalg.norm(c_new - c)
        c = c_new
        if step <= tol * (1.0 + np.linalg.norm(c)):
            fit = b - sigma * c
            rows.append((k + 1, float(np.sqrt(yperp2 + fit @ fit)), float(np.linalg.norm(c))))
            break
    return rows


@dataclass
class BenchmarkReport:
    config: dict
    decades: float
    points: int
    delta: float
    methods: dict
    convergence: dict
    verification: dict
    checks: dict
    files: dict
    timing: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self, include_timing=True):
        d = asdict(self)
        d["passed"] = self.passed
        if not include_timing:
            d.pop("timing")
        return d


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["config", "decades", "points", "delta", "methods", "convergence", "verification", "checks", "passed"],
    "properties": {
        "config": {
            "type": "object",
            "required": ["n", "spike_positions", "spike_amplitudes", "kernel_width", "noise_sigma", "seed"],
        },
        "decades": {"type": "number", "exclusiveMinimum": 0},
        "points": {"type": "integer", "minimum": 3},
        "delta": {"type": "number", "minimum": 0},
        "methods": {
            "type": "object",
            "required": ["pinv", "tikhonov", "geom"],
            "additionalProperties": {
                "type": "object",
                "required": ["chosen_param", "relative_error", "discrepancy"],
                "properties": {
                    "chosen_param": {"type": "number"},
                    "relative_error": {"type": "number", "minimum": 0},
                    "discrepancy": {"type": "number", "minimum": 0},
                    "lcurve_csv": {"type": "string"},
                    "lcurve_json": {"type": "string"},
                    "error_curve_csv": {"type": "string"},
                },
            },
        },
        "convergence": {
            "type": "object",
            "required": ["rows", "decrease_factor", "spearman", "bounds_hold"],
            "properties": {
                "rows": {
                    "type": "array",
                    "minItems": 2,
                    "items": {"type": "object", "required": ["delta", "eps", "relative_error"]},
                }
            },
        },
        "verification": {
            "type": "object",
            "required": ["tangency", "covariance", "attractivity", "error_decomposition"],
        },
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "files": {"type": "object", "additionalProperties": {"type": "string"}},
        "passed": {"type": "boolean"},
        "timing": {"type": "object"},
    },
}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def run_benchmark(cfg=None, decades=30.0, points=100, out_dir=None, convergence_scales=DEFAULT_DELTA_SCALES):
    """Simulate, select parameters on both L-curves, verify, and report.

    Returns a :class:`BenchmarkReport`; when ``out_dir`` is given every CSV,
    JSON and SVG artifact is written there as well.
    """
    t_start = time.perf_counter()
    cfg = SimulationConfig() if cfg is None else cfg
    state = {"stage": "simulate"}
    try:
        return _run_benchmark(cfg, decades, points, out_dir, convergence_scales, state, t_start)
    except (ArithmeticError, ValueError, AssertionError, OSError) as exc:
        raise StageError(state["stage"], exc) from exc


def _run_benchmark(cfg, decades, points, out_dir, convergence_scales, state, t_start):
    P = simulate(cfg)
    x_true = P.x_true
    xn = float(np.linalg.norm(x_true))

    state["stage"] = "svd"
    S = svd(P.F)

    state["stage"] = "pinv"
    est_pinv = pinv_solve(S, P.y)

    state["stage"] = "lcurve"
    curves = {m: lcurve_generate(S, P.y, m, decades, points, x_true=x_true) for m in ("tikhonov", "geom")}
    est_tik = tikhonov_solve(S, P.y, curves["tikhonov"].corner_param)
    eps = curves["geom"].corner_param
    fp = closed_form_fixed_point(S, P.y, eps)

    methods = {
        "pinv": {
            "chosen_param": 0.0,
            "relative_error": relative_error(x_true, est_pinv.x),
            "discrepancy": est_pinv.discrepancy,
        },
        "tikhonov": {
            "chosen_param": curves["tikhonov"].corner_param,
            "relative_error": relative_error(x_true, est_tik.x),
            "discrepancy": est_tik.discrepancy,
            "corner_index": curves["tikhonov"].corner_index,
            "warnings": curves["tikhonov"].warnings,
        },
        "geom": {
            "chosen_param": eps,
            "relative_error": relative_error(x_true, fp.p),
            "discrepancy": fp.estimate.discrepancy,
            "corner_index": curves["geom"].corner_index,
            "kept": len(fp.kept_indices),
            "warnings": curves["geom"].warnings,
        },
    }
    if P.delta:
        try:
            gamma_dp, est_dp = discrepancy_principle_gamma(S, P.y, P.delta)
            methods["tikhonov_discrepancy_principle"] = {
                "chosen_param": gamma_dp,
                "relative_error": relative_error(x_true, est_dp.x),
                "discrepancy": est_dp.discrepancy,
            }
        except NoRootError:
            pass

    state["stage"] = "verification"
    try:
        tangency = tangency_check(S, P.y, eps).to_dict()
    except NotApplicableError as exc:
        tangency = {"applicable": False, "reason": str(exc)}
    verification = {
        "tangency": tangency,
        "covariance": covariance_consistency_check(S, P.y, eps).to_dict(),
        "attractivity": attractivity_check(S, P.y, eps).to_dict(),
        "error_decomposition": error_decomposition(S, P.y, eps, x_true).to_dict(),
        "fixed_point_residual": fp.residual,
    }

    state["stage"] = "convergence"
    conv = convergence_study(P.F, x_true, convergence_scales, seed=cfg.seed, S=S)

    pinv_err = methods["pinv"]["relative_error"]
    checks = {
        "tikhonov_below_tenth_of_pinv": bool(methods["tikhonov"]["relative_error"] < 0.1 * pinv_err),
        "geom_below_tenth_of_pinv": bool(methods["geom"]["relative_error"] < 0.1 * pinv_err),
        "geom_within_3x_tikhonov": bool(methods["geom"]["relative_error"] <= 3.0 * methods["tikhonov"]["relative_error"]),
    }
    elapsed = time.perf_counter() - t_start

    files = {}
    if out_dir is not None:
        state["stage"] = "write"
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_problem(P, out / "problem")
        files["problem_dir"] = "problem"
        for m, curve in curves.items():
            c_csv, c_json = curve.write(out / f"lcurve_{m}.csv")
            e_csv = out / f"error_{m}.csv"
            _write_rows(e_csv, ["param", "relative_error"], zip(curve.params, curve.error_norms / xn))
            methods[m].update(lcurve_csv=c_csv.name, lcurve_json=c_json.name, error_curve_csv=e_csv.name)
            files[f"lcurve_{m}"] = c_csv.name
            files[f"error_{m}"] = e_csv.name
        for name, x in (("pinv", est_pinv.x), ("tikhonov", est_tik.x), ("geom", fp.p)):
            write_csv(out / f"x_{name}.csv", x)
            files[f"x_{name}"] = f"x_{name}.csv"
        track = iteration_track(S, P.y, eps, max_steps=min(DEFAULT_MAX_ITER, 500))
        _write_rows(out / "iteration_track.csv", ["iteration", "residual_norm", "solution_norm"], track)
        files["iteration_track"] = "iteration_track.csv"
        g = curves["geom"]
        _write_rows(
            out / "corner_track.csv",
            ["eps", "residual_norm", "solution_norm", "curvature", "is_corner"],
            (
                (e, r, s, k, int(i == g.corner_index))
                for i, (e, r, s, k) in enumerate(zip(g.params, g.residual_norms, g.solution_norms, g.curvature))
            ),
        )
        files["corner_track"] = "corner_track.csv"
        conv.write_csv(out / "convergence.csv")
        files["convergence"] = "convergence.csv"
        files.update(_write_plots(out, P, est_tik.x, fp.p, curves, xn))
        files["report"] = "report.json"

    report = BenchmarkReport(
        config=cfg.to_dict(),
        decades=float(decades),
        points=int(points),
        delta=float(P.delta or 0.0),
        methods=methods,
        convergence=conv.to_dict(),
        verification=verification,
        checks=checks,
        files=files,
        timing={"pipeline_seconds": elapsed},
    )
    if out_dir is not None:
        (Path(out_dir) / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report


def _write_plots(out, P, x_tik, x_geom, curves, xn):
    idx = np.arange(P.F.shape[1])
    plots = {
        "plot_source": ("source.svg", [(idx, P.x_true, "source")], "source", "sample", "amplitude", {}),
        "plot_data": ("data.svg", [(np.arange(P.y.shape[0]), P.y, "y + noise")], "data", "sample", "amplitude", {}),
        "plot_estimate_tikhonov": (
            "estimate_tikhonov.svg",
            [(idx, P.x_true, "source"), (idx, x_tik, "Tikhonov")],
            "Tikhonov estimate (L-curve corner)",
            "sample",
            "amplitude",
            {},
        ),
        "plot_estimate_geom": (
            "estimate_geom.svg",
            [(idx, P.x_true, "source"), (idx, x_geom, "geometric mean")],
            "Geometric-mean estimate (L-curve corner)",
            "sample",
            "amplitude",
            {},
        ),
    }
    for m, label in (("tikhonov", "gamma"), ("geom", "eps")):
        c = curves[m]
        k = c.corner_index
        plots[f"plot_lcurve_{m}"] = (
            f"lcurve_{m}.svg",
            [
                (c.residual_norms, c.solution_norms, "L-curve"),
                (c.residual_norms[k : k + 1], c.solution_norms[k : k + 1], "corner"),
            ],
            f"L-curve ({m})",
            "residual norm",
            "solution norm",
            {"logx": True, "logy": True, "markers": True},
        )
        plots[f"plot_error_{m}"] = (
            f"error_{m}.svg",
            [(c.params, c.error_norms / xn, "relative error")],
            f"relative error vs {label}",
            label,
            "relative error",
            {"logx": True, "logy": True},
        )
    files = {}
    for key, (name, series, title, xl, yl, kw) in plots.items():
        svg.line_plot(out / name, series, title=title, xlabel=xl, ylabel=yl, **kw)
        files[key] = name
    return files
