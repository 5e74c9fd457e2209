"""L-curve sweeps and corner selection for Tikhonov and the geometric-mean method."""
import csv
import json
import warnings as _warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConsistencyError, DomainError
from .linalg import as_vector

__all__ = [
    "LCurve",
    "LCURVE_METHODS",
    "parameter_grid",
    "lcurve_generate",
    "lcurve_corner",
    "corner_curvature",
    "LowCurvatureWarning",
]

LCURVE_METHODS = ("tikhonov", "geom")
NORM_FLOOR = 1e-300
LOW_CURVATURE = 1e-6


class LowCurvatureWarning(UserWarning):
    """The L-curve has no discernible corner."""


@dataclass(eq=False)
class LCurve:
    method: str
    params: np.ndarray
    residual_norms: np.ndarray
    solution_norms: np.ndarray
    corner_index: int = -1
    curvature: Optional[np.ndarray] = None
    error_norms: Optional[np.ndarray] = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        k = len(self.params)
        if k < 3 or len(self.residual_norms) != k or len(self.solution_norms) != k:
            raise DomainError("an L-curve needs at least 3 points and equal-length arrays")
        if np.any(np.diff(self.params) <= 0):
            raise DomainError("L-curve parameters must be strictly increasing")

    @property
    def corner_param(self):
        return float(self.params[self.corner_index])

    def sidecar(self):
        return {
            "method": self.method,
            "corner_index": int(self.corner_index),
            "corner_param": self.corner_param,
            "corner_residual_norm": float(self.residual_norms[self.corner_index]),
            "corner_solution_norm": float(self.solution_norms[self.corner_index]),
            "points": int(len(self.params)),
            "warnings": list(self.warnings),
        }

    def write(self, csv_path, json_path=None):
        """Write ``param,residual_norm,solution_norm`` rows plus a JSON sidecar."""
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["param", "residual_norm", "solution_norm"])
            for row in zip(self.params, self.residual_norms, self.solution_norms):
                w.writerow([repr(float(v)) for v in row])
        json_path.write_text(json.dumps(self.sidecar(), indent=2) + "\n")
        return csv_path, json_path

    @classmethod
    def read(cls, csv_path, json_path=None):
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(json_path.read_text())
        return cls(
            method=meta["method"],
            params=data[:, 0],
            residual_norms=data[:, 1],
            solution_norms=data[:, 2],
            corner_index=int(meta["corner_index"]),
            warnings=list(meta.get("warnings", [])),
        )


def parameter_grid(S, y, method, decades, points):
    """Log-spaced grid of regularization parameters anchored to the problem.

    Tikhonov: ``gamma`` centred (in log scale) on ``sigma_max * sigma_min``.
    Geometric mean: ``eps`` ending at ``max|u_i'y| / 2``, where every mode is
    truncated, and reaching ``decades`` decades below it.
    """
    if method not in LCURVE_METHODS:
        raise DomainError(f"unknown L-curve method {method!r}; choose from {LCURVE_METHODS}")
    if not decades > 0:
        raise DomainError(f"decades must be > 0, got {decades}")
    if points < 3:
        raise DomainError(f"points must be >= 3, got {points}")
    if method == "tikhonov":
        centre = np.log10(S.sigma[0] * S.sigma[-1])
        return np.logspace(centre - decades / 2, centre + decades / 2, points)
    top = np.log10(np.max(np.abs(S.data_coeffs(y))) / 2.0)
    return np.logspace(top - decades, top, points)


def corner_curvature(residual_norms, solution_norms, step=None):
    """Signed curvature of the log-log L-curve at each grid point.

    The circumscribed circle through each point and the two curve points an
    arc length ``step`` before and after it gives the curvature (Menger
    formula).  A fixed arc-length stencil keeps the estimate from being
    dominated by clusters of nearly coincident points, which the geometric
    mean sweep produces wherever the kept set does not change.  ``step``
    defaults to the curve length divided by the number of intervals.

    Points with a floored (zero) norm and points within ``step`` of either
    end of the curve get ``-inf``.  Positive values mark the convex corner
    traversed with increasing regularization.
    """
    res = np.asarray(residual_norms, dtype=np.float64)
    sol = np.asarray(solution_norms, dtype=np.float64)
    kappa = np.full(res.shape[0], -np.inf)
    idx = np.flatnonzero((res > NORM_FLOOR) & (sol > NORM_FLOOR))
    if idx.size < 3:
        return kappa
    lr = np.log10(res[idx])
    ls = np.log10(sol[idx])
    if step is None:
        step = float(np.sum(np.hypot(np.diff(lr), np.diff(ls)))) / (idx.size - 1)
    kappa[idx] = _kernels.arc_menger_curvature(lr, ls, float(step))
    return kappa


def _select_corner(kappa):
    eligible = np.isfinite(kappa)
    if not np.any(eligible):
        return len(kappa) // 2, ["no interior point with a full curvature stencil: midpoint reported"]
    best = np.max(kappa[eligible])
    # ties resolve toward the larger parameter
    idx = int(np.flatnonzero(eligible & (kappa == best))[-1])
    warn = []
    if not best >= LOW_CURVATURE:
        warn.append(f"maximum curvature {best:.3e} below {LOW_CURVATURE:g}: no discernible corner")
    return idx, warn


def lcurve_corner(curve):
    """Index of maximum curvature of ``curve`` (end points excluded)."""
    if len(curve.params) < 5:
        raise DomainError("corner detection needs at least 5 points")
    kappa = corner_curvature(curve.residual_norms, curve.solution_norms)
    idx, warn = _select_corner(kappa)
    for msg in warn:
        _warnings.warn(msg, LowCurvatureWarning, stacklevel=2)
    return idx


def lcurve_generate(S, y, method, decades=30.0, points=100, x_true=None):
    """Sweep the regularization parameter and locate the L-curve corner.

    When ``x_true`` is given the curve also carries ``error_norms``, the
    absolute errors ``||x_true - x_param||`` along the grid.
    """
    y = as_vector(y, "y")
    if not np.any(y):
        raise DomainError("L-curve of zero data is degenerate")
    params = parameter_grid(S, y, method, decades, points)
    b = S.data_coeffs(y)
    y_perp = y - S.U @ b
    yperp2 = float(y_perp @ y_perp)
    if x_true is not None:
        x_true = as_vector(x_true, "x_true")
        a = S.source_coeffs(x_true)
        x_perp = x_true - S.synthesize(a)
        xperp2 = float(x_perp @ x_perp)
    else:
        a = np.zeros(S.rank)
        xperp2 = 0.0
    sweep = _kernels.tikhonov_sweep if method == "tikhonov" else _kernels.geom_sweep
    res, sol, err = sweep(S.sigma, b, yperp2, a, xperp2, params)
    if method == "tikhonov":
        slack = 1e-12 * (np.linalg.norm(y) + np.max(sol))
        if np.any(np.diff(res) < -slack) or np.any(np.diff(sol) > slack):
            raise ConsistencyError("Tikhonov L-curve is not monotone along the gamma grid")
    curve = LCurve(
        method=method,
        params=params,
        residual_norms=res,
        solution_norms=sol,
        error_norms=err if x_true is not None else None,
    )
    if points >= 5:
        kappa = corner_curvature(res, sol)
        curve.corner_index, curve.warnings = _select_corner(kappa)
        curve.curvature = kappa
    else:
        curve.corner_index = int(points // 2)
        curve.warnings = ["fewer than 5 points: corner not estimated, midpoint reported"]
    return curve
