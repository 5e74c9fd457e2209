"""Spectral baseline estimators: pseudoinverse, Tikhonov, MAP, TSVD.

All estimators are evaluated from a single :class:`~geomreg.linalg.SingularSystem`,
so a parameter sweep costs O(r) per value instead of a dense solve.
"""
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import ConsistencyError, DomainError, NoRootError, ShapeError
from .linalg import as_vector

__all__ = [
    "METHODS",
    "SolutionEstimate",
    "make_estimate",
    "pinv_solve",
    "tikhonov_solve",
    "map_estimate",
    "tsvd_solve",
    "discrepancy_principle_gamma",
    "tikhonov_residual_norm",
]

METHODS = ("pinv", "tikhonov", "tsvd", "map", "geom_fixed_point")


@dataclass(frozen=True, eq=False)
class SolutionEstimate:
    x: np.ndarray
    method: str
    param: float
    discrepancy: float
    kept_indices: Optional[tuple] = None
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")

    def to_dict(self):
        return {
            "method": self.method,
            "param": float(self.param),
            "discrepancy": float(self.discrepancy),
            "kept_indices": None if self.kept_indices is None else [int(i) for i in self.kept_indices],
            "warnings": list(self.warnings),
            "x": [float(v) for v in self.x],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        kept = d.get("kept_indices")
        return cls(
            x=np.asarray(d["x"], dtype=np.float64),
            method=d["method"],
            param=float(d["param"]),
            discrepancy=float(d["discrepancy"]),
            kept_indices=None if kept is None else tuple(kept),
            warnings=tuple(d.get("warnings", ())),
        )


def make_estimate(S, y, coeffs, method, param, kept_indices=None, warnings=()):
    """Wrap spectral coefficients ``v_i'x`` into a :class:`SolutionEstimate`."""
    x = S.synthesize(coeffs)
    return SolutionEstimate(
        x=x,
        method=method,
        param=float(param),
        discrepancy=S.residual_norm(y, x),
        kept_indices=None if kept_indices is None else tuple(int(i) for i in kept_indices),
        warnings=tuple(warnings),
    )


def pinv_solve(S, y):
    b = S.data_coeffs(y)
    return make_estimate(S, y, b / S.sigma, "pinv", 0.0)


def tikhonov_solve(S, y, gamma):
    """Zero-order Tikhonov estimate ``(F'F + gamma I)^{-1} F'y``."""
    if not gamma >= 0 or not np.isfinite(gamma):
        raise DomainError(f"gamma must be finite and >= 0, got {gamma}")
    b = S.data_coeffs(y)
    s = S.sigma
    return make_estimate(S, y, s * b / (s * s + gamma), "tikhonov", gamma)


def map_estimate(S, y, eps2, cx_eigs):
    """Posterior mode for white noise of variance ``eps2`` and a prior
    covariance diagonal in the right singular basis with eigenvalues ``cx_eigs``.

    A zero eigenvalue pins the matching coordinate to 0 (the limit of a
    vanishing prior variance).
    """
    if not eps2 > 0:
        raise DomainError(f"eps2 must be > 0, got {eps2}")
    cx = np.asarray(cx_eigs, dtype=np.float64).reshape(-1)
    if cx.shape[0] != S.rank:
        raise ShapeError(f"cx_eigs has length {cx.shape[0]}, expected rank {S.rank}")
    if not np.all(np.isfinite(cx)) or np.any(cx < 0):
        raise DomainError("prior covariance eigenvalues must be finite and >= 0")
    b = S.data_coeffs(y)
    s = S.sigma
    coeffs = s * b * cx / (s * s * cx + eps2)
    return make_estimate(S, y, coeffs, "map", eps2)


def tsvd_solve(S, y, k):
    if not 1 <= k <= S.rank:
        raise DomainError(f"truncation level k={k} outside [1, {S.rank}]")
    b = S.data_coeffs(y)
    coeffs = np.zeros(S.rank)
    coeffs[:k] = b[:k] / S.sigma[:k]
    return make_estimate(S, y, coeffs, "tsvd", k, kept_indices=range(k))


def tikhonov_residual_norm(sigma, b, yperp2, gamma):
    fit = gamma * b / (sigma * sigma + gamma)
    return float(np.sqrt(yperp2 + fit @ fit))


def discrepancy_principle_gamma(S, y, delta, log10_range=(-30.0, 30.0)):
    """Choose gamma so that ``||y - F x_gamma|| = delta``.

    The residual is strictly increasing in gamma, so the root is bracketed on
    ``log10(gamma)`` (default bracket 60 decades, widened if the spectrum
    demands it) and polished with Brent's method.

    Returns ``(gamma, estimate)``.
    """
    y = as_vector(y, "y")
    b = S.data_coeffs(y)
    sigma = S.sigma
    y_perp = y - S.U @ b
    yperp2 = float(y_perp @ y_perp)
    lower = np.sqrt(yperp2)
    upper = float(np.linalg.norm(y))
    if not lower < delta < upper:
        raise NoRootError(
            f"no positive gamma gives discrepancy {delta}: feasible range is ({lower}, {upper})",
            lower=lower,
            upper=upper,
        )

    def f(t):
        return tikhonov_residual_norm(sigma, b, yperp2, 10.0 ** t) - delta

    lo, hi = log10_range
    while f(lo) >= 0:
        if lo < -300:
            raise NoRootError(f"discrepancy {delta} too close to the least-squares residual {lower}", lower, upper)
        lo -= 30.0
    while f(hi) <= 0:
        if hi > 300:
            raise NoRootError(f"discrepancy {delta} too close to ||y|| = {upper}", lower, upper)
        hi += 30.0
    t = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    gamma = 10.0 ** t
    r_minus = tikhonov_residual_norm(sigma, b, yperp2, gamma * (1 - 1e-6))
    r_plus = tikhonov_residual_norm(sigma, b, yperp2, gamma * (1 + 1e-6))
    if not r_minus <= r_plus:
        raise ConsistencyError("Tikhonov residual is not increasing in gamma")
    est = tikhonov_solve(S, y, gamma)
    return gamma, est
