"""Geometric-mean fixed-point regularization.

The update map ``A_eps`` re-estimates the solution with a MAP prior whose
covariance is diagonal in the right singular basis with eigenvalues equal to
the squared coordinates of the current estimate.  In spectral form

    A_eps[w] = sum_i sigma_i b_i t_i^2 / (sigma_i^2 t_i^2 + eps^2) v_i,

with ``b_i = u_i'y`` and ``t_i = v_i'w``; a coordinate with ``t_i = 0``
contributes nothing.  Each coordinate of a fixed point solves
``s^2 - b_i s + eps^2 = 0`` in ``s = sigma_i v_i'p``, so only modes with
``|b_i| > 2 eps`` survive.  The canonical fixed point keeps all of them and
takes the root of larger magnitude.
"""
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConsistencyError, ConvergenceError, DomainError, NotApplicableError, ShapeError, SingularPointError
from .linalg import as_vector, pseudo_solve
from .regularizers import SolutionEstimate, make_estimate, map_estimate

__all__ = [
    "FixedPointResult",
    "ErrorDecomposition",
    "AttractivityReport",
    "TangencyReport",
    "CovarianceReport",
    "apply_A_eps",
    "closed_form_fixed_point",
    "iterate_fixed_point",
    "jacobian_A_eps",
    "spectral_norm",
    "attractivity_check",
    "geometric_mean_value_and_grad",
    "tangency_check",
    "tangency_cosine",
    "covariance_consistency_check",
    "error_decomposition",
    "fixed_point_modes",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10000


def _check_eps(eps):
    if not np.isfinite(eps) or not eps > 0:
        raise DomainError(f"eps must be finite and > 0, got {eps}")
    return float(eps)


@dataclass(frozen=True, eq=False)
class FixedPointResult:
    estimate: SolutionEstimate
    kept_indices: tuple
    iterations: int
    residual: float

    @property
    def p(self):
        return self.estimate.x

    @property
    def eps(self):
        return self.estimate.param

    def to_dict(self):
        return {
            "estimate": self.estimate.to_dict(),
            "kept_indices": [int(i) for i in self.kept_indices],
            "iterations": int(self.iterations),
            "residual": float(self.residual),
        }


def fixed_point_modes(b, eps):
    """Per-mode data of the canonical fixed point.

    Returns ``(keep, s)`` where ``keep`` masks ``|b_i| > 2 eps`` and
    ``s_i = sigma_i v_i'p`` (zero for dropped modes).
    """
    absb = np.abs(b)
    keep = absb > 2.0 * eps
    # (|b| - 2e)(|b| + 2e) avoids cancellation in b^2 - 4e^2 near the threshold
    gap = np.where(keep, (absb - 2.0 * eps) * (absb + 2.0 * eps), 0.0)
    s = np.where(keep, 0.5 * (absb + np.sqrt(gap)), 0.0) * np.sign(b)
    return keep, s


def _map_coeffs(sigma, b, eps, t):
    st = sigma * t
    return sigma * b * t * t / (st * st + eps * eps)


def apply_A_eps(S, y, eps, w):
    eps = _check_eps(eps)
    b = S.data_coeffs(y)
    t = S.source_coeffs(w)
    return S.synthesize(_map_coeffs(S.sigma, b, eps, t))


def _result_from_coeffs(S, y, eps, b, coeffs, kept, iterations):
    warnings = () if len(kept) else ("empty kept set: every mode is truncated",)
    est = make_estimate(S, y, coeffs, "geom_fixed_point", eps, kept_indices=kept, warnings=warnings)
    resid = float(np.linalg.norm(_map_coeffs(S.sigma, b, eps, coeffs) - coeffs))
    return FixedPointResult(est, tuple(int(i) for i in kept), iterations, resid)


def closed_form_fixed_point(S, y, eps):
    eps = _check_eps(eps)
    b = S.data_coeffs(y)
    keep, s = fixed_point_modes(b, eps)
    coeffs = s / S.sigma
    return _result_from_coeffs(S, y, eps, b, coeffs, np.flatnonzero(keep), 0)


def iterate_fixed_point(S, y, eps, w0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Iterate ``w <- A_eps[w]`` from ``w0`` (default: the pseudoinverse solution).

    Stops when ``||w_next - w|| <= tol * (1 + ||w||)``.  After the first step
    the iterate lies in the span of the right singular vectors, so the loop
    runs on the coordinates ``v_i'w`` alone.
    """
    eps = _check_eps(eps)
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")
    b = S.data_coeffs(y)
    w0 = pseudo_solve(S, y) if w0 is None else as_vector(w0, "w0")
    if w0.shape[0] != S.m:
        raise ShapeError(f"w0 has length {w0.shape[0]}, expected {S.m}")
    c = _map_coeffs(S.sigma, b, eps, S.V.T @ w0)
    step = float(np.linalg.norm(S.synthesize(c) - w0))
    iterations = 1
    converged = step <= tol * (1.0 + np.linalg.norm(w0))
    if not converged and max_iter > 1:
        c, extra, step, converged = _kernels.fixed_point_coeffs(S.sigma, b, eps, c, float(tol), int(max_iter - 1))
        iterations += int(extra)
    if not converged:
        raise ConvergenceError(
            f"fixed-point iteration did not converge in {max_iter} steps (last step {step:.3e})",
            last_iterate=S.synthesize(c),
            residual=float(step),
            iterations=iterations,
        )
    kept = np.flatnonzero((np.abs(b) > 2.0 * eps) & (c != 0.0))
    return _result_from_coeffs(S, y, eps, b, c, kept, iterations)


def _jacobian_diag(sigma, b, eps, t):
    # d/dt of sigma*b*t^2/(sigma^2 t^2 + eps^2)
    st = sigma * t
    den = st * st + eps * eps
    return 2.0 * eps * eps * st * b / (den * den)


def jacobian_A_eps(S, y, eps, w):
    """Derivative of ``A_eps`` at ``w``: ``sum_i d_i v_i v_i'`` (m x m, symmetric)."""
    eps = _check_eps(eps)
    b = S.data_coeffs(y)
    t = S.source_coeffs(w)
    d = _jacobian_diag(S.sigma, b, eps, t)
    J = (S.V * d) @ S.V.T
    return 0.5 * (J + J.T)


def spectral_norm(J, tol=1e-10, max_iter=10000, seed=0):
    """Largest singular value of a symmetric matrix by power iteration."""
    J = np.asarray(J, dtype=np.float64)
    x = np.random.default_rng(seed).standard_normal(J.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        z = J @ x
        new = float(np.linalg.norm(z))
        if new == 0.0:
            return 0.0
        x = z / new
        if abs(new - est) <= tol * new:
            return new
        est = new
    return est


@dataclass
class AttractivityReport:
    eps: float
    kept_indices: list
    data_coeffs: list
    sufficient_margin: list
    strict_inequality: list
    mode_derivatives: list
    spectral_norm: float
    attracting: bool
    empty: bool

    @property
    def all_sufficient_margin(self):
        return all(self.sufficient_margin)

    def to_dict(self):
        return asdict(self)


def attractivity_check(S, y, eps):
    """Report local attractivity of the canonical fixed point.

    Per kept mode: whether ``|u_i'y| > 4 eps`` (a sufficient condition) and
    whether ``2 eps^2 |s_i b_i| < (s_i^2 + eps^2)^2`` holds.  Globally: the
    spectral norm of the Jacobian at p and the verdict ``norm < 1``.
    """
    eps = _check_eps(eps)
    fp = closed_form_fixed_point(S, y, eps)
    b = S.data_coeffs(y)
    kept = list(fp.kept_indices)
    if not kept:
        return AttractivityReport(eps, [], [], [], [], [], 0.0, True, True)
    c = S.source_coeffs(fp.p)
    s = S.sigma * c
    e2 = eps * eps
    lhs = 2.0 * e2 * np.abs(s * b)
    rhs = (s * s + e2) ** 2
    d = _jacobian_diag(S.sigma, b, eps, c)
    norm = spectral_norm(jacobian_A_eps(S, y, eps, fp.p))
    return AttractivityReport(
        eps=eps,
        kept_indices=kept,
        data_coeffs=[float(b[i]) for i in kept],
        sufficient_margin=[bool(abs(b[i]) > 4.0 * eps) for i in kept],
        strict_inequality=[bool(lhs[i] < rhs[i]) for i in kept],
        mode_derivatives=[float(d[i]) for i in kept],
        spectral_norm=norm,
        attracting=bool(norm < 1.0),
        empty=False,
    )


def geometric_mean_value_and_grad(z):
    """``g(z) = prod |z_i|`` and its gradient ``sgn(z_j) prod_{i != j} |z_i| = g / z_j``."""
    z = as_vector(z, "z")
    if np.any(z == 0.0):
        raise SingularPointError("gradient of prod|z_i| requested at a point with a zero coordinate")
    a = np.abs(z)
    # exclusive prefix/suffix products give prod_{i != j} without dividing
    prefix = np.concatenate(([1.0], np.cumprod(a[:-1])))
    suffix = np.concatenate((np.cumprod(a[::-1][:-1])[::-1], [1.0]))
    grad = np.sign(z) * prefix * suffix
    return float(np.prod(a)), grad


@dataclass
class TangencyReport:
    eps: float
    kept_indices: list
    abs_cos: float
    sign: int
    tangent: bool
    perturbation: float
    perturbed_abs_cos: Optional[float] = None
    perturbation_breaks: Optional[bool] = None

    def to_dict(self):
        return asdict(self)


def tangency_cosine(sigma, b, p_hat):
    """Signed cosine between the gradient of ``prod|z_i|`` and the normal of
    ``{z : ||y - F z|| = const}`` at ``p_hat``, both in kept-mode coordinates.

    ``grad g = g(p_hat) / p_hat``; the positive factor ``g(p_hat)`` does not
    change the angle and can underflow for many modes, so ``1 / p_hat`` is
    used as the gradient direction.
    """
    a = 1.0 / p_hat
    n = sigma * (sigma * p_hat - b)
    return float(a @ n / (np.linalg.norm(a) * np.linalg.norm(n)))


def tangency_check(S, y, eps, perturbation=0.01):
    """Check that the canonical fixed point is a critical point of the
    geometric mean on its discrepancy ellipsoid within the kept subspace.

    As a negative control p_hat is moved by ``perturbation * ||p_hat||``
    along each kept coordinate axis in both directions, and the smallest
    resulting ``|cos|`` is reported; tangency must break whenever two or
    more modes are kept.  A step proportional to each coordinate itself
    would be blind to the small coordinates, which dominate ``1 / p_hat``.
    """
    eps = _check_eps(eps)
    fp = closed_form_fixed_point(S, y, eps)
    kept = np.asarray(fp.kept_indices, dtype=int)
    if kept.size == 0:
        raise NotApplicableError("tangency is undefined: the kept set is empty")
    b = S.data_coeffs(y)[kept]
    sigma = S.sigma[kept]
    p_hat = S.source_coeffs(fp.p)[kept]
    cos = tangency_cosine(sigma, b, p_hat)
    report = TangencyReport(
        eps=eps,
        kept_indices=[int(i) for i in kept],
        abs_cos=abs(cos),
        sign=int(np.sign(cos)),
        tangent=bool(abs(cos) >= 1.0 - 1e-8),
        perturbation=float(perturbation),
    )
    if kept.size >= 2 and perturbation:
        step = perturbation * np.linalg.norm(p_hat)
        pert = 1.0
        for j in range(kept.size):
            for sgn in (1.0, -1.0):
                z = p_hat.copy()
                z[j] += sgn * step
                if z[j] != 0.0:
                    pert = min(pert, abs(tangency_cosine(sigma, b, z)))
        report.perturbed_abs_cos = pert
        report.perturbation_breaks = bool(pert < 1.0 - 1e-4)
    return report


@dataclass
class CovarianceReport:
    eps: float
    max_deviation: float
    tolerance: float
    consistent: bool

    def to_dict(self):
        return asdict(self)


def covariance_consistency_check(S, y, eps):
    """MAP estimate under prior eigenvalues ``(v_i'p)^2`` must reproduce p."""
    eps = _check_eps(eps)
    fp = closed_form_fixed_point(S, y, eps)
    p = fp.p
    cx = S.source_coeffs(p) ** 2
    x_map = map_estimate(S, y, eps * eps, cx).x
    dev = float(np.max(np.abs(x_map - p)))
    tol = 1e-12 * (1.0 + float(np.linalg.norm(p)))
    return CovarianceReport(eps, dev, tol, bool(dev <= tol))


@dataclass
class ErrorDecomposition:
    """Split of ``x_true - p`` into truncation, data-misfit and shrinkage parts.

    The truncation part also carries the component of ``x_true`` in the
    numerical null space of F, which no spectral method can recover.
    """

    eps: float
    truncation_norm: float
    data_misfit_norm: float
    shrinkage_norm: float
    total_bound: float
    actual_error: float
    identity_residual: float
    kept_indices: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def error_decomposition(S, y, eps, x_true):
    eps = _check_eps(eps)
    x_true = as_vector(x_true, "x_true")
    if x_true.shape[0] != S.m:
        raise ShapeError(f"x_true has length {x_true.shape[0]}, expected {S.m}")
    b = S.data_coeffs(y)
    a = S.V.T @ x_true
    keep, s = fixed_point_modes(b, eps)
    sigma = S.sigma
    p = S.synthesize(s / sigma)

    trunc = S.synthesize(np.where(keep, 0.0, a)) + (x_true - S.synthesize(a))
    misfit = S.synthesize(np.where(keep, (sigma * a - b) / sigma, 0.0))
    # 0.5*(b - sgn(b) sqrt(b^2 - 4 eps^2)) == eps^2 / s, without cancellation
    safe_s = np.where(keep, s, 1.0)
    shrink = S.synthesize(np.where(keep, eps * eps / (safe_s * sigma), 0.0))

    err = x_true - p
    identity_residual = float(np.linalg.norm(err - (trunc + misfit + shrink)))
    scale = 1.0 + np.linalg.norm(x_true) + np.linalg.norm(p)
    if identity_residual > 1e-10 * scale:
        raise ConsistencyError(f"error split does not sum to x_true - p (residual {identity_residual:.3e})")
    nt, nm, ns = (float(np.linalg.norm(v)) for v in (trunc, misfit, shrink))
    return ErrorDecomposition(
        eps=eps,
        truncation_norm=nt,
        data_misfit_norm=nm,
        shrinkage_norm=ns,
        total_bound=nt + nm + ns,
        actual_error=float(np.linalg.norm(err)),
        identity_residual=identity_residual,
        kept_indices=[int(i) for i in np.flatnonzero(keep)],
    )
