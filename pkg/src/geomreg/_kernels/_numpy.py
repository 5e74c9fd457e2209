"""Pure-numpy reference kernels.

Every function here has a twin with the same signature in ``_numba``; the
two are interchangeable and are cross-checked in the test suite.
"""
import numpy as np


def gaussian_toeplitz(n, width):
    idx = np.arange(n, dtype=np.float64)
    d = idx[:, None] - idx[None, :]
    c = 1.0 / (width * np.sqrt(2.0 * np.pi))
    return c * np.exp(-(d * d) / (2.0 * width * width))


def tikhonov_sweep(sigma, b, yperp2, a, xperp2, params):
    g = params[:, None]
    s2 = (sigma * sigma)[None, :]
    coef = sigma[None, :] * b[None, :] / (s2 + g)
    fit = g * b[None, :] / (s2 + g)
    res = np.sqrt(yperp2 + np.sum(fit * fit, axis=1))
    sol = np.sqrt(np.sum(coef * coef, axis=1))
    diff = a[None, :] - coef
    err = np.sqrt(xperp2 + np.sum(diff * diff, axis=1))
    return res, sol, err


def geom_sweep(sigma, b, yperp2, a, xperp2, params):
    absb = np.abs(b)[None, :]
    e = params[:, None]
    keep = absb > 2.0 * e
    gap = np.where(keep, (absb - 2.0 * e) * (absb + 2.0 * e), 0.0)
    s = np.where(keep, 0.5 * (absb + np.sqrt(gap)), 0.0) * np.sign(b)[None, :]
    coef = s / sigma[None, :]
    fit = b[None, :] - s
    res = np.sqrt(yperp2 + np.sum(fit * fit, axis=1))
    sol = np.sqrt(np.sum(coef * coef, axis=1))
    diff = a[None, :] - coef
    err = np.sqrt(xperp2 + np.sum(diff * diff, axis=1))
    return res, sol, err


def fixed_point_coeffs(sigma, b, eps, c0, tol, max_iter):
    """Iterate the per-mode map c <- sigma*b*c^2 / (sigma^2*c^2 + eps^2).

    Returns ``(c, iterations, last_step, converged)``.
    """
    c = c0.astype(np.float64, copy=True)
    e2 = eps * eps
    step = np.inf
    for it in range(1, max_iter + 1):
        t = sigma * c
        c_new = sigma * b * c * c / (t * t + e2)
        step = np.sqrt(np.sum((c_new - c) ** 2))
        scale = 1.0 + np.sqrt(np.sum(c * c))
        c = c_new
        if step <= tol * scale:
            return c, it, step, True
    return c, max_iter, step, False


def arc_menger_curvature(x, y, h):
    """Signed Menger curvature at every vertex of the polyline ``(x, y)``.

    The circle passes through the vertex and the two polyline points at arc
    length ``h`` before and after it.  Vertices closer than ``h`` to either
    end of the polyline get ``-inf``.
    """
    n = x.shape[0]
    kappa = np.full(n, -np.inf)
    if n < 3:
        return kappa
    s = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))))
    total = s[-1]
    inner = np.arange(1, n - 1)
    inner = inner[(s[inner] - h >= 0.0) & (s[inner] + h <= total)]
    if inner.size == 0:
        return kappa
    ax = np.interp(s[inner] - h, s, x)
    ay = np.interp(s[inner] - h, s, y)
    cx = np.interp(s[inner] + h, s, x)
    cy = np.interp(s[inner] + h, s, y)
    bx = x[inner]
    by = y[inner]
    cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
    denom = np.hypot(bx - ax, by - ay) * np.hypot(cx - bx, cy - by) * np.hypot(cx - ax, cy - ay)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa[inner] = np.where(denom > 0.0, 2.0 * cross / denom, 0.0)
    return kappa
