"""Numba-compiled kernels; loop-level twins of ``_numpy``."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def gaussian_toeplitz(n, width):
    out = np.empty((n, n))
    c = 1.0 / (width * math.sqrt(2.0 * math.pi))
    inv = 1.0 / (2.0 * width * width)
    for i in range(n):
        for j in range(i, n):
            d = float(i - j)
            v = c * math.exp(-(d * d) * inv)
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True)
def tikhonov_sweep(sigma, b, yperp2, a, xperp2, params):
    k = params.shape[0]
    r = sigma.shape[0]
    res = np.empty(k)
    sol = np.empty(k)
    err = np.empty(k)
    for j in range(k):
        g = params[j]
        rr = yperp2
        ss = 0.0
        ee = xperp2
        for i in range(r):
            den = sigma[i] * sigma[i] + g
            coef = sigma[i] * b[i] / den
            fit = g * b[i] / den
            rr += fit * fit
            ss += coef * coef
            d = a[i] - coef
            ee += d * d
        res[j] = math.sqrt(rr)
        sol[j] = math.sqrt(ss)
        err[j] = math.sqrt(ee)
    return res, sol, err


@njit(cache=True)
def geom_sweep(sigma, b, yperp2, a, xperp2, params):
    k = params.shape[0]
    r = sigma.shape[0]
    res = np.empty(k)
    sol = np.empty(k)
    err = np.empty(k)
    for j in range(k):
        e2 = 2.0 * params[j]
        rr = yperp2
        ss = 0.0
        ee = xperp2
        for i in range(r):
            absb = abs(b[i])
            s = 0.0
            if absb > e2:
                s = 0.5 * (absb + math.sqrt((absb - e2) * (absb + e2)))
                if b[i] < 0.0:
                    s = -s
            coef = s / sigma[i]
            fit = b[i] - s
            rr += fit * fit
            ss += coef * coef
            d = a[i] - coef
            ee += d * d
        res[j] = math.sqrt(rr)
        sol[j] = math.sqrt(ss)
        err[j] = math.sqrt(ee)
    return res, sol, err


@njit(cache=True)
def fixed_point_coeffs(sigma, b, eps, c0, tol, max_iter):
    r = sigma.shape[0]
    c = c0.copy()
    c_new = np.empty(r)
    e2 = eps * eps
    step = np.inf
    for it in range(1, max_iter + 1):
        dd = 0.0
        nn = 0.0
        for i in range(r):
            t = sigma[i] * c[i]
            c_new[i] = sigma[i] * b[i] * c[i] * c[i] / (t * t + e2)
            d = c_new[i] - c[i]
            dd += d * d
            nn += c[i] * c[i]
        step = math.sqrt(dd)
        scale = 1.0 + math.sqrt(nn)
        c[:] = c_new
        if step <= tol * scale:
            return c, it, step, True
    return c, max_iter, step, False


@njit(cache=True)
def _point_at(s, x, y, t):
    # linear interpolation along the polyline at arc length t
    lo = 0
    hi = s.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if s[mid] <= t:
            lo = mid
        else:
            hi = mid
    ds = s[hi] - s[lo]
    if ds <= 0.0:
        return x[hi], y[hi]
    w = (t - s[lo]) / ds
    if w > 1.0:
        w = 1.0
    return x[lo] + w * (x[hi] - x[lo]), y[lo] + w * (y[hi] - y[lo])


@njit(cache=True)
def arc_menger_curvature(x, y, h):
    n = x.shape[0]
    kappa = np.full(n, -np.inf)
    if n < 3:
        return kappa
    s = np.zeros(n)
    for i in range(1, n):
        s[i] = s[i - 1] + math.hypot(x[i] - x[i - 1], y[i] - y[i - 1])
    total = s[n - 1]
    for i in range(1, n - 1):
        ta = s[i] - h
        tc = s[i] + h
        if ta < 0.0 or tc > total:
            continue
        ax, ay = _point_at(s, x, y, ta)
        cx, cy = _point_at(s, x, y, tc)
        ux = x[i] - ax
        uy = y[i] - ay
        vx = cx - x[i]
        vy = cy - y[i]
        denom = math.hypot(ux, uy) * math.hypot(vx, vy) * math.hypot(cx - ax, cy - ay)
        if denom > 0.0:
            kappa[i] = 2.0 * (ux * vy - uy * vx) / denom
        else:
            kappa[i] = 0.0
    return kappa
