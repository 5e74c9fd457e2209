"""Time the numba kernels against their pure-numpy twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat 20] [--n 400] [--points 2000]

The first numba call (JIT compile or cache load) is reported separately and
excluded from the steady-state timings.
"""
import argparse
import timeit

import numpy as np

from geomreg._kernels import _numba, _numpy


def cases(n, points):
    rng = np.random.default_rng(0)
    sigma = np.sort(rng.uniform(1e-6, 1.0, n))[::-1].copy()
    b = rng.standard_normal(n)
    a = rng.standard_normal(n)
    params = np.logspace(-12, 0, points)
    t = np.linspace(0.0, 1.0, points)
    x, y = np.cos(3 * t) + t, np.sin(2 * t) - t * t
    h = float(np.sum(np.hypot(np.diff(x), np.diff(y)))) / (points - 1)
    return {
        "gaussian_toeplitz": ("gaussian_toeplitz", (n, 3.0)),
        "tikhonov_sweep": ("tikhonov_sweep", (sigma, b, 1e-6, a, 1e-4, params)),
        "geom_sweep": ("geom_sweep", (sigma, b, 1e-6, a, 1e-4, params)),
        "fixed_point_coeffs": ("fixed_point_coeffs", (sigma, b, 0.05, b / sigma, 1e-12, 10000)),
        "arc_menger_curvature": ("arc_menger_curvature", (x, y, h)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args(argv)

    print(f"{'kernel':22s} {'first numba':>12s} {'numba':>12s} {'numpy':>12s} {'speedup':>8s}  agree")
    for label, (name, call_args) in cases(args.n, args.points).items():
        fn_nb, fn_np = getattr(_numba, name), getattr(_numpy, name)
        t0 = timeit.default_timer()
        out_nb = fn_nb(*call_args)
        first = timeit.default_timer() - t0
        out_np = fn_np(*call_args)
        t_nb = min(timeit.repeat(lambda: fn_nb(*call_args), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: fn_np(*call_args), number=1, repeat=args.repeat))
        flat_nb = out_nb if isinstance(out_nb, tuple) else (out_nb,)
        flat_np = out_np if isinstance(out_np, tuple) else (out_np,)
        agree = all(
            np.allclose(np.asarray(u, dtype=float), np.asarray(v, dtype=float), rtol=1e-9, atol=1e-12, equal_nan=True)
            for u, v in zip(flat_nb, flat_np)
        )
        print(f"{label:22s} {first:12.2e} {t_nb:12.2e} {t_np:12.2e} {t_np / t_nb:8.1f}  {agree}")


if __name__ == "__main__":
    main()
