#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Run from the repository root after installing the package:

    python benchmarks/bench_kernels.py

Each kernel is timed over representative problem sizes; the last column is
the compiled speedup (> 1 means the extension wins).
"""

import time

import numpy as np

from thzchan.kernels import _numpy as py_impl

try:
    from thzchan.kernels import _core as c_impl
except ImportError:
    c_impl = None


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _bench(name, args_fn, sizes, repeats=7):
    rows = []
    for size in sizes:
        args = args_fn(size)
        t_py = _time(getattr(py_impl, name), args, repeats)
        if c_impl is not None:
            t_c = _time(getattr(c_impl, name), args, repeats)
            ref = getattr(py_impl, name)(*args)
            got = getattr(c_impl, name)(*args)
            if isinstance(ref, tuple):
                agree = all(np.allclose(a, b, rtol=1e-12) for a, b in zip(ref, got))
            else:
                agree = np.allclose(ref, got, rtol=1e-12)
            speedup = t_py / t_c if t_c > 0 else float("inf")
            rows.append((size, t_py, t_c, speedup, agree))
        else:
            rows.append((size, t_py, None, None, True))
    print(f"\n{name}")
    print(f"  {'size':>12} {'numpy':>12} {'compiled':>12} {'speedup':>9} {'match':>6}")
    for size, t_py, t_c, speedup, agree in rows:
        compiled = f"{t_c * 1e3:10.3f}ms" if t_c is not None else "       n/a"
        ratio = f"{speedup:8.1f}x" if speedup is not None else "      n/a"
        print(f"  {size!s:>12} {t_py * 1e3:10.3f}ms {compiled} {ratio} {agree!s:>6}")


def main():
    rng = np.random.default_rng(0)
    print("kernel backends:", "numpy", "+ compiled" if c_impl else "(fallback only)")

    def ray_args(n):
        offs = rng.normal(0.0, 0.03, (4, n))
        return (8.0, 0.4, -0.9, 0.4, 0.6, *offs)

    _bench("ray_path_distance", ray_args, [100, 1_000, 10_000, 100_000])

    def mirror_args(n):
        d_tx = rng.normal(size=(n, 3))
        norms = rng.uniform(2.0, 10.0, n)
        d_tx *= (norms / np.linalg.norm(d_tx, axis=1))[:, None]
        d_rx = rng.normal(size=(n, 3))
        d_rx *= (norms / np.linalg.norm(d_rx, axis=1))[:, None]
        return d_tx, d_rx, np.array([1e-3, 0, 0]), np.array([0, 1e-3, 0])

    _bench("mirror_step", mirror_args, [100, 1_000, 10_000, 100_000])

    def power_args(shape):
        n_sub, n_ray = shape
        return (
            rng.uniform(1e-8, 6e-8, n_ray),
            rng.normal(0.0, 3.0, n_ray),
            rng.uniform(0.5, 2.0, n_ray),
            rng.normal(0.0, 4.0, n_ray),
            (rng.random((n_sub, n_ray)) < 0.9).astype(np.uint8),
            np.linspace(300e9, 350e9, n_sub),
            325e9,
            1e-8,
            2.3,
        )

    _bench("stf_power_profile", power_args,
           [(50, 200), (500, 500), (500, 2_000)])

    def scan_args(shape):
        return (rng.uniform(0.0, 1.0, shape), 0, 1)

    _bench("psd_correlation_scan", scan_args,
           [(50, 500), (500, 1_000), (500, 4_000)])


if __name__ == "__main__":
    main()
