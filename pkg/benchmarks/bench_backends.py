#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Workloads mirror the package's hot paths:

* hull-membership LPs (the gauge oracle grid of the duality checks),
* l1-distance LPs (the exact q=1 distance used in deviation sweeps),
* batched lq descent below and above q=2 (general-q distances).

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from nwidths import bodies as bd
from nwidths._kernels import _pykernels as pk

try:
    from nwidths._kernels import _cykernels as ck
except ImportError:
    ck = None


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_hull_lps(kern, n_points):
    V = bd.vk_vertices(6, 3)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((n_points, 6))
    A = V.T
    c = np.ones(V.shape[0])

    def run():
        for x in X:
            status, mu, obj, _ = kern.simplex_solve(c, A, x)
            assert status == 0

    return run


def bench_l1_dist_lps(kern, n_points, m=24, nb=6):
    rng = np.random.default_rng(1)
    B = np.linalg.qr(rng.standard_normal((m, nb)))[0].T[:nb]
    X = rng.standard_normal((n_points, m))
    Bt = B.T
    ncol = 2 * nb + 3 * m
    A = np.zeros((2 * m, ncol))
    A[:m, :nb] = Bt
    A[:m, nb:2 * nb] = -Bt
    A[:m, 2 * nb:2 * nb + m] = np.eye(m)
    A[:m, 2 * nb + m:2 * nb + 2 * m] = -np.eye(m)
    A[m:, :nb] = -Bt
    A[m:, nb:2 * nb] = Bt
    A[m:, 2 * nb:2 * nb + m] = np.eye(m)
    A[m:, 2 * nb + 2 * m:] = -np.eye(m)
    c = np.zeros(ncol)
    c[2 * nb:2 * nb + m] = 1.0

    def run():
        for x in X:
            b = np.concatenate([x, -x])
            status, z, obj, _ = kern.simplex_solve(c, A, b)
            assert status == 0

    return run


def bench_descent(kern, q, n_points, m=32, nb=8):
    rng = np.random.default_rng(2)
    B = np.linalg.qr(rng.standard_normal((m, nb)))[0].T[:nb]
    X = rng.standard_normal((n_points, m))

    def run():
        d, C, stale = kern.lq_descent(B, X, q)

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="smaller workloads")
    args = ap.parse_args()
    scale = 0.25 if args.quick else 1.0

    workloads = [
        ("hull-membership LPs (m=6, k=3)",
         lambda kern: bench_hull_lps(kern, int(200 * scale))),
        ("l1-distance LPs (m=24, n=6)",
         lambda kern: bench_l1_dist_lps(kern, int(100 * scale))),
        ("lq descent q=1.5 (512 x 32, n=8)",
         lambda kern: bench_descent(kern, 1.5, int(512 * scale))),
        ("lq descent q=3.0 (512 x 32, n=8)",
         lambda kern: bench_descent(kern, 3.0, int(512 * scale))),
    ]

    print(f"{'workload':<38} {'numpy':>10} {'cython':>10} {'speedup':>9}")
    for name, make in workloads:
        t_py = timeit(make(pk))
        if ck is not None:
            t_cy = timeit(make(ck))
            print(f"{name:<38} {t_py * 1e3:>8.1f}ms {t_cy * 1e3:>8.1f}ms "
                  f"{t_py / t_cy:>8.1f}x")
        else:
            print(f"{name:<38} {t_py * 1e3:>8.1f}ms {'n/a':>10} {'':>9}")
    if ck is None:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
