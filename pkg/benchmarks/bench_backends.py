#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_backends.py [--reps 20000] [--n 900]

Both lanes consume identical counter-based streams, so the timed work is
the same Monte Carlo; the printed estimates should agree to ~1e-9 relative.
"""

import argparse
import time

import numpy as np

from cvstab._rng import rep_keys
from cvstab.harness import BETA_SPARSE
from cvstab.kernels import numpy_backend


def bench(name, fn, *args, warmup=True):
    if warmup:
        fn(*args)  # JIT compile / cache warm
    t0 = time.perf_counter()
    out = fn(*args)
    dt = time.perf_counter() - t0
    return dt, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=20_000)
    ap.add_argument("--reps-innercv", type=int, default=400)
    ap.add_argument("--n", type=int, default=900)
    args = ap.parse_args()

    try:
        from cvstab.kernels import numba_backend
    except ImportError:
        print("numba unavailable; nothing to compare")
        return

    beta = np.array(BETA_SPARSE)
    tau = 10.0
    n = args.n
    lam = n**0.5

    rows = []
    keys = rep_keys(1, args.reps)
    for name, fam, mode in [("sigma2 ST single", 1, 0), ("sigma2 ST comparison", 1, 1)]:
        t_nb, (c_nb, _) = bench(name, numba_backend.sigma2_batch,
                                keys, n, beta, tau, mode, fam, lam, fam, lam + 1.0, 1e-8, 10_000)
        t_np, (c_np, _) = bench(name, numpy_backend.sigma2_batch,
                                keys, n, beta, tau, mode, fam, lam, fam, lam + 1.0, 1e-8, 10_000,
                                warmup=False)
        rows.append((name, args.reps, t_nb, t_np, c_nb.mean(), c_np.mean()))

    t_nb, (g_nb, _) = bench("gamma", numba_backend.gamma_batch,
                            keys, n, beta, tau, 0, 1, lam, 1, lam, 1e-8, 10_000)
    t_np, (g_np, _) = bench("gamma", numpy_backend.gamma_batch,
                            keys, n, beta, tau, 0, 1, lam, 1, lam, 1e-8, 10_000, warmup=False)
    rows.append(("gamma ST single", args.reps, t_nb, t_np, g_nb.mean(), g_np.mean()))

    keys_cv = rep_keys(2, args.reps_innercv)
    t_nb, (ci_nb, _, _) = bench("innercv", numba_backend.sigma2_innercv_batch,
                                keys_cv, n, beta, tau, 1, 9, 0.0, 1.0, 1e-8, 10_000)
    t_np, (ci_np, _, _) = bench("innercv", numpy_backend.sigma2_innercv_batch,
                                keys_cv, n, beta, tau, 1, 9, 0.0, 1.0, 1e-8, 10_000, warmup=False)
    rows.append(("sigma2 lasso inner-CV comparison", args.reps_innercv, t_nb, t_np,
                 ci_nb.mean(), ci_np.mean()))

    print(f"\nn={n}, per-kernel replication counts as shown\n")
    print(f"{'kernel':<36} {'reps':>7} {'numba':>9} {'numpy':>9} {'speedup':>8}  agreement")
    for name, reps, t_nb, t_np, m_nb, m_np in rows:
        rel = abs(m_nb - m_np) / (abs(m_np) + 1e-300)
        print(f"{name:<36} {reps:>7} {t_nb:>8.3f}s {t_np:>8.3f}s {t_np / t_nb:>7.1f}x  "
              f"rel diff {rel:.2e}")


if __name__ == "__main__":
    main()
