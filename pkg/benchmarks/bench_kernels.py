"""Timing comparison of the compiled and pure-numpy kernel implementations.

Runs every hot kernel with both backends (the jitted table compiled through
numba and the vectorized numpy fallbacks that NLEVO_DISABLE_NUMBA=1
selects), printing best-of-N wall times and the speedup.  Each elementwise
kernel is timed in two regimes: "small" arrays the size of a typical
quadrature grid, looped many times so per-call overhead shows up, and one
"large" throughput-bound array.  Compilation happens during an untimed
warm-up call, so the table reflects steady-state cost only.

Usage:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from nlevo import kernels


def _workloads(rng):
    small, large = 129, 1_000_000       # 129 = quadrature grid for n = 32
    poly = np.array([0.3, -1.0, 0.0, 2.0])
    out = {}
    for tag, size, loops in (("small", small, 2000), ("large", large, 1)):
        x = rng.uniform(-2.0, 2.0, size=size)
        grads = rng.normal(size=size)
        w = rng.uniform(0.5, 1.5, size=size)
        vec = rng.normal(size=(3, size))
        out["eval_tagged/%s" % tag] = (
            "eval_tagged", (kernels.KIND_POLY, poly, 0.0, x), loops)
        out["plaplace_flux/%s" % tag] = (
            "plaplace_flux", (grads, 4.0, 1e-12), loops)
        out["weighted_abs_pow_sum/%s" % tag] = (
            "weighted_abs_pow_sum", (w, grads, 4.0), loops)
        out["weighted_vec_pow_sum/%s" % tag] = (
            "weighted_vec_pow_sum", (w, vec, 2.0), loops)
    diag = -rng.uniform(1.0, 50.0, size=64)
    out["midpoint_diag_sweep"] = (
        "midpoint_diag_sweep",
        (diag, rng.normal(size=64), rng.normal(size=64), 1e-4, 10_000), 1)
    return out


def _best_of(fn, args, loops, repeats):
    fn(*args)  # warm-up: triggers JIT compilation outside the timed region
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per workload (best is kept)")
    cli = parser.parse_args()

    workloads = _workloads(np.random.default_rng(0))
    print("workload                        numpy [ms]   numba [ms]  speedup")
    print("-" * 66)
    for label, (name, args, loops) in workloads.items():
        t_np = _best_of(kernels.NUMPY_IMPLS[name], args, loops, cli.repeats)
        if not kernels.HAS_NUMBA:
            print("%-30s %10.3f %12s %8s" % (label, 1e3 * t_np, "-", "-"))
            continue
        t_nb = _best_of(kernels.NUMBA_IMPLS[name], args, loops, cli.repeats)
        ref = np.asarray(kernels.NUMPY_IMPLS[name](*args))
        got = np.asarray(kernels.NUMBA_IMPLS[name](*args))
        agree = np.allclose(ref, got, rtol=1e-12, atol=1e-12)
        print("%-30s %10.3f %12.3f %7.2fx%s"
              % (label, 1e3 * t_np, 1e3 * t_nb, t_np / t_nb,
                 "" if agree else "  MISMATCH"))
    if not kernels.HAS_NUMBA:
        print("\nnumba unavailable or disabled; only the fallback was timed.")


if __name__ == "__main__":
    main()
