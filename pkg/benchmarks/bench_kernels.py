"""Compare the jit-compiled kernels against their numpy fallbacks.

Runs each evaluation kernel over random abscissae and the tridiagonal
solver over diagonally dominant random systems, checks that both paths
produce bit-identical output, then reports per-element timings.

Usage:
    python benchmarks/bench_kernels.py [--n-evals 1000000] [--repetitions 7]

With POLYLIN_NO_NUMBA=1 only the fallback path exists, so the script
times it alone; run without the flag to get the comparison table.
"""

import argparse
import time

import numpy as np

from polylin import _kernels
from polylin.functions import gaussian
from polylin.fit import interpolant
from polylin.partition import optimized_partition, uniform_partition

SEGMENT_COUNTS = (31, 127, 511)
SOLVER_SIZES = (512, 100_000)


def best_of(fn, repetitions):
    fn()  # warm-up; also triggers jit compilation
    best = float("inf")
    for _ in range(repetitions):
        t0 = time.perf_counter_ns()
        fn()
        t1 = time.perf_counter_ns()
        best = min(best, t1 - t0)
    return best


def bench_pair(label, size, fast, slow, n_ops, repetitions):
    out_fast = fast()
    out_slow = slow()
    if not np.array_equal(out_fast, out_slow):
        raise SystemExit(f"{label} size {size}: paths disagree")
    t_fast = best_of(fast, repetitions) / n_ops
    t_slow = best_of(slow, repetitions) / n_ops
    print(
        f"{label:14s} {size:>7d} {t_fast:12.2f} {t_slow:12.2f} "
        f"{t_slow / t_fast:8.1f}x"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-evals", type=int, default=1_000_000)
    parser.add_argument("--repetitions", type=int, default=7)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    backend = _kernels.backend()
    print(f"backend: {backend}")
    if backend != "numba":
        print("jit path unavailable; timing the numpy fallback alone")
    print()
    print(f"{'kernel':14s} {'size':>7s} {'fast ns/op':>12s} {'numpy ns/op':>12s} {'ratio':>9s}")

    rng = np.random.default_rng(args.seed)
    f = gaussian()
    xs = rng.uniform(0.0, 4.0, args.n_evals)

    for n in SEGMENT_COUNTS:
        g = interpolant(f, uniform_partition(0.0, 4.0, n))
        x0, xn = g.partition.knots[0], g.partition.knots[-1]
        v = g.ordinates
        bench_pair(
            "uniform eval",
            n,
            lambda: _kernels.eval_uniform(x0, xn, v, xs),
            lambda: _kernels.eval_uniform_py(x0, xn, v, xs),
            args.n_evals,
            args.repetitions,
        )

    for n in SEGMENT_COUNTS:
        g = interpolant(f, optimized_partition(f, 0.0, 4.0, n))
        knots = g.partition.knots
        v = g.ordinates
        bench_pair(
            "sorted eval",
            n,
            lambda: _kernels.eval_sorted(knots, v, xs),
            lambda: _kernels.eval_sorted_py(knots, v, xs),
            args.n_evals,
            args.repetitions,
        )

    for size in SOLVER_SIZES:
        lower = rng.uniform(-1.0, 1.0, size - 1)
        upper = rng.uniform(-1.0, 1.0, size - 1)
        diag = rng.uniform(2.5, 4.0, size)
        rhs = rng.standard_normal(size)
        bench_pair(
            "tridiag solve",
            size,
            lambda: _kernels.thomas(lower, diag, upper, rhs),
            lambda: _kernels.thomas_py(lower, diag, upper, rhs),
            size,
            args.repetitions,
        )


if __name__ == "__main__":
    main()
