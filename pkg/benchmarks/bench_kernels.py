"""Timing comparison of the numba kernels against the numpy fallback.

Run directly:

    python3 benchmarks/bench_kernels.py [--sizes 200,800,3200] [--repeat 5]

Each kernel is timed on both backends at several problem sizes; the
numba column excludes compilation (one warm-up call per kernel).
"""
import argparse
import time

import numpy as np

from trimsim._kernels import numba_impl, numpy_impl


def _inputs(n, rng):
    x = np.sort(rng.normal(size=n))
    y = np.sort(rng.normal(size=n) + 0.3)
    cw = np.arange(1, n + 1) / n
    alpha = 0.1
    caps = np.full(n, 1.0 / ((1 - alpha) * n))
    w0 = np.full(n, 1.0 / n)
    return x, y, cw, caps, w0


def _cases(n, rng):
    x, y, cw, caps, w0 = _inputs(n, rng)
    k = max(1, n // 10)
    return {
        "w2sq_steps": lambda impl: impl.w2sq_steps(x, cw, y, cw),
        "project_capped_simplex": lambda impl: impl.project_capped_simplex(
            rng.normal(size=n), caps
        ),
        "solve_trim_step": lambda impl: impl.solve_trim_step(x, caps, y, cw, w0),
        "dp_cost_table": lambda impl: impl.dp_cost_table(x, y, k, k),
    }


def _time(fn, impl, repeat):
    fn(impl)  # warm-up / JIT
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(impl)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="200,800,3200")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"{'kernel':<24}{'n':>6}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for n in sizes:
        rng = np.random.default_rng(args.seed)
        for name, fn in _cases(n, rng).items():
            t_np = _time(fn, numpy_impl, args.repeat)
            t_nb = _time(fn, numba_impl, args.repeat)
            print(
                f"{name:<24}{n:>6}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}"
                f"{t_np / t_nb:>9.1f}x"
            )


if __name__ == "__main__":
    main()
