"""Benchmark the numba kernels against the pure-numpy fallback.

Runs both implementations of ``interp_uniform`` (batched curve lookup) and
``knn_search`` (the LOF hot loop) on realistic sizes and prints a timing
table.  Usage::

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from windcurve._kernels import numpy_impl

try:
    from windcurve._kernels import numba_impl
except ImportError:  # numba not installed; benchmark the fallback only
    numba_impl = None


def timeit(fn, *args, repeats: int = 5):
    fn(*args)  # warm-up (includes JIT compilation for the numba path)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    rng = np.random.default_rng(0)

    # one year of 15-min queries against a 0.1 m/s grid up to 35 m/s
    grid = np.clip(np.cumsum(rng.uniform(0, 2, 351)), 0, None)
    values = np.clip(grid / grid.max(), 0, 1)
    queries = rng.uniform(-2, 40, 35_040)

    # LOF-sized kNN: one year of (wind, power) training points
    train = rng.normal(size=(20_000, 2))
    query = rng.normal(size=(4_000, 2))

    cases = [
        ("interp_uniform (35k queries)",
         lambda impl: timeit(impl.interp_uniform, 0.0, 0.1, values, queries)),
        ("knn_search (20k train, 4k query, k=20)",
         lambda impl: timeit(impl.knn_search, train, query, 20)),
    ]

    print(f"{'kernel':42s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, run in cases:
        t_np = run(numpy_impl)
        if numba_impl is not None:
            t_nb = run(numba_impl)
            print(f"{name:42s} {t_np*1e3:9.2f}ms {t_nb*1e3:9.2f}ms "
                  f"{t_np/t_nb:7.1f}x")
        else:
            print(f"{name:42s} {t_np*1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
