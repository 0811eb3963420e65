#!/usr/bin/env python3
"""Benchmark the compiled DTW kernel against the pure-Python fallback.

Two workloads:
* "contour batch" - many short word-level contours (the shape the batch
  pipeline actually runs: lengths 6-13, hundreds of thousands of calls);
* "long series"   - a single long pair, to show the O(n*m) scaling gap.

Run: python benchmarks/bench_dtw.py
"""

import time

import numpy as np

from f0entrain.kernels import _core_py

try:
    from f0entrain.kernels import _core
except ImportError:
    _core = None


def bench_batch(fn, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        acc = 0.0
        for a, b in pairs:
            acc += fn(a, b)
        best = min(best, time.perf_counter() - t0)
    return best, acc


def main():
    rng = np.random.default_rng(0)

    n_pairs = 20000
    short = [
        (
            rng.uniform(80, 320, size=rng.integers(6, 14)),
            rng.uniform(80, 320, size=rng.integers(6, 14)),
        )
        for _ in range(n_pairs)
    ]
    short_lists = [(a.tolist(), b.tolist()) for a, b in short]

    long_a = rng.uniform(80, 320, size=1500)
    long_b = rng.uniform(80, 320, size=1500)

    print(f"{'workload':<28}{'kernel':<10}{'time':>10}{'per call':>14}")
    rows = []

    t_py, acc_py = bench_batch(_core_py.dtw_distance, short_lists)
    rows.append(("contour batch (20k pairs)", "python", t_py, t_py / n_pairs, acc_py))
    if _core is not None:
        t_c, acc_c = bench_batch(_core.dtw_distance, short)
        rows.append(("contour batch (20k pairs)", "cython", t_c, t_c / n_pairs, acc_c))
        assert abs(acc_c - acc_py) < 1e-6 * max(1.0, abs(acc_py))

    t_py_long, ref = bench_batch(_core_py.dtw_distance, [(long_a.tolist(), long_b.tolist())])
    rows.append(("long series (1500x1500)", "python", t_py_long, t_py_long, ref))
    if _core is not None:
        t_c_long, got = bench_batch(_core.dtw_distance, [(long_a, long_b)])
        rows.append(("long series (1500x1500)", "cython", t_c_long, t_c_long, got))
        assert abs(got - ref) < 1e-6 * abs(ref)

    for name, kernel, total, per_call, _ in rows:
        print(f"{name:<28}{kernel:<10}{total:>9.3f}s{per_call * 1e6:>11.2f} us")

    if _core is None:
        print("\ncompiled kernel not available; showing the fallback only")
    else:
        print(f"\nspeedup, contour batch: {t_py / t_c:.1f}x")
        print(f"speedup, long series:   {t_py_long / t_c_long:.1f}x")


if __name__ == "__main__":
    main()
