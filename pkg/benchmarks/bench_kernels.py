"""Time each compiled kernel against its numpy fallback on identical inputs.

Usage: python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from bracketsums import _accel, make_context
from bracketsums.equidist_heis import (
    _cell_counts_numba,
    _cell_counts_numpy,
    _obstruction_numba,
    _obstruction_numpy,
)
from bracketsums.ergodic import Signal, osc_tables
from bracketsums.expsum import PhaseSpec, segment_sums
from bracketsums.factors import _chirp_rows_numba, _chirp_rows_numpy, _roots


def best_time(fn, repeat):
    fn()  # compile and warm caches
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(ctx):
    n = 10 ** 7
    starts = np.arange(1, n + 1, 1 << 16, dtype=np.int64)
    stops = np.minimum(starts + (1 << 16), n + 1)
    xi = PhaseSpec.from_real(0.37)
    w = _roots(512)
    sig = Signal(0, np.random.default_rng(0).choice([-1.0, 1.0], 1 << 10))
    return {
        "exp_sum, N = 1e7": (
            lambda: segment_sums(starts, stops, xi, ctx, backend="numba"),
            lambda: segment_sums(starts, stops, xi, ctx, backend="numpy")),
        "cell counts, |I| = 2^22, q=3, D=8": (
            lambda: _cell_counts_numba(1, 1 << 22, 3, 8, ctx.disc, ctx.k2),
            lambda: _cell_counts_numpy(1, 1 << 22, 3, 8, ctx.disc, ctx.k2)),
        "Gauss chirp rows, M = 512": (
            lambda: _chirp_rows_numba(7, 2, 512, 256, w.real.copy(), w.imag.copy()),
            lambda: _chirp_rows_numpy(7, 2, 512, 256, w.real.copy(), w.imag.copy())),
        "oscillation tables, window 2^10, n <= 12": (
            lambda: osc_tables(sig, 2.0, 12, ctx, backend="numba"),
            lambda: osc_tables(sig, 2.0, 12, ctx, backend="numpy")),
        "obstruction search, L = 64": (
            lambda: _obstruction_numba(0.2345, ctx.sqrtk, 65536.0, 64, 16.0, 1e-9),
            lambda: _obstruction_numpy(0.2345, ctx.sqrtk, 65536.0, 64, 16.0, 1e-9)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not _accel.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    ctx = make_context(2)
    print(f"{'kernel':44s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, (fast, slow) in cases(ctx).items():
        a, b = best_time(fast, args.repeat), best_time(slow, args.repeat)
        print(f"{name:44s} {a:10.4f} {b:10.4f} {b / a:8.1f}x")


if __name__ == "__main__":
    main()
