#!/usr/bin/env python3
"""Benchmark the numba and pure-numpy transfer-matrix kernels.

Times batched spectrum evaluation (N stacks x 401 wavelengths) through both
backends and reports the speedup.  The numba path is what the package picks
by default when numba is importable; setting TANDEMFILM_NO_NUMBA=1 routes all
spectrum evaluation through the numpy path benchmarked here.

Usage: python benchmarks/bench_tmm.py [--stacks 500] [--layers 20] [--repeats 3]
"""

import argparse
import time

import numpy as np

from tandemfilm import _tmm_numba, _tmm_numpy, tmm
from tandemfilm.materials import builtin_materials
from tandemfilm.rng import CounterStream


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--stacks", type=int, default=500)
    parser.add_argument("--layers", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    stream = CounterStream(0, 0)
    d = (30 + stream.integers(41, (args.stacks, args.layers))).astype(float)
    kernel_args = tmm._grid_arrays(
        tmm.alternating_materials(args.layers),
        "Air",
        "Air",
        0.0,
        builtin_materials(),
        tmm.WAVELENGTHS_NM,
    )

    _tmm_numba.batch_spectrum_rt(d[:2], *kernel_args)  # compile outside the timer
    t_numba = bench(_tmm_numba.batch_spectrum_rt, (d, *kernel_args), args.repeats)
    t_numpy = bench(_tmm_numpy.batch_spectrum_rt, (d, *kernel_args), args.repeats)

    T_a, _ = _tmm_numba.batch_spectrum_rt(d, *kernel_args)
    T_b, _ = _tmm_numpy.batch_spectrum_rt(d, *kernel_args)
    print(f"stacks={args.stacks} layers={args.layers} grid={tmm.N_POINTS}")
    print(f"numba : {t_numba:.3f} s  ({args.stacks / t_numba:,.0f} spectra/s)")
    print(f"numpy : {t_numpy:.3f} s  ({args.stacks / t_numpy:,.0f} spectra/s)")
    print(f"speedup: {t_numpy / t_numba:.1f}x   max|diff|: {np.abs(T_a - T_b).max():.2e}")


if __name__ == "__main__":
    main()
