#!/usr/bin/env python3
"""Benchmark the sign/subset enumeration kernels: compiled extension vs
pure-NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times ``max_signed_opnorm`` and ``max_subset_extreme`` on zero-sum
Hermitian families over a (d, m) grid and prints one table per kernel
with the speedup of the compiled extension.  Runs fallback-only (with a
note) when the extension is not built.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qpmetrics import _enum_fallback

try:
    from qpmetrics import _enum_kernels
except ImportError:
    _enum_kernels = None

GRID = [(2, 8), (2, 12), (4, 8), (4, 12), (6, 10), (8, 12)]


def _family(d: int, m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, d, d)) + 1j * rng.standard_normal((m, d, d))
    H = (A + np.conj(np.swapaxes(A, -1, -2))) / 2.0
    H -= H.mean(axis=0, keepdims=True)
    return np.ascontiguousarray(H)


def _time(fn, diffs: np.ndarray, repeat: int) -> tuple[float, float]:
    fn(diffs)  # warm up
    best = float("inf")
    value = None
    for _ in range(repeat):
        start = time.perf_counter()
        value = fn(diffs)
        best = min(best, time.perf_counter() - start)
    return best, float(value if not isinstance(value, tuple) else value[0])


def bench(kernel_name: str, repeat: int) -> None:
    print(f"\n{kernel_name}")
    header = f"{'d':>3} {'m':>3} {'python (ms)':>12}"
    if _enum_kernels is not None:
        header += f" {'cython (ms)':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for d, m in GRID:
        diffs = _family(d, m, seed=d * 100 + m)
        py_fn = getattr(_enum_fallback, kernel_name)
        py_t, py_v = _time(py_fn, diffs, repeat)
        row = f"{d:>3} {m:>3} {py_t * 1e3:>12.3f}"
        if _enum_kernels is not None:
            cy_fn = getattr(_enum_kernels, kernel_name)
            cy_t, cy_v = _time(cy_fn, diffs, repeat)
            if abs(py_v - cy_v) > 1e-9:
                raise AssertionError(
                    f"backend mismatch at d={d}, m={m}: {py_v} vs {cy_v}"
                )
            row += f" {cy_t * 1e3:>12.3f} {py_t / cy_t:>7.1f}x"
        print(row)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions")
    args = parser.parse_args()
    if _enum_kernels is None:
        print("note: compiled extension not available; timing the fallback only")
    for kernel in ("max_signed_opnorm", "max_subset_extreme"):
        bench(kernel, args.repeat)


if __name__ == "__main__":
    main()
