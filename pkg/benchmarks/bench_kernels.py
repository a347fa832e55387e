"""Benchmark the compiled Monte Carlo kernel against the pure-Python
fallback and confirm they produce bit-identical results.

Usage: python benchmarks/bench_kernels.py [n_steps]
"""

import sys
import time

import numpy as np

from supcbi._kernels import get_backend


def run(kern, n_steps):
    bg = np.random.PCG64(np.random.SeedSequence([1234, 0]))
    t0 = time.perf_counter()
    out = kern.run_supcbi(
        bg,
        1.16e-2,          # A
        2.04e-2,          # B
        1.76e-2,          # b
        0.456,            # alpha
        6.76e-2 / 0.7,    # eta
        2.04,             # beta
        0.06,             # xmin
        2.4,              # y0
        0.01,             # dt (hours)
        n_steps,
        0,                # burn-in
        100,              # hourly stride
        0,                # dump stride
        np.array([20.0]),
        2.48,             # shift
    )
    return time.perf_counter() - t0, out


def main():
    n_steps = int(sys.argv[1]) if len(sys.argv) > 1 else 500_000
    compiled = get_backend("compiled")
    python = get_backend("python")
    if compiled is python:
        print("compiled kernel unavailable; benchmarking python backend only")
    t_py, out_py = run(python, n_steps)
    print(f"python  : {t_py:8.3f} s  ({1e9 * t_py / n_steps:8.1f} ns/step)")
    if compiled is not python:
        t_c, out_c = run(compiled, n_steps)
        print(f"compiled: {t_c:8.3f} s  ({1e9 * t_c / n_steps:8.1f} ns/step)")
        print(f"speedup : {t_py / t_c:8.1f}x")
        same = out_py[:5] == out_c[:5] and np.array_equal(out_py[5], out_c[5])
        print(f"bit-identical moments and hourly samples: {same}")


if __name__ == "__main__":
    main()
