"""Time the compiled eigensolver kernels against their plain numpy sources.

Run with ``python benchmarks/bench_kernels.py [--sizes 4 8 16 32] [--repeat 20]``.
The first compiled call is excluded from timing.
"""

import argparse
import time

import numpy as np

from sympsens import kernels
from sympsens._jit import NUMBA_ENABLED


def _random_hermitian(k, rng):
    x = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    h = x + x.conj().T
    return np.ascontiguousarray(h.real), np.ascontiguousarray(h.imag)


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    if not NUMBA_ENABLED:
        print("numba disabled: both columns run the numpy source")
    rng = np.random.default_rng(0)
    hr, hi = _random_hermitian(2, rng)
    kernels.hermitian_eigh(hr, hi, accelerated=True)  # compile

    print(f"{'size':>5} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9} {'LAPACK [ms]':>12}")
    for k in args.sizes:
        hr, hi = _random_hermitian(k, rng)
        h = hr + 1j * hi
        t_py = _best_of(lambda: kernels.hermitian_eigh(hr, hi, accelerated=False), max(1, args.repeat // 4))
        t_jit = _best_of(lambda: kernels.hermitian_eigh(hr, hi, accelerated=True), args.repeat)
        t_lapack = _best_of(lambda: np.linalg.eigh(h), args.repeat)
        print(f"{k:5d} {1e3 * t_py:12.3f} {1e3 * t_jit:12.3f} {t_py / t_jit:9.1f} {1e3 * t_lapack:12.3f}")


if __name__ == "__main__":
    main()
