"""Timing comparison of the compiled and pure-numpy kernel paths.

Runs each hot kernel through the numba-compiled implementation (when
available) and the pure-python/numpy fallback, checks the two paths
agree, and prints a timing table.  Force the fallback package-wide with
HEATCHERN_PURE_NUMPY=1.

Usage: python3 benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from heatchern import _kernels


def timeit(fn, args, repeats):
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return value, best


def cases():
    nodes, weights = np.polynomial.hermite.hermgauss(24)
    scales = np.array([0.7, 1.1, 0.9, 1.3])
    A = np.array([[1.0, 0.1, 0.0, 0.0],
                  [0.1, 1.2, 0.1, 0.0],
                  [0.0, 0.1, 0.9, 0.1],
                  [0.0, 0.0, 0.1, 1.1]])
    yield ("gauss-hermite b=4", _kernels._gh_sum_numpy,
           getattr(_kernels, "_gh_sum_numba", None),
           (nodes, weights, scales, A))
    yield ("torus supertrace", _kernels._torus_sum_impl,
           _kernels.torus_supertrace if _kernels.USE_NUMBA else None,
           (120, 0.3, 0.4, False, 0.01))
    yield ("sphere supertrace", _kernels._sphere_sum_impl,
           _kernels.sphere_supertrace if _kernels.USE_NUMBA else None,
           (5000, 0.7, 1e-4))


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    print(f"numba path available: {_kernels.USE_NUMBA}")
    print(f"{'kernel':<22} {'pure (s)':>10} {'numba (s)':>10} {'speedup':>8}")
    for name, pure, compiled, args in cases():
        val_p, t_pure = timeit(pure, args, repeats)
        if compiled is None:
            print(f"{name:<22} {t_pure:>10.4f} {'n/a':>10} {'n/a':>8}")
            continue
        compiled(*args)  # warm up the JIT outside the timed region
        val_c, t_comp = timeit(compiled, args, repeats)
        assert abs(val_p - val_c) < 1e-9 * max(1.0, abs(val_p)), name
        print(f"{name:<22} {t_pure:>10.4f} {t_comp:>10.4f} "
              f"{t_pure / t_comp:>7.1f}x")


if __name__ == "__main__":
    main()
