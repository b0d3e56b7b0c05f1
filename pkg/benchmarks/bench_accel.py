"""Timing comparison of the numba inner loops against the numpy references.

Usage: python3 benchmarks/bench_accel.py [n_nodes] [repeats]

Both paths are imported side by side (independent of STEADYPOP_NO_NUMBA), the
numba kernels are warmed once to exclude compilation, and results are checked
to agree before any timing is reported.
"""

import sys
import time

import numpy as np

from steadypop import _accel


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 100_001
    repeats = int(sys.argv[2]) if len(sys.argv) > 2 else 50

    rng = np.random.default_rng(0)
    x = np.linspace(0.0, 40.0, n)
    f = rng.uniform(0.0, 3.0, size=n)
    g = 0.5 + rng.random(n)
    w = np.gradient(x)

    if not _accel.NUMBA_ENABLED:
        print("numba path unavailable (or disabled via STEADYPOP_NO_NUMBA); "
              "nothing to compare")
        return

    cases = [
        ("cumtrapz", _accel._cumtrapz_np, _accel._cumtrapz_nb, (x, f)),
        ("revcumtrapz", _accel._revcumtrapz_np, _accel._revcumtrapz_nb, (x, f)),
        ("weighted_sum", _accel._weighted_sum_np, _accel._weighted_sum_nb, (w, f)),
        ("survival", _accel._survival_from_rates_np, _accel._survival_from_rates_nb,
         (x, g, f / g)),
    ]

    print("n = %d, repeats = %d (best-of timing)" % (n, repeats))
    print("%-14s %12s %12s %8s" % ("kernel", "numpy [us]", "numba [us]", "speedup"))
    for name, np_fn, nb_fn, args in cases:
        a, b = np_fn(*args), nb_fn(*args)  # warm-up + agreement check
        assert np.allclose(a, b, rtol=1e-12), name
        t_np = bench(np_fn, args, repeats)
        t_nb = bench(nb_fn, args, repeats)
        print("%-14s %12.1f %12.1f %7.2fx" % (name, t_np * 1e6, t_nb * 1e6, t_np / t_nb))


if __name__ == "__main__":
    main()
