"""Time the numba kernels against the numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Both backends
are called directly through ``kernels.BACKENDS``, so ``FRACDUAL_NUMBA`` does
not matter here.  The first numba call (compilation) is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fracdual.kernels import BACKENDS


def _best(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng: np.random.Generator):
    n_levels, nodes = 4000, 200
    levels = rng.random((n_levels + 1, nodes))
    beta = rng.random(n_levels + 1)
    yield "history_sum", (levels, n_levels, beta, 0.3)

    c = 1.0 / (1.0 + np.arange(801.0)) ** 2
    yield "lattice_matrix", (c, 400)

    K = 400
    ext = rng.random(2 * K + 1200)
    pos = np.arange(K, K + 1000, dtype=np.int64)
    yield "gather_apply", (ext, pos, c, K)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "numba" not in BACKENDS:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max |diff|':>12}")
    for name, case in cases(np.random.default_rng(0)):
        ref = BACKENDS["numpy"][name](*case)
        t_np = _best(BACKENDS["numpy"][name], case, args.repeat)
        if "numba" in BACKENDS:
            fn = BACKENDS["numba"][name]
            out = fn(*case)  # compile
            t_nb = _best(fn, case, args.repeat)
            diff = float(np.max(np.abs(out - ref)))
            print(f"{name:<16}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.2f}{diff:>12.2e}")
        else:
            print(f"{name:<16}{1e3 * t_np:>12.3f}{'-':>12}{'-':>10}{'-':>12}")


if __name__ == "__main__":
    main()
