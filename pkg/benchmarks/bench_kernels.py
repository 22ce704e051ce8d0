"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N] [--mmax M]

Prints one TSV row per (kernel, size, backend) and, for g_rhs, the log2
slope of numba wall time against m.
"""
import argparse
import math
import time

import numpy as np

from hgm1f1 import _accel, kernels, series
from hgm1f1.pfaffian import wishart_params


def best_of(fn, repeat):
    fn()  # warm-up, also triggers compilation
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_g_rhs(m, use_numba, repeat):
    rng = np.random.default_rng(m)
    beta = np.sort(rng.uniform(0.5, 2.0, m))
    G = rng.uniform(0.1, 1.0, 2 ** m)
    p = wishart_params(m, m + 2)
    return best_of(lambda: kernels.g_rhs(1.0, G, beta, p.a, p.c, 0.3, use_numba=use_numba), repeat)


def bench_deriv_dp(K, m, use_numba, repeat):
    layout = series.state_layout(K, m)
    pw, dpw = series._power_tables(np.linspace(0.1, 0.9, m), K)
    masks = np.arange(2 ** m, dtype=np.int64)
    return best_of(lambda: kernels.deriv_dp(pw, dpw, masks, layout, use_numba=use_numba), repeat)


def bench_zonal(k, m, use_numba, repeat):
    b = series._block(k, m)
    diag = np.array([float(d) for d in b["diag"]])
    return best_of(lambda: kernels.zonal_block(b["ptr"], b["idx"], b["w"], b["rho"], b["dom"], diag,
                                               use_numba=use_numba), repeat)


def slope(ms, ts):
    return float(np.polyfit(ms, np.log2(ts), 1)[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--mmax", type=int, default=12)
    args = ap.parse_args()
    backends = [False, True] if _accel.HAVE_NUMBA else [False]
    print("kernel\tsize\tbackend\tseconds")
    g = {}
    for m in range(4, args.mmax + 1):
        for nb in backends:
            t = bench_g_rhs(m, nb, args.repeat)
            g.setdefault(nb, []).append(t)
            print(f"g_rhs\tm={m}\t{'numba' if nb else 'numpy'}\t{t:.3e}")
    for K, m in ((10, 3), (12, 5), (10, 8)):
        for nb in backends:
            print(f"deriv_dp\tK={K},m={m}\t{'numba' if nb else 'numpy'}\t{bench_deriv_dp(K, m, nb, args.repeat):.3e}")
    for k, m in ((12, 12), (20, 6)):
        for nb in backends:
            print(f"zonal\tk={k},m={m}\t{'numba' if nb else 'numpy'}\t{bench_zonal(k, m, nb, args.repeat):.3e}")
    ms = list(range(4, args.mmax + 1))
    for nb, ts in g.items():
        print(f"# g_rhs log2 slope vs m ({'numba' if nb else 'numpy'}): {slope(ms, ts):.3f}")


if __name__ == "__main__":
    main()
