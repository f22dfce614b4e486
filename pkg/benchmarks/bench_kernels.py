"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times exhaustive boundary-expansion certification and closure computation
with both backends on the same seeded graphs, checks that the results agree
and prints one row per workload.
"""

import argparse
import time
from fractions import Fraction

from pigeonlab import closure as C
from pigeonlab import graph as G
from pigeonlab import kernels


def best_of(fn, repeat):
    best, out = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def workloads():
    # (label, callable taking a backend name)
    for m, n, d, r in ((12, 16, 4, 4), (20, 40, 5, 4), (24, 60, 6, 5)):
        g = G.sample_random(m, n, d, 1)
        yield (f"certify m={m} n={n} Δ={d} r={r}",
               lambda b, g=g, r=r: G.certify_boundary_expansion(g, r, Fraction(2), backend=b))
    # Cl(empty set) on m <= 16 pigeons: maximality is verified by an exhaustive augmentation search
    for m, n, d, r in ((14, 56, 8, 6), (16, 64, 8, 6)):
        g = G.sample_random(m, n, d, 3)
        yield (f"closure m={m} n={n} Δ={d} r={r}",
               lambda b, g=g, r=r: C.closure(g, set(), r, Fraction(2), backend=b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not kernels.HAVE_COMPILED:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'workload':34s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}  agree")
    for label, fn in workloads():
        tp, rp = best_of(lambda: fn("python"), args.repeat)
        tc, rc = best_of(lambda: fn("cython"), args.repeat)
        print(f"{label:34s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x  {rp == rc}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
