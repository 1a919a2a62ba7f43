"""Compare the compiled and pure-Python kernels on the two hot loops.

Usage: python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from cifs import _kernels
from cifs.setops.hausdorff import Grid


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def orbit_case(T, d, seed=0):
    rng = np.random.default_rng(seed)
    M = 40
    ratios = rng.uniform(-0.9, 0.9, M)
    shifts = np.ascontiguousarray(rng.normal(size=(M, d)))
    idx = np.ascontiguousarray(rng.integers(0, M, T), dtype=np.int64)
    x0 = np.ascontiguousarray(shifts[0] / (1 - ratios[0]))
    return lambda kern: kern.chaos_orbit(ratios, shifts, idx, x0, 1000)


def hausdorff_case(n, d, seed=1):
    rng = np.random.default_rng(seed)
    a = rng.random((n, d))
    grid = Grid.build(rng.random((n, d)))
    return lambda kern: grid.min_sq(a, kern)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    scale = 10 if args.quick else 1
    cases = [
        ("chaos orbit d=1", orbit_case(10**6 // scale, 1)),
        ("chaos orbit d=2", orbit_case(2 * 10**5 // scale, 2)),
        ("grid min-sq d=1", hausdorff_case(10**6 // scale, 1)),
        ("grid min-sq d=2", hausdorff_case(2 * 10**5 // scale, 2)),
    ]
    if _kernels.compiled is None:
        print("compiled kernels not built; timing the Python backend only")
    print(f"{'case':18s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}  identical")
    for name, case in cases:
        tp, out_p = best_of(lambda: case(_kernels.python), args.repeats)
        if _kernels.compiled is None:
            print(f"{name:18s} {tp:11.3f} {'-':>11s} {'-':>8s}  -")
            continue
        tc, out_c = best_of(lambda: case(_kernels.compiled), args.repeats)
        print(f"{name:18s} {tp:11.3f} {tc:11.4f} {tp / tc:7.1f}x  {np.array_equal(out_p, out_c)}")


if __name__ == "__main__":
    main()
