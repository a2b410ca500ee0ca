"""Compare the compiled and numpy backends of the hot kernels.

Run with ``python benchmarks/bench_kernels.py [--m M] [--dim D] [--repeat R]``.
Prints best-of-R wall times and the max deviation between backends.
"""

import argparse
import timeit

import numpy as np

from opbvp import _pykernels

try:
    from opbvp import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def generator_samples(m, d, seed=0):
    """Smooth time-varying generator at the 2m+1 half nodes."""
    rng = np.random.default_rng(seed)
    C0, C1 = rng.normal(size=(2, d, d)) / np.sqrt(d)
    s = np.linspace(0.0, 1.0, 2 * m + 1)
    return C0 + np.sin(3 * s)[:, None, None] * C1


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    h = 1.0 / args.m
    Bh = generator_samples(args.m, args.dim)
    w = np.random.default_rng(1).normal(size=(args.m + 1, args.dim * args.dim))
    cases = [
        (f"rk4_propagate m={args.m} d={args.dim}", "rk4_propagate", (Bh, h)),
        (f"cumulative_quadrature m={args.m} q={w.shape[1]}", "cumulative_quadrature", (w, h)),
    ]
    print(f"{'kernel':<40} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8} {'max diff':>10}")
    for label, name, fargs in cases:
        py = bench(getattr(_pykernels, name), fargs, args.repeat)
        if _ckernels is None:
            print(f"{label:<40} {py:11.4f} {'n/a':>11}")
            continue
        cy = bench(getattr(_ckernels, name), fargs, args.repeat)
        diff = np.abs(getattr(_pykernels, name)(*fargs) - getattr(_ckernels, name)(*fargs)).max()
        print(f"{label:<40} {py:11.4f} {cy:11.4f} {py / cy:8.1f} {diff:10.1e}")


if __name__ == "__main__":
    main()
