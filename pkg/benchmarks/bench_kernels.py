"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 3]

Each kernel runs on the same inputs with both backends; the table lists the
best wall time of ``--repeat`` runs, the speedup, and whether the outputs are
bit-identical.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from limitlab import kernels
from limitlab.fatou import GridSpec
from limitlab.poly import ComplexPolynomial, solve_many


def best_of(fn, repeat: int):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(size: int):
    p = ComplexPolynomial.from_string("0.1,0,1")
    z = GridSpec.square(p.escape_radius(), size).points().ravel()
    yield ("poly_classify (z^2+0.1)", lambda b: kernels.poly_classify(
        p.array, z, p.escape_radius(), 256, [0.1127016653792583], backend=b))
    basilica = ComplexPolynomial.from_string("-1,0,1")
    yield ("poly_classify (z^2-1)", lambda b: kernels.poly_classify(
        basilica.array, z, basilica.escape_radius(), 256, [0j, -1 + 0j], backend=b))
    xs = GridSpec.square(2.0, size).points().ravel()
    fixed = [(0.10592363464399475, 0.10592363464399475)]
    yield ("henon_classify (a=0.05)", lambda b: kernels.henon_classify(
        p.array, 0.05, xs, 0.10592363464399475, 2 * (1.05 + 1.0), 300, fixed, 1e-6, backend=b))
    rng = np.random.default_rng(0)
    pts = rng.normal(size=size * 16) + 1j * rng.normal(size=size * 16)
    roots = solve_many(ComplexPolynomial.from_string("0,0,0,0,0,1").array, pts)
    yield ("track_nearest (deg 5)", lambda b: kernels.track_nearest(roots, roots[0, 0],
                                                                      backend=b))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--size", type=int, default=256, help="grid side length")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernels.backend_module("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    print(f"{'kernel':28s} {'cython [s]':>11s} {'python [s]':>11s} {'speedup':>8s}  identical")
    for name, run in cases(args.size):
        tc, oc = best_of(lambda: run("cython"), args.repeat)
        tp, op = best_of(lambda: run("python"), args.repeat)
        same = all(np.array_equal(a, b) for a, b in zip(oc, op))
        print(f"{name:28s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f}  {same}")


if __name__ == "__main__":
    main()
