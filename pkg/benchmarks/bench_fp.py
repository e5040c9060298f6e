"""Compare the compiled and pure-Python enumeration kernels.

Two modes are timed: listing every vector up to a bound (dominated by
building Python tuples) and the exact-target search used by fincke_pohst
(dominated by the tree walk, where the compiled kernel pays off).

Run: python3 benchmarks/bench_fp.py
"""

from __future__ import annotations

import random
import time

from evilforge import _enum
from evilforge.exactlin import lll_gram
from evilforge.polarize import pol_lattices, product_polarization
from evilforge.quatalg import make_Bp
from evilforge.realquad import field
from evilforge.ssembed import lambda_R


def _random_gram(n: int, seed: int):
    rng = random.Random(seed)
    a = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    return [[2 * sum(a[k][i] * a[k][j] for k in range(n)) + (4 if i == j else 0) for j in range(n)] for i in range(n)]


def cases():
    yield "Lambda_R p=3 d=5 (rank 6)", lambda_R(field(5), make_Bp(3)[1]).trace_lattice.gram, 120, 1600
    yield "Lambda_R p=7 d=13 (rank 6)", lambda_R(field(13), make_Bp(7)[1]).trace_lattice.gram, 200, 2400
    O = make_Bp(2)[1]
    yield "Lambda(lambda_0) p=2 (rank 5)", pol_lattices(product_polarization(O), O).Lam.gram, 120, 400
    yield "random rank 8", _random_gram(8, 1), 60, 240


def _time(fn, reps=3):
    best = float("inf")
    out = None
    for _ in range(reps):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main() -> None:
    compiled = _enum.BACKEND == "cython"
    print(f"compiled kernel available: {compiled}")
    print(f"{'case':34s} {'mode':6s} {'2q':>6s} {'vectors':>9s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, gram, list_bound, exact_bound in cases():
        _, red = lll_gram(gram)
        for mode, b2, exact in (("list", list_bound, False), ("exact", exact_bound, True)):
            tp, a = _time(lambda: _enum.enumerate_short(red, b2, backend="python", exact=exact))
            if compiled:
                tc, b = _time(lambda: _enum.enumerate_short(red, b2, backend="cython", exact=exact))
                assert sorted(a) == sorted(b), name
                print(f"{name:34s} {mode:6s} {b2:6d} {len(a):9d} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}")
            else:
                print(f"{name:34s} {mode:6s} {b2:6d} {len(a):9d} {tp:10.4f} {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
