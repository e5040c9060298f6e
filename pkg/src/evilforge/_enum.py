"""Short-vector enumeration kernel with a compiled fast path.

The enumeration is integer-only: with leading minors ``D[k]`` and the
bordered minors ``N[i][j] = det G[0..i, (0..i-1, j)]`` the scaled tail
sums ``V[i] = D[i] * x[i:]^T S_i x[i:]`` (``S_i`` the Schur complement) are
integers and satisfy

    D[i+1] * V[i] = D[i] * V[i+1] + (D[i+1] x[i] + c[i])^2,
    c[i] = sum_{j>i} N[i][j] x[j].

In exact mode the innermost coordinate is solved from
``(D[1] x[0] + c[0])^2 = D[1] * B - V[1]`` so only vectors of value B are produced.

Set ``EVILFORGE_KERNEL=python`` to force the pure-Python kernel.
"""

from __future__ import annotations

import os
from math import isqrt

_LIMIT = 1 << 62

try:
    if os.environ.get("EVILFORGE_KERNEL", "").lower() == "python":
        raise ImportError("compiled kernel disabled by EVILFORGE_KERNEL")
    from . import _fpcore  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _fpcore = None

BACKEND = "cython" if _fpcore is not None else "python"


def _bareiss_det(m):
    n = len(m)
    if n == 0:
        return 1
    a = [list(r) for r in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def minors(gram):
    """Return (D, N): leading minors and bordered minors of an integer Gram."""
    n = len(gram)
    d = [1] + [_bareiss_det([r[:k] for r in gram[:k]]) for k in range(1, n + 1)]
    nmat = [[0] * n for _ in range(n)]
    for i in range(n):
        rows = gram[: i + 1]
        for j in range(i, n):
            cols = list(range(i)) + [j]
            nmat[i][j] = _bareiss_det([[r[c] for c in cols] for r in rows])
    return d, nmat


def enumerate_python(gram, bound2, d=None, nmat=None, exact=False):
    """(x, x^T G x) for every integer x with x^T G x <= bound2 (== bound2 if exact)."""
    n = len(gram)
    if d is None:
        d, nmat = minors(gram)
    x = [0] * n
    out = []

    def rec(i, vnext):
        di, dn = d[i], d[i + 1]
        c = 0
        row = nmat[i]
        for j in range(i + 1, n):
            if x[j]:
                c += row[j] * x[j]
        rr = di * (dn * bound2 - vnext)
        if rr < 0:
            return
        r = isqrt(rr)
        if exact and i == 0:
            if r * r != rr:
                return
            for t in sorted({-r, r}):
                if (t - c) % dn == 0:
                    x[0] = (t - c) // dn
                    out.append((tuple(x), bound2))
            x[0] = 0
            return
        lo = -((r + c) // dn)
        hi = (r - c) // dn
        base = di * vnext
        for xi in range(lo, hi + 1):
            x[i] = xi
            t = dn * xi + c
            vi = (base + t * t) // dn
            if i == 0:
                out.append((tuple(x), vi))
            else:
                rec(i - 1, vi)
        x[i] = 0

    if n == 0:
        return [((), 0)]
    rec(n - 1, 0)
    return out


def compiled_fits(gram, bound2, d, nmat) -> bool:
    """True when every intermediate quantity fits the compiled kernel's 128-bit arithmetic."""
    n = len(gram)
    if bound2 >= _LIMIT or any(abs(v) >= _LIMIT for v in d):
        return False
    if any(abs(v) >= _LIMIT for row in nmat for v in row):
        return False
    for i in range(n):
        if d[i] * d[i + 1] * bound2 >= (1 << 100):
            return False
    # coordinate bounds from the adjugate diagonal
    dn = d[n]
    xmax = []
    for j in range(n):
        sub = [[gram[r][c] for c in range(n) if c != j] for r in range(n) if r != j]
        xmax.append(isqrt(bound2 * _bareiss_det(sub) // dn) + 1)
    for i in range(n):
        s = sum(abs(nmat[i][j]) * xmax[j] for j in range(i + 1, n))
        if s >= (1 << 60):
            return False
    return True


def enumerate_short(gram, bound2, backend=None, exact=False):
    """Dispatch to the compiled kernel when available and safe, else Python."""
    gram = [[int(v) for v in r] for r in gram]
    d, nmat = minors(gram)
    use = backend or BACKEND
    if use == "cython" and _fpcore is not None and len(gram) > 0 and compiled_fits(gram, bound2, d, nmat):
        return _fpcore.enumerate_short(len(gram), d, nmat, bound2, exact)
    if use == "cython" and backend == "cython" and _fpcore is None:
        raise RuntimeError("compiled kernel not built")
    return enumerate_python(gram, bound2, d, nmat, exact)
