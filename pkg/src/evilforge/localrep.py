"""Local representability of m by the ternary norm form at a prime of L.

Closed-form criteria for the three local situations, plus a brute-force
oracle that enumerates the norm form over residue rings O_L / q^k.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .quatalg import lambda_O, make_Bp
from .realquad import (
    FieldError,
    PrimeIdeal,
    QuadRingElem,
    RealQuadField,
    ResidueRing,
    SizeBoundError,
    in_ideal_power,
    is_square_mod_power,
    residue_symbol,
)


class LocalInputError(ValueError):
    pass


@dataclass(frozen=True)
class LocalVerdict:
    prime: PrimeIdeal
    case_tag: str  # I | IIa | IIb
    representable: bool
    detail: dict = dc_field(default_factory=dict, compare=False, hash=False)

    def token(self) -> str:
        return f"{self.case_tag}{int(self.representable)}"


def local_case_I(L: RealQuadField, q: PrimeIdeal, m: QuadRingElem, p: int) -> LocalVerdict:
    if q.p == p:
        raise LocalInputError("case I needs a prime not above p")
    if q.p != 2:
        return LocalVerdict(q, "I", True, {"reason": "non-dyadic"})
    # 4 O_q = q^(2e); look for beta with m + beta^2 in q^(2e)
    need = 2 * q.e
    ys = range(4) if L.d != 1 else range(1)
    for x in range(4):
        for y in ys:
            beta = QuadRingElem(x, y, L.d)
            if in_ideal_power(m + beta * beta, q, need):
                return LocalVerdict(q, "I", True, {"beta": (x, y)})
    return LocalVerdict(q, "I", False, {"reason": "m is not -beta^2 mod 4"})


def _require_unit(m: QuadRingElem, P: PrimeIdeal):
    if in_ideal_power(m, P, 1):
        raise LocalInputError(f"m lies in {P}: K is ramified there")


def local_case_IIa(L: RealQuadField, P: PrimeIdeal, m: QuadRingElem) -> LocalVerdict:
    if P.p == 2:
        raise LocalInputError("case IIa needs an odd prime")
    if P.e != 1:
        raise LocalInputError("p must be unramified in L")
    _require_unit(m, P)
    sym = residue_symbol(-m, P)
    f_L = P.f
    f_K = 1 if sym == 1 else 2
    ok = sym == (-1) ** f_L
    return LocalVerdict(P, "IIa", ok, {"symbol": sym, "f_L": f_L, "f_K": f_K, "parity": (f_K + f_L) % 2})


def local_case_IIb(L: RealQuadField, P: PrimeIdeal, m: QuadRingElem) -> LocalVerdict:
    if P.p != 2:
        raise LocalInputError("case IIb needs a dyadic prime")
    if P.e != 1:
        raise LocalInputError("2 must be unramified in L")
    _require_unit(m, P)
    ok = is_square_mod_power(m * 3, P, 3)
    return LocalVerdict(P, "IIb", ok, {"f_L": P.f})


# ----------------------------------------------------------------------------
# brute-force oracle

GRID_BOUND = 1 << 25


@dataclass(frozen=True)
class OracleResult:
    representable: bool
    level: int  # level at which the answer was decided
    witness: tuple | None  # solution modulo q^k (k as requested) when representable
    stable: bool


def _form_coeffs(p: int):
    g = lambda_O(make_Bp(p)[1]).gram
    return tuple(tuple(r) for r in g)


@lru_cache(maxsize=None)
def _value_tables(d: int, q: PrimeIdeal, level: int, gram: tuple):
    """Arrays over O/q^level: values hit by N, and the first stable point per value (-1 if none).

    Points are indexed as x1 * n^2 + x2 * n + x3 in residue codes.
    """
    R = ResidueRing(q, level)
    n = R.size
    codes = np.arange(n, dtype=np.int64)
    x2, x3 = np.meshgrid(codes, codes, indexing="ij")
    x2, x3 = x2.ravel(), x3.ravel()
    g = gram
    # N(x) = sum g_ii/2 x_i^2 + sum_{i<j} g_ij x_i x_j, gradient (Gx)_i
    sq2, sq3 = R.mul(x2, x2), R.mul(x3, x3)
    base = R.add(R.add(R.scale(g[1][1] // 2, sq2), R.scale(g[2][2] // 2, sq3)), R.scale(g[1][2], R.mul(x2, x3)))
    grad2_base = R.add(R.scale(g[1][1], x2), R.scale(g[1][2], x3))
    grad3_base = R.add(R.scale(g[1][2], x2), R.scale(g[2][2], x3))
    any_hit = np.zeros(n, dtype=bool)
    first = np.full(n, -1, dtype=np.int64)
    for c in range(n):
        x1 = np.int64(c)
        val = R.add(base, R.add(R.scale(g[0][0] // 2, R.mul(x1, x1)), R.add(R.scale(g[0][1], R.mul(x1, x2)), R.scale(g[0][2], R.mul(x1, x3)))))
        g1 = R.add(R.scale(g[0][0], x1), R.add(R.scale(g[0][1], x2), R.scale(g[0][2], x3)))
        g2 = R.add(grad2_base, R.scale(g[0][1], x1))
        g3 = R.add(grad3_base, R.scale(g[0][2], x1))
        e = np.minimum(np.minimum(R.valuation(g1), R.valuation(g2)), R.valuation(g3))
        any_hit[val] = True
        idx = np.flatnonzero(2 * e + 1 <= level)
        if idx.size:
            vals, pos = np.unique(val[idx], return_index=True)
            new = first[vals] < 0
            first[vals[new]] = c * n * n + idx[pos[new]]
    return any_hit, first


def _min_level(q: PrimeIdeal) -> int:
    return 3 if q.p == 2 else 1


def _lift_witness(q: PrimeIdeal, gram, m: QuadRingElem, x: list, level: int, k: int):
    """Hensel line search from a stable solution mod q^level up to q^k."""
    R = ResidueRing(q, k)
    xs = [R.encode(v) for v in x]
    mc = R.encode(m)

    def value(v):
        s = 0
        for i in range(3):
            s = R.add(s, R.scale(gram[i][i] // 2, R.mul(v[i], v[i])))
            for j in range(i + 1, 3):
                s = R.add(s, R.scale(gram[i][j], R.mul(v[i], v[j])))
        return int(s)

    def grad_val(v):
        out = []
        for i in range(3):
            s = 0
            for j in range(3):
                s = R.add(s, R.scale(gram[i][j], v[j]))
            out.append(int(R.valuation(np.int64(s))))
        return out

    gv = grad_val(xs)
    e = min(gv)
    i = gv.index(e)
    digits = ResidueRing(q, 1)
    j = level
    while j < k:
        diff = R.add(value(xs), R.scale(-1, mc))
        if int(R.valuation(np.int64(diff))) > j:
            j += 1
            continue
        step = R.encode(QuadRingElem(q.p ** (j - e), 0, q.d))
        for s in range(digits.size):
            t = R.mul(step, R.encode(digits.decode(s)))
            trial = list(xs)
            trial[i] = int(R.add(xs[i], t))
            diff = R.add(value(trial), R.scale(-1, mc))
            if int(R.valuation(np.int64(diff))) >= j + 1:
                xs = trial
                break
        else:  # pragma: no cover - Hensel guarantees a digit
            raise FieldError("Hensel lift failed")
        j += 1
    return tuple(R.decode(c) for c in xs)


def local_oracle(L: RealQuadField, q: PrimeIdeal, m: QuadRingElem, k: int, p: int, grid_bound: int = GRID_BOUND) -> OracleResult:
    """Decide local representability of m by the norm form of Lambda_O (x) O_L at q.

    Enumerates N over (O/q^j)^3 for increasing j. A value hit at a point
    with gradient valuation e and 2e+1 <= j lifts to every level; a value
    never hit at level j is not represented at all.
    """
    if q.e != 1:
        raise LocalInputError("oracle implemented for unramified primes")
    gram = _form_coeffs(p)
    j0 = _min_level(q)
    top = max(k, j0)
    for level in range(1, top + 1):
        size = (q.norm ** level) ** 3
        if size > grid_bound:
            raise SizeBoundError(f"grid {size} at level {level} exceeds {grid_bound}")
        any_hit, first = _value_tables(L.d, q, level, gram)
        R = ResidueRing(q, level)
        code = R.encode(m)
        if not any_hit[code]:
            return OracleResult(False, level, None, False)
        if first[code] >= 0:
            c1, rest = divmod(int(first[code]), R.size * R.size)
            c2, c3 = divmod(rest, R.size)
            wit = [R.decode(c1), R.decode(c2), R.decode(c3)]
            lifted = _lift_witness(q, gram, m, wit, level, max(k, level))
            return OracleResult(True, level, lifted, True)
        # undecided at this level; try the next one
    raise SizeBoundError(f"oracle undecided up to level {top}")


def oracle_value_at(q: PrimeIdeal, gram, x, k: int) -> QuadRingElem:
    """N(x) mod q^k for a witness, as a decoded residue (used by tests)."""
    R = ResidueRing(q, k)
    xs = [R.encode(v) for v in x]
    s = 0
    for i in range(3):
        s = R.add(s, R.scale(gram[i][i] // 2, R.mul(xs[i], xs[i])))
        for j in range(i + 1, 3):
            s = R.add(s, R.scale(gram[i][j], R.mul(xs[i], xs[j])))
    return R.decode(int(s))
