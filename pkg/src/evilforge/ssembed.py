"""Embeddings of O_K into superspecial orders via the ternary norm form.

The pipeline: a relative presentation O_K = O_L[t] with t^2 + b t + c = 0
gives m = 4c - b^2; the lattice Lambda_R of trace-zero elements in
O_L + 2R carries N(x) = -x^2; a vector with N(x) = m produces an
element alpha of R with minimal polynomial x^2 + b x + c.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from . import exactlin as el
from .exactlin import IntLattice, LatticeError
from .localrep import LocalVerdict, local_case_I, local_case_IIa, local_case_IIb
from .quatalg import MaximalOrder, QuatElem, lambda_O, make_Bp
from .realquad import (
    FieldError,
    QuadRingElem,
    RealQuadField,
    StrictClassNumberError,
    in_ideal_power,
    is_prime,
    is_strict_class_number_one,
    is_totally_positive,
    primes_above,
    prime_factors,
    splitting_type,
    valuation,
)


class InputError(ValueError):
    """Invalid input for the embedding pipeline (bad field, prime or presentation)."""


class SearchBoundExceeded(ValueError):
    pass


class DecompositionError(ValueError):
    pass


# ----------------------------------------------------------------------------
# relative presentation


@dataclass(frozen=True)
class CMFieldRel:
    L: RealQuadField
    b: QuadRingElem
    c: QuadRingElem
    m: QuadRingElem
    is_maximal: bool

    @property
    def norm_m(self) -> int:
        return int(self.m.norm())

    @property
    def is_biquadratic(self) -> bool:
        """K = L(sqrt -m) is Galois with group (Z/2)^2 iff Norm(m) is a rational square."""
        if self.L.d == 1:
            return False
        n = self.norm_m
        return n > 0 and isqrt(n) ** 2 == n

    @property
    def disc_norm(self) -> int:
        """|Norm_{L/Q}(d_{K/L})| for the order O_L[t]."""
        return abs(self.norm_m)


def _elem(L: RealQuadField, v) -> QuadRingElem:
    if isinstance(v, QuadRingElem):
        if v.d != L.d:
            raise InputError("element from a different field")
        return v.to_int_elem()
    if isinstance(v, int):
        return L(v)
    v = tuple(v)
    if L.d == 1:
        if len(v) == 2 and v[1] != 0:
            raise InputError("L = Q takes a single integer coordinate")
        return L(int(v[0]))
    if len(v) != 2:
        raise InputError("expected an (x, y) pair")
    return L(int(v[0]), int(v[1]))


def _order_is_maximal(L: RealQuadField, b: QuadRingElem, c: QuadRingElem, m: QuadRingElem) -> bool:
    for ell in prime_factors(int(m.norm())):
        for q in primes_above(L, ell):
            if valuation(m, q) < 2:
                continue
            if ell != 2:
                return False
            ys = range(4) if L.d != 1 else range(1)
            for x in range(4):
                for y in ys:
                    a = L(x, y) if L.d != 1 else L(x)
                    if in_ideal_power(a * a + b * a + c, q, 2) and in_ideal_power(a * 2 + b, q, 1):
                        return False
    return True


def disc_generator(L: RealQuadField, b, c) -> CMFieldRel:
    """m = 4c - b^2 for O_K = O_L[t], t^2 + b t + c = 0."""
    b, c = _elem(L, b), _elem(L, c)
    m = c * 4 - b * b
    if not is_totally_positive(m):
        raise InputError(f"m = {m} is not totally positive")
    return CMFieldRel(L, b, c, m, _order_is_maximal(L, b, c, m))


def from_m(L: RealQuadField, m: QuadRingElem) -> CMFieldRel:
    """Canonical (b, c) with b in {0,1}-coordinates and b^2 + m = 4c."""
    m = _elem(L, m)
    ys = (0, 1) if L.d != 1 else (0,)
    for x in (0, 1):
        for y in ys:
            b = L(x, y) if L.d != 1 else L(x)
            s = b * b + m
            if s.x % 4 == 0 and s.y % 4 == 0:
                return disc_generator(L, b, L(s.x // 4, s.y // 4) if L.d != 1 else L(s.x // 4))
    raise InputError(f"{m} is not congruent to minus a square mod 4")


# ----------------------------------------------------------------------------
# B (x) L elements for the model order O (x) O_L


@dataclass(frozen=True)
class BLElem:
    """q0 + q1*w with w central in B (x) L."""

    q0: QuatElem
    q1: QuatElem
    d: int

    def _AB(self):
        L = RealQuadField(self.d)
        return L.A, L.B

    def __add__(self, o):
        return BLElem(self.q0 + o.q0, self.q1 + o.q1, self.d)

    def __sub__(self, o):
        return BLElem(self.q0 - o.q0, self.q1 - o.q1, self.d)

    def __neg__(self):
        return BLElem(-self.q0, -self.q1, self.d)

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return BLElem(self.q0 * o, self.q1 * o, self.d)
        A, B = self._AB()
        t = self.q1 * o.q1
        return BLElem(self.q0 * o.q0 + t * B, self.q0 * o.q1 + self.q1 * o.q0 + t * A, self.d)

    def __truediv__(self, n):
        return BLElem(self.q0 / n, self.q1 / n, self.d)

    def conj(self):
        return BLElem(self.q0.conj(), self.q1.conj(), self.d)

    def flatten(self):
        return self.q0.coords() + self.q1.coords()


# ----------------------------------------------------------------------------
# superspecial orders


def _flatten(x) -> tuple:
    if isinstance(x, BLElem):
        return x.flatten()
    if isinstance(x, QuatElem):
        return x.coords()
    out = ()
    for e in x.entries():
        out += e.coords()
    return out


class SuperspecialOrder:
    """A Z-order R in an ambient algebra together with an O_L-action.

    ``basis`` is a Z-basis of R; ``iota_omega`` is the image of w (None when L = Q);
    ``rosati`` is the polarization involution when one is attached.
    """

    def __init__(self, L: RealQuadField, basis, one, iota_omega=None, rosati=None):
        self.L = L
        self.basis = tuple(basis)
        self.one = one
        self.iota_omega = iota_omega
        self.rosati = rosati
        rows = [list(map(Fraction, _flatten(e))) for e in self.basis]
        self._rows = rows
        n, D = len(rows), len(rows[0])
        # choose pivot columns for coordinate solving
        pivots = []
        for col in range(D):
            # rank of rows restricted to chosen columns + col
            cand = pivots + [col]
            sub = [[r[c] for c in cand] for r in rows]
            scale = el.lcm_denominator(v for r in sub for v in r)
            if el.rank([[int(v * scale) for v in r] for r in sub]) == len(cand):
                pivots.append(col)
            if len(pivots) == n:
                break
        if len(pivots) != n:
            raise LatticeError("order basis is not linearly independent")
        self._pivots = pivots
        square = [[r[c] for c in pivots] for r in rows]
        # inv maps pivot coordinates to basis coordinates: c = v_piv @ inv
        self._inv = [el.solve_rational(square, [Fraction(int(i == j)) for j in range(n)]) for i in range(n)]
        self._trd_basis = None

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coords(self, x) -> tuple | None:
        """Rational coordinates of x on the basis, or None if x is outside the span."""
        v = list(map(Fraction, _flatten(x)))
        vp = [v[j] for j in self._pivots]
        n = len(self.basis)
        c = [sum(vp[i] * self._inv[i][k] for i in range(n) if vp[i]) for k in range(n)]
        recon = [sum(ci * r[j] for ci, r in zip(c, self._rows) if ci) for j in range(len(v))]
        if recon != v:
            return None
        return tuple(c)

    def int_coords(self, x) -> tuple | None:
        c = self.coords(x)
        if c is None or any(v.denominator != 1 for v in c):
            return None
        return tuple(int(v) for v in c)

    def __contains__(self, x) -> bool:
        return self.int_coords(x) is not None

    def element(self, coeffs):
        out = self.one * 0
        for ci, e in zip(coeffs, self.basis):
            if ci:
                out = out + e * Fraction(ci)
        return out

    def iota(self, lam: QuadRingElem):
        out = self.one * Fraction(lam.x)
        if self.L.d != 1 and lam.y:
            out = out + self.iota_omega * Fraction(lam.y)
        return out

    def _ltrace(self, x) -> Fraction:
        s = Fraction(0)
        for k, e in enumerate(self.basis):
            c = self.coords(x * e)
            s += c[k]
        return s

    def trd_L(self, x) -> QuadRingElem:
        """Reduced trace to L (linear in x, evaluated through the basis traces)."""
        if self._trd_basis is None:
            self._trd_basis = [self._trd_direct(e) for e in self.basis]
        c = self.coords(x)
        if c is None:
            raise LatticeError("element outside the order's span")
        out = QuadRingElem(0, 0, self.L.d)
        for ci, t in zip(c, self._trd_basis):
            if ci:
                out = out + t * ci
        return out

    def _trd_direct(self, x) -> QuadRingElem:
        """Reduced trace from Q-traces of left multiplication by x and w x."""
        L = self.L
        t1 = self._ltrace(x) / 2
        if L.d == 1:
            return QuadRingElem(t1, 0, 1)
        t2 = self._ltrace(self.iota_omega * x) / 2
        A, B = L.A, L.B
        # t1 = 2 u + A v, t2 = A u + (A^2 + 2B) v
        det = A * A + 4 * B
        u = (t1 * (A * A + 2 * B) - A * t2) / det
        v = (2 * t2 - A * t1) / det
        return QuadRingElem(u, v, L.d)

    def nrd_L(self, x) -> QuadRingElem:
        t = self.trd_L(x)
        t2 = self.trd_L(x * x)
        return (t * t - t2) * Fraction(1, 2)

    def canonical_conj(self, x):
        return self.iota(self.trd_L(x)) - x

    def certify(self) -> dict:
        """Ring closure, unit, O_L-stability, Rosati stability and Rosati = canonical involution."""
        ring = all((e * f) in self for e in self.basis for f in self.basis)
        has_one = self.one in self
        has_omega = self.L.d == 1 or self.iota_omega in self
        central = self.L.d == 1 or all(self.iota_omega * e == e * self.iota_omega for e in self.basis)
        out = {"rank": self.rank, "ring_closed": ring, "contains_one": has_one, "contains_iota_OL": has_omega, "centralizes_iota": central}
        if self.rosati is not None:
            out["rosati_stable"] = all(self.rosati(e) in self for e in self.basis)
            out["rosati_is_canonical"] = all(self.rosati(e) == self.canonical_conj(e) for e in self.basis)
        return out


def abstract_order(L: RealQuadField, O: MaximalOrder) -> SuperspecialOrder:
    """R = O (x) O_L with w acting centrally; for L = Q this is O itself."""
    B = O.algebra
    if L.d == 1:
        return SuperspecialOrder(L, O.basis, B.one(), None, rosati=lambda x: x.conj())
    zero = B(0)
    basis = [BLElem(e, zero, L.d) for e in O.basis] + [BLElem(zero, e, L.d) for e in O.basis]
    return SuperspecialOrder(L, basis, BLElem(B.one(), zero, L.d), BLElem(zero, B.one(), L.d), rosati=lambda x: x.conj())


# ----------------------------------------------------------------------------
# ternary O_L-forms


@dataclass(frozen=True)
class TernaryOLForm:
    """Rank-3 O_L-lattice with O_L-valued even Gram and its trace lattice.

    Trace-lattice coordinates are (u_1, u_2, u_3, w_1, w_2, w_3) for
    x = sum (u_i + w_i w) v_i (only the u part when L = Q).
    """

    L: RealQuadField
    gram: tuple
    basis: tuple
    omega_basis: tuple
    trace_lattice: IntLattice
    order: SuperspecialOrder | None = dc_field(default=None, compare=False, hash=False)

    def ol_coords(self, coeffs) -> tuple:
        if self.L.d == 1:
            return tuple(QuadRingElem(int(c), 0, 1) for c in coeffs)
        return tuple(QuadRingElem(int(coeffs[i]), int(coeffs[i + 3]), self.L.d) for i in range(3))

    def N(self, coeffs) -> QuadRingElem:
        x = self.ol_coords(coeffs)
        s = QuadRingElem(0, 0, self.L.d)
        for i in range(3):
            gii = self.gram[i][i]
            half = QuadRingElem(Fraction(gii.x, 2), Fraction(gii.y, 2), self.L.d)
            s = s + half * x[i] * x[i]
            for j in range(i + 1, 3):
                s = s + self.gram[i][j] * x[i] * x[j]
        return s.to_int_elem()

    def element(self, coeffs):
        out = None
        vecs = list(self.basis) + list(self.omega_basis)
        for c, v in zip(coeffs, vecs):
            term = v * Fraction(int(c))
            out = term if out is None else out + term
        return out


def _trace_gram(L: RealQuadField, gram) -> list:
    if L.d == 1:
        return [[int(g.x) for g in row] for row in gram]
    es = [L.one(), L.omega()]
    n = 6
    out = [[0] * n for _ in range(n)]
    for s in range(2):
        for t in range(2):
            for i in range(3):
                for j in range(3):
                    out[3 * s + i][3 * t + j] = int((es[s] * es[t] * gram[i][j]).trace())
    return out


def _make_form(L, gram, basis, omega_basis, order) -> TernaryOLForm:
    tg = _trace_gram(L, gram)
    n = len(tg)
    lat = IntLattice(n, tuple(tuple(r) for r in el.identity(n)), tuple(tuple(r) for r in tg))
    if not el.is_positive_definite(tg):
        raise LatticeError("trace form is not positive definite")
    return TernaryOLForm(L, tuple(tuple(r) for r in gram), tuple(basis), tuple(omega_basis), lat, order)


@lru_cache(maxsize=None)
def lambda_R(L: RealQuadField, O: MaximalOrder) -> TernaryOLForm:
    """Lambda_O (x) O_L with the Lambda_O Gram taken as constants."""
    lo = lambda_O(O)
    vs = [O.from_coords(b) for b in lo.basis]
    gram = [[L(int(g)) for g in row] for row in lo.gram]
    R = abstract_order(L, O)
    if L.d == 1:
        return _make_form(L, gram, vs, (), R)
    zero = O.algebra(0)
    basis = [BLElem(v, zero, L.d) for v in vs]
    obasis = [BLElem(zero, v, L.d) for v in vs]
    return _make_form(L, gram, basis, obasis, R)


def lambda_R_lattice(R: SuperspecialOrder) -> IntLattice:
    """Lambda_R = R^0 cap (iota(O_L) + 2R) in R-coordinates."""
    L = R.L
    n = R.rank
    g = L.degree
    trd_rows = []
    for e in R.basis:
        t = R.trd_L(e)
        trd_rows.append([t.x] if g == 1 else [t.x, t.y])
    full = el.lattice(el.identity(n))
    r0 = el.kernel_mod_lattice(trd_rows, full)
    gens = [R.int_coords(R.one)]
    if g == 2:
        gens.append(R.int_coords(R.iota_omega))
    if any(v is None for v in gens):
        raise LatticeError("iota(O_L) is not inside R")
    gens += [tuple(2 * int(i == j) for j in range(n)) for i in range(n)]
    lam = el.lattice_intersect(r0, el.lattice(gens, n))
    if lam.rank != 3 * g:
        raise LatticeError(f"Lambda_R has rank {lam.rank}, expected {3 * g}")
    return lam


def ternary_from_order(R: SuperspecialOrder, search_limit: int = 64) -> TernaryOLForm:
    """Lambda_R of a concrete order, with an O_L-basis found among short vectors."""
    L = R.L
    lam = lambda_R_lattice(R)
    elems = [R.element(b) for b in lam.basis]
    nrm = lambda x: R.nrd_L(x)
    k = lam.rank
    # trace Gram on Lambda_R (even convention)
    tg = [[0] * k for _ in range(k)]
    for i in range(k):
        ni = nrm(elems[i])
        tg[i][i] = 2 * int(ni.trace())
        for j in range(i + 1, k):
            v = nrm(elems[i] + elems[j]) - ni - nrm(elems[j])
            tg[i][j] = tg[j][i] = int(v.trace())
    tl = lam.with_gram(tg)
    if L.d == 1:
        chosen = [tuple(int(i == j) for j in range(3)) for i in range(3)]
    else:
        chosen = _ol_basis(R, lam, tl, search_limit)
    vs = [R.element(lam.vector(c)) for c in chosen]
    gram = [[None] * 3 for _ in range(3)]
    for i in range(3):
        gram[i][i] = (nrm(vs[i]) * 2).to_int_elem()
        for j in range(i + 1, 3):
            gram[i][j] = gram[j][i] = (nrm(vs[i] + vs[j]) - nrm(vs[i]) - nrm(vs[j])).to_int_elem()
    obasis = [] if L.d == 1 else [R.iota_omega * v for v in vs]
    for v in vs:
        sq = v * v
        if sq != R.iota(-nrm(v)):
            raise LatticeError("basis vector does not square to a scalar")  # pragma: no cover
    return _make_form(L, gram, vs, obasis, R)


def _ol_basis(R: SuperspecialOrder, lam: IntLattice, tl: IntLattice, search_limit: int):
    """Three vectors whose O_L-span is all of Lambda_R (greedy over short vectors)."""
    k = lam.rank

    def omega_coords(c):
        x = R.element(lam.vector(c))
        y = R.int_coords(R.iota_omega * x)
        out = lam.coords(y)
        if out is None:
            raise LatticeError("Lambda_R is not stable under O_L")  # pragma: no cover
        return out

    bound = max(tl.q(tuple(int(i == j) for j in range(k))) for i in range(k))
    chosen: list = []
    rows: list = []
    tried = set()
    for _ in range(search_limit):
        for _val, c in el.short_vectors(tl, bound):
            if c in tried or not any(c):
                continue
            tried.add(c)
            new_rows = rows + [list(c), list(omega_coords(c))]
            sub = el.lattice(new_rows, k)
            if sub.rank == len(new_rows) and el.is_saturated(sub):
                chosen.append(c)
                rows = new_rows
                if len(chosen) == 3:
                    return chosen
        bound *= 2
    raise LatticeError("no O_L-basis found within the search limit")  # pragma: no cover


# ----------------------------------------------------------------------------
# Theorem A conditions


@dataclass
class ThmAReport:
    p: int
    d: int
    b: tuple
    c: tuple
    m: tuple
    norm_m: int
    is_maximal: bool
    biquadratic: bool
    unramified_in_L: bool
    unramified_in_K: bool
    verdicts: list
    conditions_pass: bool
    local_everywhere: bool
    reasons: list

    def as_dict(self) -> dict:
        return {
            "p": str(self.p),
            "d": str(self.d),
            "b": [str(v) for v in self.b],
            "c": [str(v) for v in self.c],
            "m": [str(v) for v in self.m],
            "norm_disc": str(abs(self.norm_m)),
            "order_is_maximal": self.is_maximal,
            "biquadratic": self.biquadratic,
            "p_unramified_in_L": self.unramified_in_L,
            "p_unramified_in_K": self.unramified_in_K,
            "verdicts": [
                {"prime": v.prime.generators(), "above": str(v.prime.p), "case": v.case_tag, "representable": v.representable}
                for v in self.verdicts
            ],
            "conditions_pass": self.conditions_pass,
            "local_everywhere": self.local_everywhere,
            "reasons": list(self.reasons),
        }


def _pair(z: QuadRingElem) -> tuple:
    return (int(z.x),) if z.d == 1 else (int(z.x), int(z.y))


def validate_field_and_prime(L: RealQuadField, p: int, class_bound: int = 4000) -> None:
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    try:
        ok = is_strict_class_number_one(L, class_bound)
    except FieldError as exc:
        raise InputError(str(exc)) from exc
    if not ok:
        raise InputError(f"{L} does not have strict class number one") from StrictClassNumberError(str(L))
    if splitting_type(L, p).kind == "ramified":
        raise InputError(f"p={p} is ramified in L")


def check_thmA(K: CMFieldRel, p: int, class_bound: int = 4000) -> ThmAReport:
    """Evaluate the local conditions at p; the norm condition is reported only."""
    L = K.L
    validate_field_and_prime(L, p, class_bound)
    m = K.m
    reasons = []
    primes = splitting_type(L, p).primes
    unram_K = all(not in_ideal_power(m, P, 1) for P in primes)
    verdicts: list[LocalVerdict] = []
    for P in primes:
        if in_ideal_power(m, P, 1):
            reasons.append(f"m lies in {P.generators()}: p ramifies in K")
            verdicts.append(LocalVerdict(P, "IIa" if p != 2 else "IIb", False, {"reason": "ramified in K"}))
            continue
        v = local_case_IIa(L, P, m) if p != 2 else local_case_IIb(L, P, m)
        if not v.representable:
            reasons.append(f"case {v.case_tag} fails at {P.generators()}")
        verdicts.append(v)
    cond = unram_K and all(v.representable for v in verdicts)
    extra = []
    if p != 2:
        for q in primes_above(L, 2):
            v = local_case_I(L, q, m, p)
            if not v.representable:
                reasons.append(f"case I fails at {q.generators()}")
            extra.append(v)
    if not K.is_maximal:
        reasons.append("O_L[t] is not the maximal order of K")
    return ThmAReport(
        p, L.d, _pair(K.b), _pair(K.c), _pair(K.m), K.norm_m, K.is_maximal, K.is_biquadratic, True, unram_K,
        verdicts + extra, cond, cond and all(v.representable for v in extra), reasons,
    )


# ----------------------------------------------------------------------------
# global search and the embedding


@dataclass(frozen=True)
class RepresentResult:
    x: tuple | None
    target: int
    candidates: int


def global_represent(form: TernaryOLForm, m: QuadRingElem, search_bound: int) -> RepresentResult:
    """First (lexicographic) x in the trace lattice with N(x) = m."""
    if not is_totally_positive(m):
        raise InputError("m must be totally positive")
    target = int(m.trace()) if m.d != 1 else int(m.x)
    if target > search_bound:
        raise SearchBoundExceeded(f"trace {target} exceeds search bound {search_bound}")
    cands = el.fincke_pohst(form.trace_lattice, target)
    for c in cands:
        if form.N(c) == m:
            return RepresentResult(c, target, len(cands))
    return RepresentResult(None, target, len(cands))


@dataclass(frozen=True)
class Embedding:
    alpha: object
    x: object
    x1: QuadRingElem
    b: QuadRingElem
    c: QuadRingElem
    checks: dict


def embed_from_representation(K: CMFieldRel, R: SuperspecialOrder, x) -> Embedding:
    """alpha = (x - b)/2 from x in Lambda_R with N(x) = m."""
    L = K.L
    xc = R.int_coords(x)
    if xc is None:
        raise DecompositionError("x is not in R")
    if R.trd_L(x) != QuadRingElem(0, 0, L.d):
        raise DecompositionError("x has nonzero reduced trace")
    if R.nrd_L(x) != K.m:
        raise DecompositionError("N(x) differs from m")
    x1 = None
    ys = (0, 1) if L.d != 1 else (0,)
    for e in (0, 1):
        for f in ys:
            lam = QuadRingElem(e, f, L.d)
            lc = R.int_coords(R.iota(lam))
            if all((a - b) % 2 == 0 for a, b in zip(xc, lc)):
                x1 = lam
                break
        if x1 is not None:
            break
    if x1 is None:
        raise DecompositionError("x is not in O_L + 2R")
    alpha = (x - R.iota(K.b)) * Fraction(1, 2)
    checks = {
        "alpha_in_R": alpha in R,
        "x1_congruent_b": ((x1 - K.b).x % 2 == 0) and ((x1 - K.b).y % 2 == 0),
        "min_poly": alpha * alpha + R.iota(K.b) * alpha + R.iota(K.c) == R.one * 0,
        "commutes_with_OL": L.d == 1 or alpha * R.iota_omega == R.iota_omega * alpha,
        "round_trip": R.iota(K.b) + alpha * 2 == x,
    }
    if R.rosati is not None:
        checks["rosati_conjugation"] = R.rosati(alpha) == R.iota(-K.b) - alpha
    if not all(checks.values()):
        raise DecompositionError(f"embedding checks failed: {[k for k, v in checks.items() if not v]}")
    return Embedding(alpha, x, x1, K.b, K.c, checks)
