"""Arithmetic in real quadratic fields L = Q(sqrt d) and their rings of integers.

``d == 1`` stands for L = Q; every routine accepts it and then works in Z.
Elements are written x + y*w with w = (1+sqrt d)/2 when d = 1 mod 4 and
w = sqrt d otherwise, so w^2 = A*w + B with (A, B) = (1, (d-1)/4) or (0, d).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

from .exactlin import hnf, is_prime, legendre, prime_factors


class FieldError(ValueError):
    pass


class StrictClassNumberError(FieldError):
    """L does not have strict class number one."""


class SizeBoundError(FieldError):
    """A finite enumeration would exceed its configured size bound."""


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class RealQuadField:
    d: int

    def __post_init__(self):
        if self.d < 1 or not is_squarefree(self.d):
            raise FieldError(f"d must be a squarefree integer >= 1, got {self.d}")

    @property
    def is_rational(self) -> bool:
        return self.d == 1

    @property
    def A(self) -> int:
        return 1 if self.d % 4 == 1 and self.d != 1 else 0

    @property
    def B(self) -> int:
        if self.d == 1:
            return 0
        return (self.d - 1) // 4 if self.d % 4 == 1 else self.d

    @property
    def disc(self) -> int:
        if self.d == 1:
            return 1
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def degree(self) -> int:
        return 1 if self.d == 1 else 2

    def __call__(self, x=0, y=0) -> "QuadRingElem":
        if self.d == 1 and y != 0:
            raise FieldError("L = Q has no w-coordinate")
        return QuadRingElem(x, y, self.d)

    def one(self):
        return self(1, 0)

    def omega(self):
        return self(0, 1)

    def basis(self):
        return [self.one()] if self.d == 1 else [self.one(), self.omega()]

    def from_coords(self, coords):
        return self(coords[0], coords[1] if len(coords) > 1 else 0)

    def __repr__(self):
        return "Q" if self.d == 1 else f"Q(sqrt {self.d})"


def field(d: int) -> RealQuadField:
    return RealQuadField(int(d))


@dataclass(frozen=True)
class QuadRingElem:
    """x + y*w in O_L (coordinates may be rationals for elements of L)."""

    x: object
    y: object
    d: int

    @property
    def L(self) -> RealQuadField:
        return RealQuadField(self.d)

    def _coerce(self, other) -> "QuadRingElem":
        if isinstance(other, QuadRingElem):
            if other.d != self.d:
                raise FieldError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadRingElem(other, 0, self.d)
        return NotImplemented

    def __add__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        return QuadRingElem(self.x + o.x, self.y + o.y, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadRingElem(-self.x, -self.y, self.d)

    def __sub__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        return QuadRingElem(self.x - o.x, self.y - o.y, self.d)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        L = self.L
        x1, y1, x2, y2 = self.x, self.y, o.x, o.y
        return QuadRingElem(x1 * x2 + L.B * y1 * y2, x1 * y2 + x2 * y1 + L.A * y1 * y2, self.d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadRingElem(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conj(self) -> "QuadRingElem":
        return QuadRingElem(self.x + self.y * self.L.A, -self.y, self.d)

    def norm(self):
        if self.d == 1:
            return self.x
        L = self.L
        return self.x * self.x + L.A * self.x * self.y - L.B * self.y * self.y

    def trace(self):
        return 2 * self.x + self.L.A * self.y if self.d != 1 else self.x

    def inverse(self) -> "QuadRingElem":
        n = Fraction(self.norm())
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.d == 1:
            return QuadRingElem(1 / n, 0, 1)
        c = self.conj()
        return QuadRingElem(Fraction(c.x) / n, Fraction(c.y) / n, self.d)

    def __truediv__(self, o):
        o = self._coerce(o)
        return self * o.inverse()

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integral(self) -> bool:
        return Fraction(self.x).denominator == 1 and Fraction(self.y).denominator == 1

    def to_int_elem(self) -> "QuadRingElem":
        if not self.is_integral():
            raise FieldError("element is not integral")
        return QuadRingElem(int(self.x), int(self.y), self.d)

    def coords(self) -> tuple:
        return (self.x,) if self.d == 1 else (self.x, self.y)

    def __eq__(self, o):
        o2 = self._coerce(o) if not isinstance(o, QuadRingElem) else o
        if o2 is NotImplemented:
            return False
        return self.d == o2.d and self.x == o2.x and self.y == o2.y

    def __hash__(self):
        return hash((Fraction(self.x), Fraction(self.y), self.d))

    def __repr__(self):
        if self.d == 1:
            return f"{self.x}"
        w = "w" if self.L.A else f"sqrt{self.d}"
        return f"({self.x} + {self.y}*{w})"


# ----------------------------------------------------------------------------
# exact real-embedding signs


def _half_sqrt_form(z: QuadRingElem):
    """Integers (U, V) with sigma_1(z) a positive multiple of U + V sqrt d."""
    den = Fraction(z.x).denominator * Fraction(z.y).denominator
    x, y = int(Fraction(z.x) * den), int(Fraction(z.y) * den)
    if z.L.A:
        return 2 * x + y, y
    return x, y


def sign_sigma1(z: QuadRingElem) -> int:
    """Sign of the embedding with sqrt d > 0."""
    if z.d == 1:
        v = Fraction(z.x)
        return (v > 0) - (v < 0)
    u, v = _half_sqrt_form(z)
    su, sv = (u > 0) - (u < 0), (v > 0) - (v < 0)
    if sv == 0 or su == sv:
        return su
    if su == 0:
        return sv
    return su if u * u > z.d * v * v else sv


def sign_sigma2(z: QuadRingElem) -> int:
    return sign_sigma1(z.conj()) if z.d != 1 else sign_sigma1(z)


def is_totally_positive(z: QuadRingElem) -> bool:
    return sign_sigma1(z) > 0 and sign_sigma2(z) > 0


# ----------------------------------------------------------------------------
# units and class numbers


@lru_cache(maxsize=None)
def fundamental_unit(L: RealQuadField) -> QuadRingElem:
    """Fundamental unit eps > 1 from continued-fraction convergents."""
    if L.d == 1:
        raise FieldError("Q has no fundamental unit")
    d = L.d
    if L.A == 0:
        # convergents h/k of sqrt d: look for h^2 - d k^2 = +-1
        P, Q, a0 = 0, 1, isqrt(d)
        a = a0
        h_prev, h = 1, a0
        k_prev, k = 0, 1
        while True:
            if h * h - d * k * k in (1, -1):
                return L(h, k)
            P = a * Q - P
            Q = (d - P * P) // Q
            a = (a0 + P) // Q
            h_prev, h = h, a * h + h_prev
            k_prev, k = k, a * k + k_prev
    # w = (1 + sqrt d)/2 = (P + sqrt D)/Q with D = d, P = 1, Q = 2
    D, s = d, isqrt(d)
    P, Q = 1, 2
    a = (P + s) // Q
    h_prev, h = 1, a
    k_prev, k = 0, 1
    B = L.B
    while True:
        # candidate (h - k) + k w has norm h^2 - h k - B k^2
        if h * h - h * k - B * k * k in (1, -1):
            return L(h - k, k)
        P = a * Q - P
        Q = (D - P * P) // Q
        a = (P + s) // Q
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev


def _reduce_step(a: int, b: int, c: int, D: int, s: int):
    """One application of the reduction operator rho on an indefinite form."""
    m = 2 * abs(c)
    if abs(c) > s:
        # -|c| < b' <= |c|
        b2 = (-b) % m
        if b2 > abs(c):
            b2 -= m
    else:
        # sqrt D - 2|c| < b' < sqrt D
        b2 = (-b) % m
        top = s  # largest integer below sqrt D
        b2 = b2 + ((top - b2) // m) * m
    c2 = (b2 * b2 - D) // (4 * c)
    return c, b2, c2


def _is_reduced(a: int, b: int, c: int, s: int) -> bool:
    # 0 < b < sqrt D and sqrt D - b < 2|a| < sqrt D + b
    return 0 < b <= s and s - b < 2 * abs(a) <= s + b


def form_represents_unit(a: int, b: int, c: int) -> bool:
    """Does the primitive indefinite form (a, b, c) represent +1 or -1?"""
    D = b * b - 4 * a * c
    s = isqrt(D)
    if s * s == D:
        raise FieldError("square discriminant")
    for _ in range(10000):
        if _is_reduced(a, b, c, s):
            break
        a, b, c = _reduce_step(a, b, c, D, s)
    else:  # pragma: no cover - reduction always terminates quickly
        raise FieldError("reduction did not terminate")
    start = (a, b, c)
    while True:
        if abs(a) == 1:
            return True
        a, b, c = _reduce_step(a, b, c, D, s)
        if (a, b, c) == start:
            return False


@dataclass(frozen=True)
class QuadIdeal:
    """Ideal of O_L with Z-basis rows (in (y, x) order) (g, h) and (0, n)."""

    d: int
    g: int
    h: int
    n: int

    @property
    def norm(self) -> int:
        return self.g * self.n

    def gens(self):
        L = RealQuadField(self.d)
        return [L(self.h, self.g), L(self.n, 0)]


def ideal_from_gens(L: RealQuadField, gens) -> QuadIdeal:
    """Ideal generated (as an O_L-module) by the given elements."""
    rows = []
    for z in gens:
        for t in (z, z * L.omega()):
            rows.append([int(t.y), int(t.x)])
    h, _ = hnf(rows)
    (g, hh), (z, n) = h[0], h[1]
    if z != 0 or g == 0 or n == 0:
        raise FieldError("ideal generators span a degenerate module")
    return QuadIdeal(L.d, g, hh, n)


def ideal_mul(I: QuadIdeal, J: QuadIdeal) -> QuadIdeal:
    L = RealQuadField(I.d)
    return ideal_from_gens(L, [a * b for a in I.gens() for b in J.gens()])


def ideal_conj(I: QuadIdeal) -> QuadIdeal:
    L = RealQuadField(I.d)
    return ideal_from_gens(L, [z.conj() for z in I.gens()])


def is_principal(I: QuadIdeal) -> bool:
    L = RealQuadField(I.d)
    cont = gcd(gcd(I.g, I.h), I.n)
    g, h, n = I.g // cont, I.h // cont, I.n // cont
    # primitive ideal: g = 1, basis a = n, b + w with b = h
    if g != 1:
        raise FieldError("non-primitive ideal after removing content")  # pragma: no cover
    a, b = n, h
    if a == 1:
        return True
    nb = L(b, 1).norm()
    # N(u a + v (b + w)) / a
    return form_represents_unit(a, 2 * b + L.A, nb // a)


def class_number(L: RealQuadField, bound: int = 4000) -> int:
    """h_L from primitive ideals of norm at most sqrt(d_L)/2."""
    if L.d == 1:
        return 1
    if L.disc > bound:
        raise SizeBoundError(f"discriminant {L.disc} exceeds class-number bound {bound}")
    mink = isqrt(L.disc // 4)  # floor(sqrt(d_L)/2) since sqrt(d_L)/2 = sqrt(d_L/4)
    ideals = []
    for a in range(2, mink + 1):
        for b in range(a):
            if L(b, 1).norm() % a == 0:
                ideals.append(QuadIdeal(L.d, 1, b, a))
    reps: list[QuadIdeal] = [QuadIdeal(L.d, 1, 0, 1)]
    for I in ideals:
        if not any(is_principal(ideal_mul(I, ideal_conj(J))) for J in reps):
            reps.append(I)
    return len(reps)


def is_strict_class_number_one(L: RealQuadField, bound: int = 4000) -> bool:
    if L.d == 1:
        return True
    return class_number(L, bound) == 1 and fundamental_unit(L).norm() == -1


def require_strict_class_number_one(L: RealQuadField, bound: int = 4000) -> None:
    if not is_strict_class_number_one(L, bound):
        raise StrictClassNumberError(f"{L} does not have strict class number one")


def totally_positive_unit(L: RealQuadField) -> QuadRingElem:
    eps = fundamental_unit(L)
    return eps * eps if eps.norm() == -1 else eps


def totally_positive_reps(L: RealQuadField, max_norm: int) -> list[QuadRingElem]:
    """Totally positive m in O_L with Norm(m) <= max_norm, one per orbit of totally positive units.

    The representative satisfies u^-1 <= sigma1(m)/sigma2(m) < u for the
    generator u of the totally positive units. Sorted by (norm, trace, y).
    """
    if L.d == 1:
        return [L(n) for n in range(1, max_norm + 1)]
    u = totally_positive_unit(L)
    tmax = 2 * isqrt(max_norm * u.trace()) + 2
    out = []
    for T in range(1, tmax + 1):
        for y in range(-T, T + 1):
            if (T - L.A * y) % 2:
                continue
            m = L((T - L.A * y) // 2, y)
            nm = m.norm()
            if nm <= 0 or nm > max_norm or not is_totally_positive(m):
                continue
            if sign_sigma1(u * m - m.conj()) >= 0 and sign_sigma1(u * m.conj() - m) > 0:
                out.append(m)
    out.sort(key=lambda z: (z.norm(), z.trace(), z.y))
    return out


# ----------------------------------------------------------------------------
# primes and residue rings


@dataclass(frozen=True)
class PrimeIdeal:
    """A prime of O_L above p; ``root`` is the image of w in O/P when f = 1."""

    d: int
    p: int
    f: int
    e: int
    root: int | None

    @property
    def L(self):
        return RealQuadField(self.d)

    @property
    def norm(self) -> int:
        return self.p ** self.f

    def generators(self) -> str:
        if self.d == 1:
            return f"({self.p})"
        if self.f == 2:
            return f"({self.p})"
        w = "w" if self.L.A else f"sqrt{self.d}"
        return f"({self.p}, {w} - {self.root})"

    def __repr__(self):
        return f"P{self.generators()}"


@dataclass(frozen=True)
class SplittingReport:
    p: int
    kind: str  # split | inert | ramified | rational
    f: int
    primes: tuple

    @property
    def unramified(self) -> bool:
        return self.kind != "ramified"


def _omega_poly_roots(L: RealQuadField, p: int) -> list[int]:
    return [r for r in range(p) if (r * r - L.A * r - L.B) % p == 0]


def kronecker_disc(L: RealQuadField, p: int) -> int:
    D = L.disc
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    return legendre(D, p)


@lru_cache(maxsize=None)
def splitting_type(L: RealQuadField, p: int) -> SplittingReport:
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if L.d == 1:
        return SplittingReport(p, "rational", 1, (PrimeIdeal(1, p, 1, 1, 0),))
    k = kronecker_disc(L, p)
    roots = _omega_poly_roots(L, p)
    if k == 1:
        return SplittingReport(p, "split", 1, tuple(PrimeIdeal(L.d, p, 1, 1, r) for r in roots))
    if k == -1:
        return SplittingReport(p, "inert", 2, (PrimeIdeal(L.d, p, 2, 1, None),))
    return SplittingReport(p, "ramified", 1, (PrimeIdeal(L.d, p, 1, 2, roots[0]),))


def primes_above(L: RealQuadField, p: int) -> tuple:
    return splitting_type(L, p).primes


def _lift_root(L: RealQuadField, r: int, p: int, k: int) -> int:
    """Hensel lift of a simple root of w's minimal polynomial to Z/p^k."""
    mod = p
    for _ in range(k.bit_length() + 1):
        if mod >= p ** k:
            break
        mod = min(mod * mod, p ** k)
        fr = r * r - L.A * r - L.B
        dfr = 2 * r - L.A
        r = (r - fr * pow(dfr, -1, mod)) % mod
    return r % (p ** k)


def valuation(z: QuadRingElem, P: PrimeIdeal) -> int | float:
    """P-adic valuation of a nonzero integral element; inf for zero."""
    z = z.to_int_elem()
    if z.is_zero():
        return float("inf")
    p = P.p
    if P.d == 1:
        v, n = 0, z.x
        while n % p == 0:
            n //= p
            v += 1
        return v
    x, y = z.x, z.y
    if P.f == 2:
        v = 0
        while x % p == 0 and y % p == 0:
            x //= p
            y //= p
            v += 1
        return v
    if P.e == 2:
        a = 0
        while x % p == 0 and y % p == 0:
            x //= p
            y //= p
            a += 1
        return 2 * a + (1 if QuadRingElem(x, y, P.d).norm() % p == 0 else 0)
    v = 0
    bound = 0
    n = abs(z.norm())
    while n % p == 0:
        n //= p
        bound += 1
    while v < bound:
        k = v + 1
        rk = _lift_root(P.L, P.root, p, k)
        if (x + y * rk) % (p ** k):
            break
        v = k
    return v


def in_ideal_power(z: QuadRingElem, P: PrimeIdeal, k: int) -> bool:
    if k <= 0:
        return True
    return valuation(z, P) >= k


class ResidueRing:
    """O_L / P^k for an unramified prime P, with elements coded as integers.

    f = 1: code c in [0, p^k), the image of x + y*w is x + y*r_k.
    f = 2: code x + p^k * y with x, y in [0, p^k).
    """

    def __init__(self, P: PrimeIdeal, k: int):
        if P.e != 1:
            raise FieldError("residue rings are implemented for unramified primes only")
        if k < 1:
            raise FieldError("k must be positive")
        self.P, self.k = P, k
        self.p = P.p
        self.mod = P.p ** k
        self.f = P.f
        self.size = self.mod ** self.f
        L = P.L
        self.A, self.B = L.A, L.B
        self.root = _lift_root(L, P.root, P.p, k) if (self.f == 1 and P.d != 1) else 0

    def encode(self, z: QuadRingElem) -> int:
        z = z.to_int_elem()
        if self.f == 1:
            return (z.x + z.y * self.root) % self.mod
        return (z.x % self.mod) + self.mod * (z.y % self.mod)

    def decode(self, code: int) -> QuadRingElem:
        if self.f == 1:
            return QuadRingElem(code, 0, self.P.d)
        return QuadRingElem(code % self.mod, code // self.mod, self.P.d)

    # numpy-friendly component form
    def split(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        if self.f == 1:
            return (codes,)
        return (codes % self.mod, codes // self.mod)

    def join(self, comps):
        if self.f == 1:
            return comps[0] % self.mod
        return (comps[0] % self.mod) + self.mod * (comps[1] % self.mod)

    def mul(self, a, b):
        """Product of codes (ints or int64 arrays)."""
        m = self.mod
        if self.f == 1:
            return (a * b) % m
        a0, a1 = a % m, a // m
        b0, b1 = b % m, b // m
        t = (a1 * b1) % m
        c0 = (a0 * b0 + self.B * t) % m
        c1 = (a0 * b1 + a1 * b0 + self.A * t) % m
        return c0 + m * c1

    def add(self, a, b):
        m = self.mod
        if self.f == 1:
            return (a + b) % m
        return ((a % m + b % m) % m) + m * (((a // m) + (b // m)) % m)

    def scale(self, n: int, a):
        m = self.mod
        if self.f == 1:
            return (n * a) % m
        return ((n * (a % m)) % m) + m * ((n * (a // m)) % m)

    def valuation(self, a):
        """Valuation of codes, capped at k (vectorized)."""
        m = self.mod
        comps = [a % m] if self.f == 1 else [a % m, a // m]
        v = np.zeros(np.shape(a), dtype=np.int64)
        pj = 1
        for _ in range(self.k):
            pj *= self.p
            hit = np.ones(np.shape(a), dtype=bool)
            for c in comps:
                hit &= (c % pj) == 0
            v += hit
        return v

    def pow(self, a: int, e: int) -> int:
        out = self.encode(QuadRingElem(1, 0, self.P.d))
        while e:
            if e & 1:
                out = int(self.mul(out, a))
            a = int(self.mul(a, a))
            e >>= 1
        return out

    def squares(self) -> set:
        codes = np.arange(self.size, dtype=np.int64)
        return set(np.unique(self.mul(codes, codes)).tolist())


def residue_symbol(z: QuadRingElem, P: PrimeIdeal) -> int:
    """Quadratic residue symbol (z / P) for unramified P; 0 when z lies in P."""
    if P.e != 1:
        raise FieldError("residue symbol needs an unramified prime")
    R = ResidueRing(P, 1)
    c = R.encode(z)
    if c == 0:
        return 0
    if P.p == 2:
        return 1
    t = R.pow(c, (P.norm - 1) // 2)
    return 1 if t == R.encode(QuadRingElem(1, 0, P.d)) else -1


SQUARE_RING_BOUND = 1 << 20


def is_square_mod_power(z: QuadRingElem, P: PrimeIdeal, k: int, size_bound: int = SQUARE_RING_BOUND) -> bool:
    """Is z congruent to a square modulo P^k (full enumeration of O/P^k)?"""
    if k < 1:
        raise FieldError("k must be positive")
    R = ResidueRing(P, k)
    if R.size > size_bound:
        raise SizeBoundError(f"O/P^{k} has {R.size} elements, above bound {size_bound}")
    return R.encode(z) in R.squares()


def dyadic_primes(L: RealQuadField) -> tuple:
    return primes_above(L, 2)


def odd_prime_factors_of_norm(z: QuadRingElem) -> list[int]:
    return prime_factors(int(z.norm()))
