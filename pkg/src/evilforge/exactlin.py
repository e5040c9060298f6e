"""Exact integer and rational linear algebra for lattice work.

Everything here works on plain Python integers and ``Fraction`` values.
Matrices are lists (or tuples) of rows; vectors are row vectors and linear
maps act on the right (``x -> x @ F``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Sequence

from . import _enum

INF = "inf"


class LatticeError(ValueError):
    """Raised for malformed lattice input (rank/dimension/definiteness)."""


# ----------------------------------------------------------------------------
# small matrix helpers


def mat_mul(a, b):
    n, k = len(a), len(b)
    if n == 0:
        return []
    m = len(b[0]) if k else 0
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def det(m) -> Fraction | int:
    """Determinant by fraction-free Bareiss elimination (exact for Fractions too)."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                if isinstance(num, int) and isinstance(prev, int):
                    a[i][j] = num // prev
                else:
                    a[i][j] = Fraction(num) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def leading_minors(g) -> list:
    """[1, det g[:1,:1], ..., det g]."""
    return [1] + [det([row[:k] for row in g[:k]]) for k in range(1, len(g) + 1)]


def is_positive_definite(g) -> bool:
    return all(x > 0 for x in leading_minors(g)[1:])


def solve_rational(a, b):
    """Solve x @ a = b for a square nonsingular rational matrix ``a``."""
    n = len(a)
    # transpose system: a^T x^T = b^T
    aug = [[Fraction(a[j][i]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            raise LatticeError("singular system")
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [v / pv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [aug[i][n] for i in range(n)]


def rank(rows) -> int:
    return len(hnf_basis(rows))


def lcm_denominator(values: Iterable) -> int:
    out = 1
    for v in values:
        den = Fraction(v).denominator
        out = out * den // gcd(out, den)
    return out


# ----------------------------------------------------------------------------
# Hermite normal form


def hnf(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``H == U @ m``. Pivots are
    positive, entries above a pivot lie in ``[0, pivot)``, zero rows come last.
    """
    a = [list(map(int, r)) for r in m]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    u = identity(nr)
    prow = 0
    for col in range(nc):
        if prow >= nr:
            break
        while True:
            nz = [i for i in range(prow, nr) if a[i][col] != 0]
            if not nz:
                break
            best = min(nz, key=lambda i: abs(a[i][col]))
            if best != prow:
                a[prow], a[best] = a[best], a[prow]
                u[prow], u[best] = u[best], u[prow]
            pv = a[prow][col]
            done = True
            for i in range(prow + 1, nr):
                if a[i][col] != 0:
                    q = a[i][col] // pv
                    if q:
                        a[i] = [x - q * y for x, y in zip(a[i], a[prow])]
                        u[i] = [x - q * y for x, y in zip(u[i], u[prow])]
                    if a[i][col] != 0:
                        done = False
            if done:
                break
        if prow < nr and a[prow][col] != 0:
            if a[prow][col] < 0:
                a[prow] = [-x for x in a[prow]]
                u[prow] = [-x for x in u[prow]]
            pv = a[prow][col]
            for i in range(prow):
                q = a[i][col] // pv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[prow])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[prow])]
            prow += 1
    return a, u


def hnf_basis(rows) -> tuple[tuple[int, ...], ...]:
    rows = [r for r in rows]
    if not rows:
        return ()
    h, _ = hnf(rows)
    return tuple(tuple(r) for r in h if any(r))


def _pivots(basis) -> list[int]:
    return [next(j for j, v in enumerate(r) if v) for r in basis]


# ----------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class IntLattice:
    """A sublattice of Z^ambient_dim with an HNF basis and optional even Gram.

    ``gram[i][j] = b(b_i, b_j)`` with ``b(x, y) = q(x+y) - q(x) - q(y)``, so the
    diagonal holds ``2 q(b_i)``.
    """

    ambient_dim: int
    basis: tuple[tuple[int, ...], ...]
    gram: tuple[tuple[int, ...], ...] | None = None

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coords(self, v) -> tuple[int, ...] | None:
        """Integer coefficients of ``v`` on the basis, or None if ``v`` is not in the lattice."""
        v = [Fraction(x) for x in v]
        if len(v) != self.ambient_dim:
            raise LatticeError("ambient dimension mismatch")
        if any(x.denominator != 1 for x in v):
            return None
        rest = [int(x) for x in v]
        out = []
        for row, pc in zip(self.basis, _pivots(self.basis)):
            q, r = divmod(rest[pc], row[pc])
            if r:
                return None
            out.append(q)
            if q:
                rest = [x - q * y for x, y in zip(rest, row)]
        if any(rest):
            return None
        return tuple(out)

    def __contains__(self, v) -> bool:
        return self.coords(v) is not None

    def vector(self, coeffs) -> tuple[int, ...]:
        out = [0] * self.ambient_dim
        for c, row in zip(coeffs, self.basis):
            if c:
                for j, x in enumerate(row):
                    out[j] += c * x
        return tuple(out)

    def with_gram(self, gram) -> "IntLattice":
        gram = tuple(tuple(int(x) for x in r) for r in gram)
        if len(gram) != self.rank or any(gram[i][j] != gram[j][i] for i in range(self.rank) for j in range(i)):
            raise LatticeError("gram must be symmetric of size rank")
        return IntLattice(self.ambient_dim, self.basis, gram)

    def with_ambient_gram(self, ambient_gram) -> "IntLattice":
        return self.with_gram(restrict_gram(self.basis, ambient_gram))

    def q(self, coeffs) -> Fraction:
        """Quadratic map value q(sum c_i b_i) from the even Gram."""
        g = self.gram
        if g is None:
            raise LatticeError("lattice carries no quadratic form")
        s = 0
        n = len(coeffs)
        for i in range(n):
            ci = coeffs[i]
            if ci:
                s += ci * ci * g[i][i]
                for j in range(i + 1, n):
                    s += 2 * ci * coeffs[j] * g[i][j]
        return Fraction(s, 2)


def restrict_gram(basis, ambient_gram):
    g = mat_mul(mat_mul(basis, ambient_gram), transpose(basis))
    out = []
    for r in g:
        row = []
        for x in r:
            x = Fraction(x)
            if x.denominator != 1:
                raise LatticeError("restricted gram is not integral")
            row.append(int(x))
        out.append(tuple(row))
    return tuple(out)


def lattice(generators, ambient_dim: int | None = None, ambient_gram=None) -> IntLattice:
    """Lattice spanned by integer generators (HNF basis)."""
    gens = [tuple(int(x) for x in g) for g in generators]
    if ambient_dim is None:
        if not gens:
            raise LatticeError("ambient_dim required for an empty generator list")
        ambient_dim = len(gens[0])
    if any(len(g) != ambient_dim for g in gens):
        raise LatticeError("generator dimension mismatch")
    lat = IntLattice(ambient_dim, hnf_basis(gens))
    if ambient_gram is not None:
        lat = lat.with_ambient_gram(ambient_gram)
    return lat


def standard_lattice(n: int) -> IntLattice:
    return IntLattice(n, tuple(tuple(r) for r in identity(n)), tuple(tuple(2 * x for x in r) for r in identity(n)))


def lattice_intersect(l1: IntLattice, l2: IntLattice, ambient_gram=None) -> IntLattice:
    """L1 ∩ L2 via the Zassenhaus stacking [[B1, B1], [B2, 0]]."""
    if l1.ambient_dim != l2.ambient_dim:
        raise LatticeError("ambient dimension mismatch")
    n = l1.ambient_dim
    stacked = [list(r) + list(r) for r in l1.basis] + [list(r) + [0] * n for r in l2.basis]
    if not stacked:
        return IntLattice(n, ())
    h, _ = hnf(stacked)
    gens = [r[n:] for r in h if not any(r[:n]) and any(r[n:])]
    out = lattice(gens, n)
    if ambient_gram is not None:
        out = out.with_ambient_gram(ambient_gram)
    return out


def lattice_sum(l1: IntLattice, l2: IntLattice) -> IntLattice:
    if l1.ambient_dim != l2.ambient_dim:
        raise LatticeError("ambient dimension mismatch")
    return lattice(list(l1.basis) + list(l2.basis), l1.ambient_dim)


def kernel_mod_lattice(f, lat: IntLattice, target: IntLattice | None = None) -> IntLattice:
    """{x in lat : x @ f in target}; ``target=None`` means the zero lattice.

    ``f`` is an ambient_dim x k matrix with rational entries; rational maps
    are cleared of denominators, with the target scaled to match.
    """
    if len(f) != lat.ambient_dim:
        raise LatticeError("map dimension mismatch")
    k = len(f[0]) if f else 0
    den = lcm_denominator(x for r in f for x in r)
    fi = [[int(Fraction(x) * den) for x in r] for r in f]
    tgt_rows = [] if target is None else [[den * x for x in r] for r in target.basis]
    if target is not None and target.ambient_dim != k:
        raise LatticeError("target dimension mismatch")
    r = lat.rank
    images = mat_mul([list(b) for b in lat.basis], fi) if r else []
    stacked = [list(images[i]) + [int(i == j) for j in range(r)] for i in range(r)]
    stacked += [list(t) + [0] * r for t in tgt_rows]
    if not stacked:
        return lat
    h, _ = hnf(stacked)
    coeffs = [row[k:] for row in h if not any(row[:k]) and any(row[k:])]
    gens = [lat.vector(c) for c in coeffs]
    return lattice(gens, lat.ambient_dim)


def integer_kernel(f) -> list[tuple[int, ...]]:
    """Basis of {x in Z^n : x @ f = 0}."""
    n = len(f)
    return list(kernel_mod_lattice(f, IntLattice(n, tuple(tuple(r) for r in identity(n)))).basis)


def saturation(lat: IntLattice) -> IntLattice:
    """(Q-span of lat) ∩ Z^n."""
    n = lat.ambient_dim
    if lat.rank == 0:
        return lat
    orth = integer_kernel(transpose([list(b) for b in lat.basis]))
    if not orth:
        return IntLattice(n, tuple(tuple(r) for r in identity(n)))
    return kernel_mod_lattice(transpose(orth), IntLattice(n, tuple(tuple(r) for r in identity(n))))


def is_saturated(lat: IntLattice) -> bool:
    return saturation(lat).basis == lat.basis


def index_in(sub: IntLattice, sup: IntLattice) -> int:
    """[sup : sub] for equal-rank lattices with sub ⊆ sup."""
    if sub.rank != sup.rank:
        raise LatticeError("index needs equal ranks")
    coords = []
    for v in sub.basis:
        c = sup.coords(v)
        if c is None:
            raise LatticeError("not a sublattice")
        coords.append(list(c))
    return abs(int(det(coords)))


# ----------------------------------------------------------------------------
# reduction and enumeration


def lll_gram(gram, delta=Fraction(3, 4)):
    """Exact LLL on a Gram matrix; returns (T, T @ gram @ T^T) with T unimodular."""
    n = len(gram)
    g = [[Fraction(x) for x in r] for r in gram]
    t = identity(n)

    def gso(g):
        mu = [[Fraction(0)] * n for _ in range(n)]
        bstar = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                s = g[i][j] - sum(mu[j][k] * mu[i][k] * bstar[k] for k in range(j))
                mu[i][j] = s / bstar[j]
            bstar[i] = g[i][i] - sum(mu[i][k] ** 2 * bstar[k] for k in range(i))
        return mu, bstar

    k = 1
    mu, bstar = gso(g)
    while k < n:
        for j in range(k - 1, -1, -1):
            c = round(mu[k][j])
            if c:
                t[k] = [x - c * y for x, y in zip(t[k], t[j])]
                g = _reindex_gram(gram, t)
                mu, bstar = gso(g)
        if bstar[k] >= (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            t[k], t[k - 1] = t[k - 1], t[k]
            g = _reindex_gram(gram, t)
            mu, bstar = gso(g)
            k = max(k - 1, 1)
    return t, [[int(x) for x in r] for r in _reindex_gram(gram, t)]


@lru_cache(maxsize=256)
def _lll_cached(gram: tuple):
    return lll_gram(gram)


def _reindex_gram(gram, t):
    return [[Fraction(x) for x in r] for r in mat_mul(mat_mul(t, gram), transpose(t))]


def _check_definite(gram):
    if not is_positive_definite(gram):
        raise LatticeError("Gram matrix is not positive definite")


def short_vectors(lat: IntLattice, bound, exact: bool = False) -> list[tuple[Fraction, tuple[int, ...]]]:
    """All (q(v), coords) with q(v) <= bound (q(v) == bound if exact), sorted by value then coordinates."""
    if lat.gram is None:
        raise LatticeError("lattice carries no quadratic form")
    if lat.rank == 0:
        return [(Fraction(0), ())] if (bound == 0 or (bound > 0 and not exact)) else []
    _check_definite(lat.gram)
    b2 = int(Fraction(bound) * 2 // 1)
    if b2 < 0:
        return []
    t, red = _lll_cached(lat.gram)
    out = []
    if exact and Fraction(bound) * 2 != b2:
        return []
    for y, val in _enum.enumerate_short(red, b2, exact=exact):
        x = tuple(sum(y[i] * t[i][j] for i in range(len(y))) for j in range(len(y)))
        out.append((Fraction(val, 2), x))
    out.sort()
    return out


def fincke_pohst(lat: IntLattice, target) -> list[tuple[int, ...]]:
    """Every v in lat with q(v) == target, as coordinate vectors, sorted lexicographically."""
    target = Fraction(target)
    if target < 0:
        return []
    return sorted(x for val, x in short_vectors(lat, target, exact=True))


def box_enumerate(lat: IntLattice, target) -> list[tuple[int, ...]]:
    """Naive enumeration over the Cholesky box; used to cross-check fincke_pohst."""
    from itertools import product

    g = lat.gram
    _check_definite(g)
    n = lat.rank
    target = Fraction(target)
    # |x_i| <= sqrt(2 T * (G^-1)_ii)
    d = det(g)
    bounds = []
    for i in range(n):
        minor = det([[g[r][c] for c in range(n) if c != i] for r in range(n) if r != i])
        bounds.append(isqrt(int(2 * target * Fraction(minor) / d)) + 1)
    return sorted(
        x for x in product(*[range(-b, b + 1) for b in bounds]) if lat.q(x) == target
    )


# ----------------------------------------------------------------------------
# rational quadratic form invariants


@dataclass(frozen=True)
class QFormDiag:
    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        if any(c == 0 for c in self.coefficients):
            raise LatticeError("diagonal form with a zero coefficient")

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def determinant(self) -> Fraction:
        out = Fraction(1)
        for c in self.coefficients:
            out *= c
        return out


def diagonalize_over_Q(gram) -> QFormDiag:
    """Congruence diagonalization by symmetric elimination."""
    n = len(gram)
    a = [[Fraction(x) for x in r] for r in gram]
    diag = []
    for i in range(n):
        if a[i][i] == 0:
            j = next((j for j in range(i + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[i], a[j] = a[j], a[i]
                for r in a:
                    r[i], r[j] = r[j], r[i]
            else:
                j = next((j for j in range(i + 1, n) if a[i][j] != 0), None)
                if j is None:
                    raise LatticeError("degenerate form")
                for c in range(n):
                    a[i][c] += a[j][c]
                for r in range(n):
                    a[r][i] += a[r][j]
        piv = a[i][i]
        for j in range(i + 1, n):
            f = a[j][i] / piv
            if f:
                for c in range(i, n):
                    a[j][c] -= f * a[i][c]
                for r in range(i, n):
                    a[r][j] -= f * a[r][i]
        diag.append(piv)
    return QFormDiag(tuple(diag))


def squarefree_part(x) -> int:
    """Signed squarefree integer in the square class of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no square class")
    n = x.numerator * x.denominator
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
        if n % p == 0:
            out *= p
            n //= p
        p += 1
    return sign * out * n


def _valuation(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def hilbert_symbol(a, b, place) -> int:
    """Hilbert symbol (a, b) at a prime ``place`` or at ``"inf"``."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("hilbert symbol needs nonzero arguments")
    a_i = a.numerator * a.denominator
    b_i = b.numerator * b.denominator
    if place == INF or place == float("inf"):
        return -1 if (a_i < 0 and b_i < 0) else 1
    p = int(place)
    al, u = _valuation(a_i, p)
    be, v = _valuation(b_i, p)
    if p == 2:
        eps = lambda z: ((z - 1) // 2) % 2
        omg = lambda z: ((z * z - 1) // 8) % 2
        e = eps(u) * eps(v) + al * omg(v) + be * omg(u)
        return -1 if e % 2 else 1
    s = (-1) ** (al * be * ((p - 1) // 2))
    if be % 2:
        s *= legendre(u, p)
    if al % 2:
        s *= legendre(v, p)
    return s


def hasse_invariant(form: QFormDiag, place) -> int:
    c = form.coefficients
    out = 1
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            out *= hilbert_symbol(c[i], c[j], place)
    return out


def prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == [n]
