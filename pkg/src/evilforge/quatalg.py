"""Definite quaternion algebras ramified at one prime, their maximal orders,
the trace-zero congruence lattice, and 2x2 matrices over the algebra."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from . import exactlin as el
from .exactlin import IntLattice, LatticeError, hilbert_symbol, is_prime, legendre


class QuatError(ValueError):
    pass


@dataclass(frozen=True)
class QuatAlgebra:
    """(a, b | Q): i^2 = a, j^2 = b, ij = -ji."""

    a: int
    b: int
    p: int

    def __call__(self, t=0, x=0, y=0, z=0) -> "QuatElem":
        return QuatElem(Fraction(t), Fraction(x), Fraction(y), Fraction(z), self.a, self.b)

    def one(self):
        return self(1)

    def basis(self):
        return [self(1), self(0, 1), self(0, 0, 1), self(0, 0, 0, 1)]

    def ramified_places(self, up_to: int = 100) -> list:
        out = []
        if hilbert_symbol(self.a, self.b, el.INF) == -1:
            out.append(el.INF)
        for q in range(2, up_to + 1):
            if is_prime(q) and hilbert_symbol(self.a, self.b, q) == -1:
                out.append(q)
        return out


@dataclass(frozen=True)
class QuatElem:
    t: Fraction
    x: Fraction
    y: Fraction
    z: Fraction
    a: int
    b: int

    def coords(self) -> tuple:
        return (self.t, self.x, self.y, self.z)

    def _new(self, t, x, y, z):
        return QuatElem(t, x, y, z, self.a, self.b)

    def _coerce(self, o):
        if isinstance(o, QuatElem):
            if (o.a, o.b) != (self.a, self.b):
                raise QuatError("elements of different algebras")
            return o
        if isinstance(o, (int, Fraction)):
            return self._new(Fraction(o), Fraction(0), Fraction(0), Fraction(0))
        return NotImplemented

    def __add__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        return self._new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.t, -self.x, -self.y, -self.z)

    def __sub__(self, o):
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        return self._new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return self._new(self.t * o, self.x * o, self.y * o, self.z * o)
        o = self._coerce(o)
        if o is NotImplemented:
            return o
        a, b = self.a, self.b
        t1, x1, y1, z1 = self.coords()
        t2, x2, y2, z2 = o.coords()
        return self._new(
            t1 * t2 + a * x1 * x2 + b * y1 * y2 - a * b * z1 * z2,
            t1 * x2 + x1 * t2 - b * y1 * z2 + b * z1 * y2,
            t1 * y2 + y1 * t2 + a * x1 * z2 - a * z1 * x2,
            t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2,
        )

    def __rmul__(self, o):
        if isinstance(o, (int, Fraction)):
            return self * o
        return NotImplemented

    def __truediv__(self, n):
        n = Fraction(n)
        return self._new(self.t / n, self.x / n, self.y / n, self.z / n)

    def conj(self):
        return self._new(self.t, -self.x, -self.y, -self.z)

    def trd(self) -> Fraction:
        return 2 * self.t

    def nrd(self) -> Fraction:
        a, b = self.a, self.b
        return self.t ** 2 - a * self.x ** 2 - b * self.y ** 2 + a * b * self.z ** 2

    def inverse(self):
        n = self.nrd()
        if n == 0:
            raise ZeroDivisionError("zero quaternion")
        return self.conj() / n

    def is_zero(self) -> bool:
        return not any(self.coords())

    def is_scalar(self) -> bool:
        return self.x == 0 and self.y == 0 and self.z == 0

    def __repr__(self):
        return f"Q({self.t}, {self.x}, {self.y}, {self.z})"


class MaximalOrder:
    """A Z-order given by four basis quaternions (rows of rational coordinates)."""

    def __init__(self, algebra: QuatAlgebra, basis):
        self.algebra = algebra
        self.basis = tuple(basis)
        if len(self.basis) != 4:
            raise QuatError("an order needs four basis elements")
        self._mat = [list(e.coords()) for e in self.basis]
        if el.det(self._mat) == 0:
            raise QuatError("basis is linearly dependent")

    @property
    def p(self) -> int:
        return self.algebra.p

    def to_coords(self, q: QuatElem) -> tuple:
        return tuple(el.solve_rational(self._mat, q.coords()))

    def int_coords(self, q: QuatElem) -> tuple | None:
        c = self.to_coords(q)
        if any(v.denominator != 1 for v in c):
            return None
        return tuple(int(v) for v in c)

    def __contains__(self, q: QuatElem) -> bool:
        return self.int_coords(q) is not None

    def from_coords(self, c) -> QuatElem:
        out = self.algebra(0)
        for ci, e in zip(c, self.basis):
            if ci:
                out = out + e * Fraction(ci)
        return out

    def one_coords(self) -> tuple:
        return self.int_coords(self.algebra.one())

    def is_ring(self) -> bool:
        if self.algebra.one() not in self:
            return False
        return all(e * f in self for e in self.basis for f in self.basis)

    def trd_gram(self):
        """Trd(e_i conj(e_j)); also the even Gram of Nrd in these coordinates."""
        return [[int((e * f.conj()).trd()) for f in self.basis] for e in self.basis]

    def trd_vector(self):
        return [int(e.trd()) for e in self.basis]

    def discriminant_det(self) -> int:
        return int(el.det(self.trd_gram()))

    def norm_lattice(self) -> IntLattice:
        return IntLattice(4, tuple(tuple(r) for r in el.identity(4)), tuple(tuple(r) for r in self.trd_gram()))

    def certify(self, up_to: int = 100) -> dict:
        p = self.p
        ram = self.algebra.ramified_places(up_to)
        return {
            "ring_closed": self.is_ring(),
            "disc_det": self.discriminant_det(),
            "disc_ok": self.discriminant_det() == p * p,
            "ramified": ram,
            "ramification_ok": ram == [el.INF, p],
        }

    def __repr__(self):
        return f"MaximalOrder(p={self.p}, basis={self.basis})"


def _aux_prime(p: int) -> int:
    q = 3
    while True:
        if is_prime(q) and q % 4 == 3 and legendre(q, p) == -1:
            return q
        q += 4


def _candidates(p: int):
    h = Fraction(1, 2)
    if p == 2:
        B = QuatAlgebra(-1, -1, 2)
        i, j, k = B(0, 1), B(0, 0, 1), B(0, 0, 0, 1)
        yield B, [B(1), i, j, (B(1) + i + j + k) * h]
    elif p % 4 == 3:
        B = QuatAlgebra(-1, -p, p)
        i, j, k = B(0, 1), B(0, 0, 1), B(0, 0, 0, 1)
        yield B, [B(1), i, (i + j) * h, (B(1) + k) * h]
        yield B, [B(1), i, (B(1) + j) * h, (i + k) * h]
    elif p % 8 == 5:
        B = QuatAlgebra(-2, -p, p)
        i, j, k = B(0, 1), B(0, 0, 1), B(0, 0, 0, 1)
        yield B, [(B(1) + j + k) * h, (i + j * 2 + k) * Fraction(1, 4), j, k]
    else:
        q = _aux_prime(p)
        B = QuatAlgebra(-q, -p, p)
        i, j, k = B(0, 1), B(0, 0, 1), B(0, 0, 0, 1)
        c = next(c for c in range(q) if (c * c * p + 1) % q == 0)
        # Pizer's order for (-p, -q) with the generators' roles exchanged
        yield B, [(B(1) + i) * h, (j - k) * h, (i - k * c) * Fraction(1, q), -k]
        yield B, [(B(1) + j) * h, (i - k) * h, (j - k * c) * Fraction(1, q), -k]


@lru_cache(maxsize=None)
def make_Bp(p: int) -> tuple[QuatAlgebra, MaximalOrder]:
    """Quaternion algebra ramified at {p, inf} with an explicit maximal order."""
    if not is_prime(p):
        raise QuatError(f"{p} is not prime")
    for B, basis in _candidates(p):
        try:
            O = MaximalOrder(B, basis)
        except QuatError:
            continue
        if O.is_ring() and O.discriminant_det() == p * p:
            return B, O
    raise QuatError(f"no verified maximal order model for p={p}")  # pragma: no cover


@lru_cache(maxsize=None)
def lambda_O(O: MaximalOrder) -> IntLattice:
    """Trace-zero elements of Z + 2O, in O-coordinates, with q = Nrd."""
    one = O.one_coords()
    gens = [one] + [tuple(2 * int(i == j) for j in range(4)) for i in range(4)]
    z2O = el.lattice(gens, 4)
    trd = [[t] for t in O.trd_vector()]
    lam = el.kernel_mod_lattice(trd, z2O)
    if lam.rank != 3:
        raise LatticeError("trace-zero lattice has wrong rank")  # pragma: no cover
    return lam.with_ambient_gram(O.trd_gram())


def index_trace_zero(O: MaximalOrder) -> int:
    """[O^0 : Lambda_O] where O^0 is the trace-zero sublattice of O."""
    full = el.kernel_mod_lattice([[t] for t in O.trd_vector()], el.lattice(el.identity(4)))
    return el.index_in(lambda_O(O), full)


# ----------------------------------------------------------------------------
# 2x2 matrices over B


@dataclass(frozen=True)
class QuatMat2:
    """[[a, b], [c, d]] with quaternion entries."""

    a: QuatElem
    b: QuatElem
    c: QuatElem
    d: QuatElem

    @staticmethod
    def scalar(B: QuatAlgebra, n) -> "QuatMat2":
        z = B(0)
        return QuatMat2(B(n), z, z, B(n))

    @staticmethod
    def zero(B: QuatAlgebra) -> "QuatMat2":
        z = B(0)
        return QuatMat2(z, z, z, z)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __add__(self, o):
        return QuatMat2(*(x + y for x, y in zip(self.entries(), o.entries())))

    def __sub__(self, o):
        return QuatMat2(*(x - y for x, y in zip(self.entries(), o.entries())))

    def __neg__(self):
        return QuatMat2(*(-x for x in self.entries()))

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return QuatMat2(*(x * o for x in self.entries()))
        if isinstance(o, QuatElem):
            # scalar quaternion acting entrywise on the right
            return QuatMat2(*(x * o for x in self.entries()))
        return QuatMat2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __rmul__(self, o):
        if isinstance(o, (int, Fraction)):
            return self * o
        return NotImplemented

    def __truediv__(self, n):
        return QuatMat2(*(x / n for x in self.entries()))

    def vee(self) -> "QuatMat2":
        return QuatMat2(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())

    def trace(self) -> Fraction:
        return self.a.trd() + self.d.trd()

    def is_scalar(self) -> bool:
        return self.b.is_zero() and self.c.is_zero() and self.a.is_scalar() and self.a == self.d

    def scalar_value(self) -> Fraction:
        if not self.is_scalar():
            raise QuatError("matrix is not a rational scalar")
        return self.a.t

    def left_action_matrix(self):
        """8x8 rational matrix of v -> C v on B^2 (coordinates of (u, v) stacked)."""
        basis = [self._algebra()(*[int(i == j) for j in range(4)]) for i in range(4)]
        cols = []
        z = self._algebra()(0)
        for slot in range(2):
            for e in basis:
                u, v = (e, z) if slot == 0 else (z, e)
                top = self.a * u + self.b * v
                bot = self.c * u + self.d * v
                cols.append(list(top.coords()) + list(bot.coords()))
        return cols

    def _algebra(self) -> QuatAlgebra:
        return QuatAlgebra(self.a.a, self.a.b, 0)

    def deg(self) -> Fraction:
        """Positive square root of det of the left action on B^2."""
        D = Fraction(el.det(self.left_action_matrix()))
        if D < 0:
            raise QuatError("negative regular determinant")  # pragma: no cover
        return rational_sqrt(D)

    def to_coords(self, O: MaximalOrder) -> tuple:
        out = []
        for e in self.entries():
            out.extend(O.to_coords(e))
        return tuple(out)

    @staticmethod
    def from_coords(O: MaximalOrder, c) -> "QuatMat2":
        c = list(c)
        return QuatMat2(*(O.from_coords(c[4 * k : 4 * k + 4]) for k in range(4)))

    def __repr__(self):
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


def rational_sqrt(x: Fraction) -> Fraction:
    x = Fraction(x)
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn != n or rd * rd != d:
        raise QuatError(f"{x} is not a rational square")
    return Fraction(rn, rd)


def mat2_mul(x: QuatMat2, y: QuatMat2) -> QuatMat2:
    return x * y


def mat2_vee(x: QuatMat2) -> QuatMat2:
    return x.vee()


def mat2_trace(x: QuatMat2) -> Fraction:
    return x.trace()


def deg(x: QuatMat2) -> Fraction:
    return x.deg()


def mat2_inverse(x: QuatMat2) -> QuatMat2:
    """Inverse via the left action on B^2 (general invertible matrices)."""
    B = x._algebra()
    m = x.left_action_matrix()  # rows are images of basis vectors
    cols = []
    for slot in range(2):
        target = [0] * 8
        target[4 * slot] = 1
        cols.append(el.solve_rational(m, target))
    # first column of Y is (y0, y1), second is (y2, y3) with each y a quaternion
    y = [B(*cols[0][0:4]), B(*cols[0][4:8]), B(*cols[1][0:4]), B(*cols[1][4:8])]
    return QuatMat2(y[0], y[2], y[1], y[3])
