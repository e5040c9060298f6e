"""Canonical JSON form of evil certificates.

All integers are decimal strings, quaternion coordinates are "num/den"
strings, keys appear in a fixed order. Parsing is strict: unknown or
missing keys and malformed numbers raise CertificateFormatError.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from . import exactlin as el
from .quatalg import QuatAlgebra, QuatElem, QuatMat2

FORMAT = "evilforge-certificate/1"

_INT = re.compile(r"-?(0|[1-9][0-9]*)\Z")
_RAT = re.compile(r"-?(0|[1-9][0-9]*)/[1-9][0-9]*\Z")

CHECK_NAMES = (
    "order",
    "polarization",
    "C_in_Lambda",
    "C_square",
    "iota_from_C",
    "iota_integral",
    "iota_symmetric",
    "iota_minpoly",
    "R_is_centralizer",
    "R_ring",
    "R_rosati",
    "x_in_Lambda_R",
    "N(x) = m",
    "alpha_in_R",
    "min-poly",
    "alpha_commutes",
    "rosati_conjugation",
    "x = b + 2 alpha",
    "m = 4c - b^2",
)


class CertificateFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EvilCertificate:
    p: int
    d: int
    b: tuple
    c: tuple
    m: tuple
    norm_disc: int
    algebra: tuple  # (a, b) of the Hilbert symbol presentation
    order_basis: tuple  # four QuatElem
    ambient: str  # "matrix2" or "quaternion" (L = Q)
    polarization: tuple | None  # (s, t, r)
    d_L: int
    C: QuatMat2 | None
    iota_omega: QuatMat2 | None
    R_basis: tuple
    x: object
    alpha: object
    checks: dict


def _flat(e) -> list:
    if isinstance(e, QuatMat2):
        return [v for q in e.entries() for v in q.coords()]
    return list(e.coords())


def canonical_basis(elems) -> tuple:
    """The row Hermite normal form basis of the Z-span of ``elems``.

    Bases in certificates must be in this form, so that a lattice has exactly
    one encoding.
    """
    elems = tuple(elems)
    if not elems:
        return ()
    q0 = elems[0].entries()[0] if isinstance(elems[0], QuatMat2) else elems[0]
    mk = lambda c: QuatElem(*c, q0.a, q0.b)  # noqa: E731
    rows = [_flat(e) for e in elems]
    n = el.lcm_denominator(v for r in rows for v in r)
    out = []
    for r in el.hnf_basis([[int(v * n) for v in r] for r in rows]):
        cs = [Fraction(v, n) for v in r]
        if isinstance(elems[0], QuatMat2):
            out.append(QuatMat2(*(mk(cs[4 * i:4 * i + 4]) for i in range(4))))
        else:
            out.append(mk(cs))
    return tuple(out)


def _s_int(v: int) -> str:
    return str(int(v))


def _s_rat(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _s_quat(q: QuatElem) -> list:
    return [_s_rat(c) for c in q.coords()]


def _s_elem(e) -> list:
    if isinstance(e, QuatMat2):
        return [_s_quat(q) for q in e.entries()]
    return _s_quat(e)


def to_dict(cert: EvilCertificate) -> dict:
    pol = None
    if cert.polarization is not None:
        s, t, r = cert.polarization
        pol = {"s": _s_int(s), "t": _s_int(t), "r": _s_quat(r)}
    return {
        "format": FORMAT,
        "p": _s_int(cert.p),
        "d": _s_int(cert.d),
        "b": [_s_int(v) for v in cert.b],
        "c": [_s_int(v) for v in cert.c],
        "m": [_s_int(v) for v in cert.m],
        "norm_disc": _s_int(cert.norm_disc),
        "algebra": {"a": _s_int(cert.algebra[0]), "b": _s_int(cert.algebra[1])},
        "order_basis": [_s_quat(q) for q in cert.order_basis],
        "ambient": cert.ambient,
        "polarization": pol,
        "d_L": _s_int(cert.d_L),
        "C": None if cert.C is None else _s_elem(cert.C),
        "iota_omega": None if cert.iota_omega is None else _s_elem(cert.iota_omega),
        "R_basis": [_s_elem(e) for e in cert.R_basis],
        "x": _s_elem(cert.x),
        "alpha": _s_elem(cert.alpha),
        "checks": {k: bool(cert.checks[k]) for k in CHECK_NAMES},
    }


def to_json(cert: EvilCertificate) -> str:
    return json.dumps(to_dict(cert), indent=2, ensure_ascii=True) + "\n"


# ----------------------------------------------------------------------------
# parsing


def _fail(msg: str):
    raise CertificateFormatError(msg)


def _keys(obj, keys, where):
    if not isinstance(obj, dict) or list(obj.keys()) != list(keys):
        _fail(f"{where}: expected keys {list(keys)}")


def _p_int(v, where) -> int:
    if not isinstance(v, str) or not _INT.match(v):
        _fail(f"{where}: expected a decimal integer string")
    return int(v)


def _p_rat(v, where) -> Fraction:
    if not isinstance(v, str) or not _RAT.match(v):
        _fail(f"{where}: expected a num/den string")
    return Fraction(v)


def _p_list(v, n, where) -> list:
    if not isinstance(v, list) or (n is not None and len(v) != n):
        _fail(f"{where}: expected a list of length {n}")
    return v


def _p_quat(v, alg: QuatAlgebra, where) -> QuatElem:
    cs = [_p_rat(x, where) for x in _p_list(v, 4, where)]
    return alg(*cs)


def _p_elem(v, alg, ambient, where):
    if ambient == "quaternion":
        return _p_quat(v, alg, where)
    qs = [_p_quat(q, alg, where) for q in _p_list(v, 4, where)]
    return QuatMat2(*qs)


_TOP = (
    "format", "p", "d", "b", "c", "m", "norm_disc", "algebra", "order_basis", "ambient",
    "polarization", "d_L", "C", "iota_omega", "R_basis", "x", "alpha", "checks",
)


def from_dict(obj) -> EvilCertificate:
    _keys(obj, _TOP, "certificate")
    if obj["format"] != FORMAT:
        _fail("unknown certificate format")
    p = _p_int(obj["p"], "p")
    d = _p_int(obj["d"], "d")
    width = None
    b = tuple(_p_int(v, "b") for v in _p_list(obj["b"], width, "b"))
    c = tuple(_p_int(v, "c") for v in _p_list(obj["c"], len(b), "c"))
    m = tuple(_p_int(v, "m") for v in _p_list(obj["m"], len(b), "m"))
    if len(b) not in (1, 2):
        _fail("b: expected one or two coordinates")
    _keys(obj["algebra"], ("a", "b"), "algebra")
    a_, b_ = _p_int(obj["algebra"]["a"], "algebra.a"), _p_int(obj["algebra"]["b"], "algebra.b")
    if a_ == 0 or b_ == 0:
        _fail("algebra: zero parameter")
    alg = QuatAlgebra(a_, b_, p)
    basis = tuple(_p_quat(q, alg, "order_basis") for q in _p_list(obj["order_basis"], 4, "order_basis"))
    ambient = obj["ambient"]
    if ambient not in ("matrix2", "quaternion"):
        _fail("ambient: expected matrix2 or quaternion")
    pol = obj["polarization"]
    if pol is not None:
        _keys(pol, ("s", "t", "r"), "polarization")
        pol = (_p_int(pol["s"], "s"), _p_int(pol["t"], "t"), _p_quat(pol["r"], alg, "r"))
    C = None if obj["C"] is None else _p_elem(obj["C"], alg, "matrix2", "C")
    io = None if obj["iota_omega"] is None else _p_elem(obj["iota_omega"], alg, "matrix2", "iota_omega")
    R = tuple(_p_elem(e, alg, ambient, "R_basis") for e in _p_list(obj["R_basis"], None, "R_basis"))
    x = _p_elem(obj["x"], alg, ambient, "x")
    alpha = _p_elem(obj["alpha"], alg, ambient, "alpha")
    _keys(obj["checks"], CHECK_NAMES, "checks")
    checks = {}
    for k in CHECK_NAMES:
        if not isinstance(obj["checks"][k], bool):
            _fail(f"checks.{k}: expected a boolean")
        checks[k] = obj["checks"][k]
    return EvilCertificate(
        p, d, b, c, m, _p_int(obj["norm_disc"], "norm_disc"), (a_, b_), basis, ambient, pol,
        _p_int(obj["d_L"], "d_L"), C, io, R, x, alpha, checks,
    )


def from_json(text) -> EvilCertificate:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CertificateFormatError("certificate is not UTF-8") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(f"malformed JSON: {exc}") from exc
    return from_dict(obj)
