"""Built-in oracle corpus, runnable from the CLI as ``evilforge selftest``."""

from __future__ import annotations

from fractions import Fraction

from . import _enum
from . import exactlin as el
from .certificate import from_json, to_json
from .localrep import local_case_IIa, local_case_IIb, local_oracle
from .polarize import certify_evil, embed_OL, pol_lattices, product_polarization, q_lambda, verify_certificate
from .quatalg import QuatMat2, lambda_O, make_Bp
from .realquad import class_number, field, fundamental_unit, primes_above
from .ssembed import lambda_R


def _orders() -> bool:
    for p in (2, 3, 5, 7, 11, 13):
        c = make_Bp(p)[1].certify()
        if not (c["ring_closed"] and c["disc_ok"] and c["ramification_ok"]):
            return False
    return True


def _units() -> bool:
    L2, L3, L5 = field(2), field(3), field(5)
    return (
        fundamental_unit(L2) == L2(1, 1)
        and fundamental_unit(L3) == L3(2, 1)
        and fundamental_unit(L5) == L5(0, 1)
        and class_number(field(10)) == 2
    )


def _enumeration() -> bool:
    for p in (2, 3, 5, 7):
        lat = lambda_O(make_Bp(p)[1])
        for t in range(0, 13):
            if el.fincke_pohst(lat, t) != el.box_enumerate(lat, t):
                return False
    return True


def _kernels() -> bool:
    if _enum.BACKEND != "cython":
        return True
    g = [list(r) for r in lambda_R(field(5), make_Bp(3)[1]).trace_lattice.gram]
    for b2 in (0, 10, 40, 80):
        a = sorted(_enum.enumerate_short(g, b2, backend="cython"))
        b = sorted(_enum.enumerate_short(g, b2, backend="python"))
        if a != b:
            return False
    return True


def _local() -> bool:
    Q = field(1)
    for p in (3, 5, 7):
        P = primes_above(Q, p)[0]
        for m in range(1, 40):
            if m % p == 0:
                continue
            if local_case_IIa(Q, P, Q(m)).representable != local_oracle(Q, P, Q(m), 3, p).representable:
                return False
    P2 = primes_above(Q, 2)[0]
    for m in range(1, 40, 2):
        if local_case_IIb(Q, P2, Q(m)).representable != local_oracle(Q, P2, Q(m), 4, 2).representable:
            return False
    return True


def _base_change() -> bool:
    for p in (2, 3, 5):
        lo = lambda_O(make_Bp(p)[1]).gram
        form = lambda_R(field(5), make_Bp(p)[1])
        if any(form.gram[i][j] != field(5)(lo[i][j]) for i in range(3) for j in range(3)):
            return False
    return True


def _quinary() -> bool:
    B, O = make_Bp(2)
    PL = pol_lattices(product_polarization(O), O)
    i = B(0, 1)
    C = QuatMat2(B(1), i * 2, -i * 2, B(-1))
    emb = embed_OL(C, 5, PL)
    return q_lambda(C) == 5 and emb.omega == QuatMat2(B(1), i, -i, B(0))


def _certificate() -> bool:
    out = certify_evil(2, 1, (1,), (1,))
    if out.certificate is None:
        return False
    text = to_json(out.certificate)
    if not verify_certificate(text)[0]:
        return False
    bad = out.certificate.__class__(**{**out.certificate.__dict__, "b": (3,)})
    return from_json(to_json(out.certificate)) == out.certificate and not verify_certificate(bad)[0]


CHECKS = (
    ("maximal order models", _orders),
    ("fundamental units and class numbers", _units),
    ("enumeration vs box oracle", _enumeration),
    ("compiled vs python kernel", _kernels),
    ("closed-form local criteria vs residue oracle", _local),
    ("ternary form base change", _base_change),
    ("quinary example and O_L embedding", _quinary),
    ("certificate round trip and mutation", _certificate),
)


def run_all() -> list[tuple[str, bool]]:
    out = []
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
        except Exception:  # noqa: BLE001 - a crash is a failed check
            ok = False
        out.append((name, ok))
    return out
