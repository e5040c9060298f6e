"""Parameter grids shared by the scan command, the selftest and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .localrep import local_case_IIa, local_case_IIb, local_oracle, oracle_value_at, _form_coeffs
from .quatalg import make_Bp
from .realquad import PrimeIdeal, QuadRingElem, RealQuadField, in_ideal_power, splitting_type, totally_positive_reps
from .ssembed import (
    InputError,
    SearchBoundExceeded,
    abstract_order,
    check_thmA,
    embed_from_representation,
    from_m,
    global_represent,
    lambda_R,
    lambda_R_lattice,
)

IIA_PRIMES = (3, 5, 7, 11, 13)
IIA_FIELDS = (1, 5, 13)
IIB_FIELDS = (1, 5)
NORM_BOUND = 400
TRACE_BOUND = 600


@dataclass(frozen=True)
class LocalCase:
    p: int
    d: int
    prime: PrimeIdeal
    m: QuadRingElem
    level: int  # residue level of the exhaustive comparison


def _unramified_primes(L: RealQuadField, p: int):
    rep = splitting_type(L, p)
    return () if rep.kind == "ramified" else rep.primes


def iter_local_cases(norm_bound: int = NORM_BOUND):
    """IIa cases (levels p^3) and IIb cases (levels P^4) with m a unit at the prime."""
    for d in IIA_FIELDS:
        L = RealQuadField(d)
        ms = totally_positive_reps(L, norm_bound)
        for p in IIA_PRIMES:
            for P in _unramified_primes(L, p):
                for m in ms:
                    if not in_ideal_power(m, P, 1):
                        yield LocalCase(p, d, P, m, 3)
    for d in IIB_FIELDS:
        L = RealQuadField(d)
        ms = totally_positive_reps(L, norm_bound)
        for P in _unramified_primes(L, 2):
            for m in ms:
                if not in_ideal_power(m, P, 1):
                    yield LocalCase(2, d, P, m, 4)


@dataclass(frozen=True)
class LocalComparison:
    case: LocalCase
    closed_form: bool
    oracle: bool
    witness_ok: bool  # the oracle witness really solves N(x) = m modulo P^level

    @property
    def agrees(self) -> bool:
        return self.closed_form == self.oracle and self.witness_ok


def compare_local(case: LocalCase) -> LocalComparison:
    L = RealQuadField(case.d)
    P = case.prime
    verdict = local_case_IIa(L, P, case.m) if case.p != 2 else local_case_IIb(L, P, case.m)
    res = local_oracle(L, P, case.m, case.level, case.p)
    ok = True
    if res.representable:
        got = oracle_value_at(P, _form_coeffs(case.p), res.witness, case.level)
        ok = in_ideal_power(got - case.m, P, case.level)
    return LocalComparison(case, verdict.representable, res.representable, ok)


# ----------------------------------------------------------------------------
# local-global grid


@dataclass(frozen=True)
class GridRow:
    p: int
    d: int
    m: tuple
    norm: int
    tokens: str  # per-prime verdict tokens, e.g. "IIa1 I1"
    local_pass: bool
    searched: bool
    witness: tuple | None
    round_trip: bool | None  # None when there is no witness

    def csv_fields(self) -> list:
        return [
            str(self.p), str(self.d), ";".join(str(v) for v in self.m), str(self.norm), self.tokens.replace(" ", ";"),
            str(self.local_pass).lower(), str(self.searched).lower(), str(self.witness is not None).lower(),
            "" if self.round_trip is None else str(self.round_trip).lower(),
        ]


CSV_HEADER = ["p", "d", "m", "norm_m", "verdicts", "local_pass", "searched", "witness", "round_trip"]


def grid_fields_for(p: int):
    if p == 2:
        return IIB_FIELDS
    return IIA_FIELDS


@lru_cache(maxsize=None)
def _form_and_lattice(d: int, p: int):
    L = RealQuadField(d)
    O = make_Bp(p)[1]
    form = lambda_R(L, O)
    return form, lambda_R_lattice(form.order)


def grid_row(p: int, d: int, m: QuadRingElem, trace_bound: int = TRACE_BOUND) -> GridRow | None:
    """One (p, d, m) row, or None when m is not of the form 4c - b^2 or p ramifies."""
    L = RealQuadField(d)
    if splitting_type(L, p).kind == "ramified":
        return None
    try:
        K = from_m(L, m)
    except InputError:
        return None
    if any(in_ideal_power(m, P, 1) for P in splitting_type(L, p).primes):
        return None
    rep = check_thmA(K, p)
    tokens = " ".join(v.token() for v in rep.verdicts)
    form, lam = _form_and_lattice(d, p)
    mpair = (int(m.x),) if d == 1 else (int(m.x), int(m.y))
    try:
        found = global_represent(form, m, trace_bound)
    except SearchBoundExceeded:
        return GridRow(p, d, mpair, abs(int(m.norm())), tokens, rep.local_everywhere, False, None, None)
    if found.x is None:
        return GridRow(p, d, mpair, abs(int(m.norm())), tokens, rep.local_everywhere, True, None, None)
    R = form.order
    x = form.element(found.x)
    ok = True
    try:
        emb = embed_from_representation(K, R, x)
        back = R.iota(K.b) + emb.alpha * 2
        bc = R.int_coords(back)
        ok = bc is not None and lam.coords(bc) is not None and R.nrd_L(back) == K.m and R.trd_L(back) == QuadRingElem(0, 0, d)
    except Exception:  # noqa: BLE001 - any failure is a failed round trip
        ok = False
    return GridRow(p, d, mpair, abs(int(m.norm())), tokens, rep.local_everywhere, True, found.x, ok)


def local_global_rows(norm_bound: int = NORM_BOUND, trace_bound: int = TRACE_BOUND) -> list[GridRow]:
    rows = []
    for p in (2,) + IIA_PRIMES:
        for d in grid_fields_for(p):
            L = RealQuadField(d)
            for m in totally_positive_reps(L, norm_bound):
                row = grid_row(p, d, m, trace_bound)
                if row is not None:
                    rows.append(row)
    return rows


def scan_rows(primes, d: int, norm_bound: int, trace_bound: int) -> list[GridRow]:
    L = RealQuadField(d)
    rows = []
    for m in totally_positive_reps(L, norm_bound) if norm_bound > 0 else []:
        for p in primes:
            row = grid_row(p, d, m, trace_bound)
            if row is not None:
                rows.append(row)
    return rows
