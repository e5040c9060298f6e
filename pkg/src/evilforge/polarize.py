"""Principal polarizations on E x E, the quinary form q_lambda, and evil certificates.

Matrices live in M_2(O) and are coordinatized by 16 integers (the
O-coordinates of the entries a, b, c, d in that order). The Rosati map of
a polarization M is X -> M^-1 X^v M, with X^v the conjugate transpose.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

from . import exactlin as el
from .certificate import CHECK_NAMES, EvilCertificate, canonical_basis, from_json
from .exactlin import IntLattice, LatticeError
from .quatalg import MaximalOrder, QuatAlgebra, QuatElem, QuatError, QuatMat2, make_Bp, mat2_inverse, rational_sqrt
from .realquad import QuadRingElem, RealQuadField, is_totally_positive
from .ssembed import (
    CMFieldRel,
    DecompositionError,
    InputError,
    SearchBoundExceeded,
    SuperspecialOrder,
    ThmAReport,
    abstract_order,
    check_thmA,
    disc_generator,
    embed_from_representation,
    global_represent,
    ternary_from_order,
    validate_field_and_prime,
)

log = logging.getLogger("evilforge")


class PolarizeError(ValueError):
    pass


# ----------------------------------------------------------------------------
# polarizations


@dataclass(frozen=True)
class PolarizationMatrix:
    s: int
    t: int
    r: QuatElem

    def matrix(self) -> QuatMat2:
        alg = QuatAlgebra(self.r.a, self.r.b, 0)
        return QuatMat2(alg(self.s), self.r, self.r.conj(), alg(self.t))

    def is_valid(self) -> bool:
        return self.s > 0 and self.t > 0 and self.s * self.t - self.r.nrd() == 1


def product_polarization(O: MaximalOrder) -> PolarizationMatrix:
    return PolarizationMatrix(1, 1, O.algebra(0))


def enumerate_polarizations(O: MaximalOrder, bound: int) -> list[PolarizationMatrix]:
    """All [[s, r], [r^v, t]] with 1 <= s, t <= bound and st - Nrd(r) = 1."""
    if bound < 1:
        raise PolarizeError("bound must be at least 1")
    nl = O.norm_lattice()
    out = []
    for s in range(1, bound + 1):
        for t in range(1, bound + 1):
            n = s * t - 1
            rs = [(0, 0, 0, 0)] if n == 0 else el.fincke_pohst(nl, n)
            for c in rs:
                out.append(PolarizationMatrix(s, t, O.from_coords(c)))
    return out


# ----------------------------------------------------------------------------
# Pi, Pi^0, Lambda


def _mat(O: MaximalOrder, c) -> QuatMat2:
    return QuatMat2.from_coords(O, c)


def _flat(X: QuatMat2) -> list:
    out = []
    for e in X.entries():
        out.extend(e.coords())
    return out


def _int_coords16(O: MaximalOrder, X: QuatMat2) -> tuple | None:
    out = []
    for e in X.entries():
        c = O.int_coords(e)
        if c is None:
            return None
        out.extend(c)
    return tuple(out)


def _unit(k: int, n: int = 16) -> tuple:
    return tuple(int(i == k) for i in range(n))


def symmetric_defect(M: QuatMat2, X: QuatMat2) -> QuatMat2:
    """X^v M - M X; zero exactly when X is fixed by the Rosati map of M."""
    return X.vee() * M - M * X


@dataclass(frozen=True)
class PolLattices:
    M: PolarizationMatrix
    O: MaximalOrder
    Pi: IntLattice
    Pi0: IntLattice
    Lam: IntLattice  # carries the even Gram of q_lambda

    def matrix(self, lam_coeffs) -> QuatMat2:
        return _mat(self.O, self.Lam.vector(lam_coeffs))


def q_lambda(C: QuatMat2) -> int:
    """sqrt(deg C) as an integer."""
    try:
        r = rational_sqrt(C.deg())
    except QuatError as exc:
        raise PolarizeError("deg(C) is not a perfect square") from exc
    if r.denominator != 1:
        raise PolarizeError("q_lambda is not integral")
    return int(r)


@lru_cache(maxsize=512)
def pol_lattices(M: PolarizationMatrix, O: MaximalOrder) -> PolLattices:
    if not M.is_valid():
        raise PolarizeError("not a principal polarization")
    Mm = M.matrix()
    full = el.lattice(el.identity(16))
    rows = [_flat(symmetric_defect(Mm, _mat(O, _unit(k)))) for k in range(16)]
    Pi = el.kernel_mod_lattice(rows, full)
    trd = [[_mat(O, _unit(k)).trace()] for k in range(16)]
    Pi0 = el.kernel_mod_lattice(trd, Pi)
    one = _int_coords16(O, QuatMat2.scalar(O.algebra, 1))
    cong = el.lattice([one] + [[2 * x for x in b] for b in Pi.basis], 16)
    Lam = el.lattice_intersect(Pi0, cong)
    if (Pi.rank, Pi0.rank, Lam.rank) != (6, 5, 5):
        raise LatticeError(f"unexpected ranks {(Pi.rank, Pi0.rank, Lam.rank)}")
    mats = [_mat(O, b) for b in Lam.basis]
    qs = [q_lambda(C) for C in mats]
    gram = [[0] * 5 for _ in range(5)]
    for i in range(5):
        gram[i][i] = 2 * qs[i]
        for j in range(i + 1, 5):
            gram[i][j] = gram[j][i] = q_lambda(mats[i] + mats[j]) - qs[i] - qs[j]
    return PolLattices(M, O, Pi, Pi0, Lam.with_gram(gram))


def square_root_entry_conditions(N: QuatMat2, D: int) -> dict:
    """Entry identities forced by N^2 = D for N = [[a, b], [c, d]]."""
    a, b, c, d = N.entries()
    return {
        "ab = -bd": a * b == -(b * d),
        "ca = -dc": c * a == -(d * c),
        "a^2 + bc = D": a * a + b * c == a * 0 + D,
        "cb + d^2 = D": c * b + d * d == a * 0 + D,
    }


def represent_dL(PL: PolLattices, d_L: int, bound: int) -> tuple | None:
    """First Lambda-coordinate vector with q_lambda = d_L, or None."""
    if d_L <= 0:
        raise PolarizeError("d_L must be positive")
    if d_L > bound:
        raise SearchBoundExceeded(f"d_L = {d_L} exceeds search bound {bound}")
    sols = el.fincke_pohst(PL.Lam, d_L)
    return sols[0] if sols else None


def all_representations(PL: PolLattices, D: int) -> list[QuatMat2]:
    return [PL.matrix(c) for c in el.fincke_pohst(PL.Lam, D)]


# ----------------------------------------------------------------------------
# O_L embedding from C


@dataclass(frozen=True)
class OLEmbedding:
    d: int
    d_L: int
    C: QuatMat2
    n: int  # parity class of C modulo 2 Pi
    omega: QuatMat2
    checks: dict = dc_field(compare=False, hash=False)


def embed_OL(C: QuatMat2, d: int, PL: PolLattices) -> OLEmbedding:
    """iota(w) = (I + C)/2 when d = 1 mod 4, and iota(sqrt d) = C/2 otherwise."""
    L = RealQuadField(d)
    if L.is_rational:
        raise PolarizeError("L = Q needs no embedding")
    D = L.disc
    O = PL.O
    I = QuatMat2.scalar(O.algebra, 1)
    if not (C * C).is_scalar() or (C * C).scalar_value() != D:
        raise PolarizeError("C^2 is not d_L")
    cc = _int_coords16(O, C)
    if cc is None or PL.Lam.coords(cc) is None:
        raise PolarizeError("C is not in Lambda(lambda)")
    n = None
    for k in (0, 1):
        half = _int_coords16(O, (C - I * k) * Fraction(1, 2))
        if half is not None and PL.Pi.coords(half) is not None:
            n = k
            break
    if n is None:
        raise PolarizeError("C has no decomposition n + 2P")  # pragma: no cover
    omega = (I + C) * Fraction(1, 2) if L.A == 1 else C * Fraction(1, 2)
    Mm = PL.M.matrix()
    checks = {
        "integral": _int_coords16(O, omega) is not None,
        "symmetric": symmetric_defect(Mm, omega) == QuatMat2.zero(O.algebra),
        "minpoly": omega * omega == omega * L.A + I * L.B,
        "parity": n == D % 2,
    }
    if not all(checks.values()):
        raise PolarizeError(f"embedding checks failed: {checks}")
    return OLEmbedding(d, D, C, n, omega, checks)


# ----------------------------------------------------------------------------
# centralizer order


def _centralizer_lattice(O: MaximalOrder, W: QuatMat2) -> IntLattice:
    rows = []
    for k in range(16):
        X = _mat(O, _unit(k))
        rows.append(_flat(X * W - W * X))
    return el.kernel_mod_lattice(rows, el.lattice(el.identity(16)))


def _rosati(M: QuatMat2):
    Minv = mat2_inverse(M)
    return lambda X: Minv * X.vee() * M


def centralizer_order(emb: OLEmbedding, O: MaximalOrder, M: PolarizationMatrix) -> SuperspecialOrder:
    """{X in M_2(O) : X iota(w) = iota(w) X} with the Rosati map of M attached."""
    L = RealQuadField(emb.d)
    lat = _centralizer_lattice(O, emb.omega)
    if lat.rank != 8:
        raise LatticeError(f"centralizer has rank {lat.rank}")
    basis = [_mat(O, b) for b in lat.basis]
    R = SuperspecialOrder(L, basis, QuatMat2.scalar(O.algebra, 1), emb.omega, rosati=_rosati(M.matrix()))
    return R


def order_meets_L_in_iota(R: SuperspecialOrder) -> bool:
    """R cap (Q + Q iota(w)) equals Z + Z iota(w)."""
    gens = [R.int_coords(R.one), R.int_coords(R.iota_omega)]
    if any(g is None for g in gens):
        return False
    return el.is_saturated(el.lattice(gens, R.rank))


# ----------------------------------------------------------------------------
# genus comparison


@dataclass(frozen=True)
class GenusReport:
    det1: int
    det0: int
    det_class_equal: bool
    hasse: dict
    hasse_equal: bool
    values1: tuple
    values0: tuple

    @property
    def invariants_equal(self) -> bool:
        return self.det1 == self.det0 and self.det_class_equal and self.hasse_equal

    @property
    def represented_equal(self) -> bool:
        return self.values1 == self.values0


def represented_values(lat: IntLattice, bound: int) -> tuple:
    return tuple(sorted({int(v) for v, _ in el.short_vectors(lat, bound) if v > 0}))


def genus_sanity(lat1: IntLattice, lat0: IntLattice, p: int, rep_bound: int = 30) -> GenusReport:
    """Necessary conditions for lat1 and lat0 to share a genus, plus small represented values."""
    if lat1.rank != 5 or lat0.rank != 5:
        raise PolarizeError("genus_sanity compares rank-5 forms")
    d1, d0 = int(el.det(lat1.gram)), int(el.det(lat0.gram))
    f1 = el.diagonalize_over_Q([[Fraction(x, 2) for x in r] for r in lat1.gram])
    f0 = el.diagonalize_over_Q([[Fraction(x, 2) for x in r] for r in lat0.gram])
    places = [el.INF] + sorted(set(el.prime_factors(2 * p * d1 * d0)))
    hasse = {str(v): (el.hasse_invariant(f1, v), el.hasse_invariant(f0, v)) for v in places}
    return GenusReport(
        d1, d0,
        el.squarefree_part(f1.determinant()) == el.squarefree_part(f0.determinant()),
        hasse,
        all(a == b for a, b in hasse.values()),
        represented_values(lat1, rep_bound),
        represented_values(lat0, rep_bound),
    )


# ----------------------------------------------------------------------------
# the certify pipeline


@dataclass
class CertifyOutcome:
    status: str  # certified | conditions_failed | exhausted
    report: ThmAReport
    certificate: EvilCertificate | None = None
    stage: str | None = None
    detail: dict = dc_field(default_factory=dict)


def _elem_pair(z: QuadRingElem) -> tuple:
    return (int(z.x),) if z.d == 1 else (int(z.x), int(z.y))


def certify_evil(p: int, d: int, b, c, search_bound: int = 600) -> CertifyOutcome:
    """Build lambda_0 -> iota -> R -> Lambda_R -> alpha and package the witnesses.

    Input problems raise InputError. Failing local conditions and exhausted
    searches are returned as outcomes.
    """
    L = RealQuadField(d) if d >= 1 else None
    if L is None:
        raise InputError("d must be positive")
    validate_field_and_prime(L, p)
    K = disc_generator(L, b, c)
    if not K.is_maximal:
        raise InputError("O_L[t] is not the maximal order of K; choose (b, c) generating O_K")
    report = check_thmA(K, p)
    if not report.local_everywhere:
        return CertifyOutcome("conditions_failed", report, detail={"reasons": report.reasons})
    B, O = make_Bp(p)
    M = product_polarization(O)
    if L.is_rational:
        R = abstract_order(L, O)
        C = io = None
        pol = None
    else:
        log.info("building Lambda(lambda_0) for p=%d", p)
        PL = pol_lattices(M, O)
        try:
            cc = represent_dL(PL, L.disc, search_bound)
        except SearchBoundExceeded as exc:
            return CertifyOutcome("exhausted", report, stage="represent_dL", detail={"bound": search_bound, "reason": str(exc)})
        if cc is None:
            return CertifyOutcome("exhausted", report, stage="represent_dL", detail={"bound": search_bound, "target": L.disc})
        emb = embed_OL(PL.matrix(cc), d, PL)
        R = centralizer_order(emb, O, M)
        C, io = emb.C, emb.omega
        pol = (M.s, M.t, M.r)
    log.info("computing Lambda_R")
    form = ternary_from_order(R)
    try:
        rep = global_represent(form, K.m, search_bound)
    except SearchBoundExceeded as exc:
        return CertifyOutcome("exhausted", report, stage="global_represent", detail={"bound": search_bound, "reason": str(exc)})
    if rep.x is None:
        return CertifyOutcome("exhausted", report, stage="global_represent", detail={"bound": search_bound, "target": rep.target, "candidates": rep.candidates})
    x = form.element(rep.x)
    emb_alpha = embed_from_representation(K, R, x)
    cert = EvilCertificate(
        p=p, d=d, b=_elem_pair(K.b), c=_elem_pair(K.c), m=_elem_pair(K.m), norm_disc=abs(K.norm_m),
        algebra=(B.a, B.b), order_basis=canonical_basis(O.basis), ambient="quaternion" if L.is_rational else "matrix2",
        polarization=pol, d_L=L.disc, C=C, iota_omega=io, R_basis=canonical_basis(R.basis), x=x, alpha=emb_alpha.alpha,
        checks={k: True for k in CHECK_NAMES},
    )
    ok, items = verify_certificate(cert)
    if not ok:  # pragma: no cover - the pipeline must only emit verifiable data
        raise PolarizeError(f"constructed certificate fails verification: {items}")
    return CertifyOutcome("certified", report, certificate=cert)


# ----------------------------------------------------------------------------
# verification (exact re-checking only, no searches)


def _check_order(cert: EvilCertificate) -> MaximalOrder | None:
    alg = QuatAlgebra(cert.algebra[0], cert.algebra[1], cert.p)
    if tuple(cert.order_basis) != canonical_basis(cert.order_basis):
        return None
    try:
        O = MaximalOrder(alg, cert.order_basis)
    except QuatError:
        return None
    if not el.is_prime(cert.p):
        return None
    if not (O.is_ring() and O.discriminant_det() == cert.p ** 2):
        return None
    # ramified exactly at p and infinity: check inf, p and the primes dividing 2ab
    places = sorted(set(el.prime_factors(2 * alg.a * alg.b)) | {cert.p})
    if el.hilbert_symbol(alg.a, alg.b, el.INF) != -1:
        return None
    for q in places:
        if (el.hilbert_symbol(alg.a, alg.b, q) == -1) != (q == cert.p):
            return None
    return O


def verify_certificate(cert) -> tuple[bool, list]:
    """Re-check every identity in a certificate. Returns (ok, [(item, passed)])."""
    if isinstance(cert, (str, bytes)):
        cert = from_json(cert)
    results: dict = {k: False for k in CHECK_NAMES}
    try:
        _verify_into(cert, results)
    except Exception as exc:  # noqa: BLE001 - hostile input must not crash the verifier
        log.debug("verification aborted: %s", exc)
    items = [(k, results[k]) for k in CHECK_NAMES]
    claims_ok = all(cert.checks.get(k) == v for k, v in items)
    items.append(("claims_match", claims_ok))
    return all(v for _, v in items), items


def _verify_into(cert: EvilCertificate, res: dict) -> None:
    L = RealQuadField(cert.d)
    width = 1 if L.is_rational else 2
    if not (len(cert.b) == len(cert.c) == len(cert.m) == width):
        return
    b, c, m = (L.from_coords(v) for v in (cert.b, cert.c, cert.m))
    res["m = 4c - b^2"] = m == c * 4 - b * b and is_totally_positive(m) and cert.norm_disc == abs(int(m.norm()))
    O = _check_order(cert)
    res["order"] = O is not None
    if O is None:
        return
    alg = O.algebra
    if cert.ambient == "quaternion":
        if not L.is_rational or cert.polarization is not None or cert.C is not None or cert.iota_omega is not None or cert.d_L != 1:
            return
        for k in ("polarization", "C_in_Lambda", "C_square", "iota_from_C", "iota_integral", "iota_symmetric", "iota_minpoly"):
            res[k] = True
        lat_R = el.lattice([O.int_coords(e) or (0, 0, 0, 0) for e in cert.R_basis], 4)
        res["R_is_centralizer"] = (
            all(O.int_coords(e) is not None for e in cert.R_basis)
            and lat_R == el.lattice(el.identity(4))
            and tuple(cert.R_basis) == canonical_basis(cert.R_basis)
        )
        R = SuperspecialOrder(L, cert.R_basis, alg.one(), None, rosati=lambda x: x.conj())
        res["R_ring"] = all(e * f in R for e in R.basis for f in R.basis) and R.one in R
        res["R_rosati"] = all(e.conj() in R for e in R.basis)
    else:
        if L.is_rational or cert.polarization is None or cert.C is None or cert.iota_omega is None:
            return
        s, t, r = cert.polarization
        M = PolarizationMatrix(s, t, r)
        res["polarization"] = M.is_valid() and r in O
        if not res["polarization"]:
            return
        Mm = M.matrix()
        I = QuatMat2.scalar(alg, 1)
        C, W = cert.C, cert.iota_omega
        D = L.disc
        res["C_square"] = cert.d_L == D and C * C == I * D
        # C in Lambda(lambda): integral, symmetric, trace zero, C = n + 2P with P symmetric
        half_ok = any(
            _int_coords16(O, (C - I * k) * Fraction(1, 2)) is not None for k in (0, 1)
        )
        res["C_in_Lambda"] = (
            _int_coords16(O, C) is not None
            and symmetric_defect(Mm, C) == QuatMat2.zero(alg)
            and C.trace() == 0
            and half_ok
        )
        expect = (I + C) * Fraction(1, 2) if L.A == 1 else C * Fraction(1, 2)
        res["iota_from_C"] = W == expect
        res["iota_integral"] = _int_coords16(O, W) is not None
        res["iota_symmetric"] = symmetric_defect(Mm, W) == QuatMat2.zero(alg)
        res["iota_minpoly"] = W * W == W * L.A + I * L.B
        coords = [_int_coords16(O, e) for e in cert.R_basis]
        if any(v is None for v in coords) or len(coords) != 8:
            return
        res["R_is_centralizer"] = (
            el.lattice(coords, 16) == _centralizer_lattice(O, W) and tuple(cert.R_basis) == canonical_basis(cert.R_basis)
        )
        R = SuperspecialOrder(L, cert.R_basis, I, W, rosati=_rosati(Mm))
        res["R_ring"] = R.one in R and W in R and all(e * f in R for e in R.basis for f in R.basis)
        res["R_rosati"] = all(R.rosati(e) in R for e in R.basis)
    if not res["R_ring"]:
        return
    x, alpha = cert.x, cert.alpha
    zero = R.one * 0
    xc = R.int_coords(x)
    in_lam = False
    if xc is not None and R.trd_L(x) == QuadRingElem(0, 0, L.d):
        ys = (0, 1) if width == 2 else (0,)
        for e in (0, 1):
            for f in ys:
                if (x - R.iota(QuadRingElem(e, f, L.d))) * Fraction(1, 2) in R:
                    in_lam = True
    res["x_in_Lambda_R"] = in_lam
    res["N(x) = m"] = x * x == R.iota(-m)
    res["alpha_in_R"] = alpha in R
    res["min-poly"] = alpha * alpha + R.iota(b) * alpha + R.iota(c) == zero
    res["alpha_commutes"] = L.is_rational or alpha * R.iota_omega == R.iota_omega * alpha
    res["rosati_conjugation"] = R.rosati(alpha) == R.iota(-b) - alpha
    res["x = b + 2 alpha"] = x == R.iota(b) + alpha * 2
