import dataclasses
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from evilforge import exactlin as el
from evilforge import polarize as pz
from evilforge.certificate import to_json
from evilforge.quatalg import QuatMat2, make_Bp, mat2_inverse
from evilforge.ssembed import InputError, SearchBoundExceeded, ternary_from_order

B2, O2 = make_Bp(2)
I2 = QuatMat2.scalar(B2, 1)
i2, j2, k2 = B2(0, 1), B2(0, 0, 1), B2(0, 0, 0, 1)
C5 = QuatMat2(B2(1), i2 * 2, -i2 * 2, B2(-1))


@pytest.fixture(scope="module")
def pl0():
    return pz.pol_lattices(pz.product_polarization(O2), O2)


# ----------------------------------------------------------------------------
# polarizations


def test_enumerate_bound_one():
    for p in (2, 3, 5):
        O = make_Bp(p)[1]
        pols = pz.enumerate_polarizations(O, 1)
        assert len(pols) == 1
        M = pols[0]
        assert (M.s, M.t) == (1, 1) and M.r.is_zero()


def test_enumerate_bound_two_units():
    pols = pz.enumerate_polarizations(O2, 2)
    units = [M for M in pols if (M.s, M.t) == (1, 2)]
    assert len(units) == 24
    assert len({M.r for M in units}) == 24
    assert all(M.r.nrd() == 1 and M.r in O2 for M in units)
    assert all(M.is_valid() for M in pols)
    with pytest.raises(pz.PolarizeError):
        pz.enumerate_polarizations(O2, 0)


def test_product_polarization_lattices(pl0):
    PL = pl0
    assert (PL.Pi.rank, PL.Pi0.rank, PL.Lam.rank) == (6, 5, 5)
    # Pi(lambda_0) = [[s, r], [r^v, t]]
    gens = [QuatMat2(B2(1), B2(0), B2(0), B2(0)), QuatMat2(B2(0), B2(0), B2(0), B2(1))]
    gens += [QuatMat2(B2(0), e, e.conj(), B2(0)) for e in O2.basis]
    assert el.lattice([pz._int_coords16(O2, X) for X in gens], 16) == PL.Pi
    # Lambda(lambda_0) = [[a, 2r], [2r^v, -a]] with q = a^2 + 4 Nrd r
    lgens = [QuatMat2(B2(1), B2(0), B2(0), B2(-1))] + [QuatMat2(B2(0), e * 2, e.conj() * 2, B2(0)) for e in O2.basis]
    assert el.lattice([pz._int_coords16(O2, X) for X in lgens], 16) == el.lattice(PL.Lam.basis, 16)
    for a in range(-2, 3):
        for c in ((0, 0, 0, 0), (1, 0, 0, 0), (1, -1, 0, 1), (0, 2, 1, -1)):
            r = O2.from_coords(c)
            C = QuatMat2(B2(a), r * 2, r.conj() * 2, B2(-a))
            assert pz.q_lambda(C) == a * a + 4 * r.nrd()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_ranks_random_bound_three(p):
    O = make_Bp(p)[1]
    pols = pz.enumerate_polarizations(O, 3)
    rng = random.Random(1000 + p)
    for M in rng.sample(pols, min(7, len(pols))):
        PL = pz.pol_lattices(M, O)
        assert (PL.Pi.rank, PL.Pi0.rank, PL.Lam.rank) == (6, 5, 5)
        g = PL.Lam.gram
        assert el.is_positive_definite(g) and all(g[i][i] % 2 == 0 for i in range(5))
        assert el.fincke_pohst(PL.Lam, 0) == [(0,) * 5]


def test_invalid_polarization_rejected():
    with pytest.raises(pz.PolarizeError):
        pz.pol_lattices(pz.PolarizationMatrix(1, 2, B2(0)), O2)


# ----------------------------------------------------------------------------
# q_lambda and representations


def test_q_lambda_examples():
    assert pz.q_lambda(C5) == 5
    for a in (1, 2, 3):
        assert pz.q_lambda(QuatMat2(B2(a), B2(0), B2(0), B2(-a))) == a * a


def test_polar_pairing_integral(pl0):
    PL = pl0
    rng = random.Random(7)
    for _ in range(10):
        c1 = tuple(rng.randint(-2, 2) for _ in range(5))
        c2 = tuple(rng.randint(-2, 2) for _ in range(5))
        X, Y = PL.matrix(c1), PL.matrix(c2)
        b = pz.q_lambda(X + Y) - pz.q_lambda(X) - pz.q_lambda(Y)
        expect = PL.Lam.q(tuple(a + b_ for a, b_ in zip(c1, c2))) - PL.Lam.q(c1) - PL.Lam.q(c2)
        assert b == expect and Fraction(b).denominator == 1


def test_represent_dL(pl0):
    PL = pl0
    assert pz.represent_dL(PL, 2, 100) is None
    one = pz.represent_dL(PL, 1, 100)
    assert one is not None and PL.matrix(one) * PL.matrix(one) == I2
    five = pz.all_representations(PL, 5)
    assert C5 in five
    assert PL.matrix(pz.represent_dL(PL, 5, 100)) == five[0]
    with pytest.raises(SearchBoundExceeded):
        pz.represent_dL(PL, 5, 4)


@pytest.mark.parametrize("p,D", [(2, 5), (2, 8), (3, 5), (3, 13), (5, 8)])
def test_scalarity_and_degree(p, D):
    O = make_Bp(p)[1]
    I = QuatMat2.scalar(O.algebra, 1)
    for M in pz.enumerate_polarizations(O, 2)[:4]:
        PL = pz.pol_lattices(M, O)
        for C in pz.all_representations(PL, D):
            assert C * C == I * D
            assert C.deg() == D * D
            assert all(pz.square_root_entry_conditions(C, D).values())


def test_square_root_entry_conditions_detect_failure():
    N = QuatMat2(B2(1), i2, B2(0), B2(1))
    conds = pz.square_root_entry_conditions(N, 1)
    assert not all(conds.values())


# ----------------------------------------------------------------------------
# embeddings and centralizers


def test_embed_OL_example(pl0):
    emb = pz.embed_OL(C5, 5, pl0)
    W = emb.omega
    assert W == QuatMat2(B2(1), i2, -i2, B2(0))
    assert W * W == W + I2
    assert W + I2 == QuatMat2(B2(2), i2, -i2, B2(1))
    assert emb.n == 1 and all(emb.checks.values())
    M = pz.product_polarization(O2).matrix()
    assert mat2_inverse(M) * W.vee() * M == W


def test_embed_OL_even_discriminant(pl0):
    # d = 2: d_L = 8 and iota(sqrt 2) = C/2 must be integral
    reps = pz.all_representations(pl0, 8)
    good = [C for C in reps if pz._int_coords16(O2, C * Fraction(1, 2)) is not None]
    assert good
    emb = pz.embed_OL(good[0], 2, pl0)
    assert emb.n == 0
    assert emb.omega * emb.omega == I2 * 2
    bad = [C for C in reps if pz._int_coords16(O2, C * Fraction(1, 2)) is None]
    for C in bad[:3]:
        with pytest.raises(pz.PolarizeError):
            pz.embed_OL(C, 2, pl0)


def test_embed_OL_rejects_wrong_square(pl0):
    with pytest.raises(pz.PolarizeError):
        pz.embed_OL(C5, 13, pl0)


@pytest.fixture(scope="module")
def centralizer(pl0):
    emb = pz.embed_OL(C5, 5, pl0)
    return pz.centralizer_order(emb, O2, pz.product_polarization(O2))


def test_centralizer_certifies(centralizer):
    R = centralizer
    cert = R.certify()
    assert cert["rank"] == 8
    assert all(v for k, v in cert.items() if k != "rank")
    assert pz.order_meets_L_in_iota(R)


def test_centralizer_ternary_form(centralizer):
    R = centralizer
    form = ternary_from_order(R)
    assert form.trace_lattice.rank == 6
    for v in form.basis:
        assert v * v == R.iota(-R.nrd_L(v))
        assert R.rosati(v) == -v


def _charpoly(m):
    n = len(m)
    M = [[Fraction(v) for v in r] for r in m]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        Mk = [[sum(M[i][t] * (Mk[t][j] + (c if t == j else 0)) for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(Mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


@given(st.tuples(*(st.integers(-2, 2) for _ in range(8))))
@settings(max_examples=15, deadline=None)
def test_centralizer_trd_against_charpoly(centralizer, c):
    R = centralizer
    L = R.L
    X = R.element(c)
    rows = [R.coords(X * e) for e in R.basis]
    cp = _charpoly([list(r) for r in zip(*rows)])
    t, n = R.trd_L(X), R.nrd_L(X)
    quad, quad_c = [L(1), -t, n], [L(1), -t.conj(), n.conj()]
    prod = _polymul(_polymul(quad, quad), _polymul(quad_c, quad_c))
    assert [Fraction(v.x) if v.y == 0 else None for v in prod] == cp
    # the Rosati involution is the canonical involution on R
    assert X + R.rosati(X) == R.iota(t)


mat_coeffs = st.tuples(*(st.integers(-2, 2) for _ in range(16)))


@given(mat_coeffs, mat_coeffs)
@settings(max_examples=30, deadline=None)
def test_trace_conjugation_invariant(g, n):
    G = pz._mat(O2, g)
    if G.deg() == 0:
        return
    N = pz._mat(O2, n)
    assert (mat2_inverse(G) * N * G).trace() == N.trace()


# ----------------------------------------------------------------------------
# independent check of which polarizations admit C with C^2 = I


def _hermitian_lattice(O, M):
    """Z-lattice O^2 with the hermitian form s Nrd x + t Nrd y + Trd(x^ r y) (even Gram)."""
    basis = [(e, O.algebra(0)) for e in O.basis] + [(O.algebra(0), e) for e in O.basis]

    def h(v, w):
        x, y = v
        u, z = w
        return (x.conj() * u * M.s + x.conj() * M.r * z + y.conj() * M.r.conj() * u + y.conj() * z * M.t).trd()

    gram = [[int(h(v, w)) for w in basis] for v in basis]
    return el.IntLattice(8, tuple(tuple(r) for r in el.identity(8)), tuple(map(tuple, gram)))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_q_lambda_represents_one_iff_hermitian_form_does(p):
    O = make_Bp(p)[1]
    for M in pz.enumerate_polarizations(O, 2):
        PL = pz.pol_lattices(M, O)
        a = bool(el.fincke_pohst(PL.Lam, 1))
        b = bool(el.fincke_pohst(_hermitian_lattice(O, M), 1))
        assert a == b, (M.s, M.t)


def test_genus_sanity_self_and_unit(pl0):
    rpt = pz.genus_sanity(pl0.Lam, pl0.Lam, 2)
    assert rpt.invariants_equal and rpt.represented_equal
    M = [M for M in pz.enumerate_polarizations(O2, 2) if (M.s, M.t) == (1, 2)][0]
    PL = pz.pol_lattices(M, O2)
    rpt = pz.genus_sanity(PL.Lam, pl0.Lam, 2)
    assert rpt.invariants_equal


@pytest.mark.parametrize("p", [2, 3])
def test_represented_sets_bound_two(p):
    O = make_Bp(p)[1]
    base = pz.pol_lattices(pz.product_polarization(O), O)
    for M in pz.enumerate_polarizations(O, 2):
        assert pz.genus_sanity(pz.pol_lattices(M, O).Lam, base.Lam, p).represented_equal


# ----------------------------------------------------------------------------
# certify and verify


@pytest.fixture(scope="module")
def cert_q():
    out = pz.certify_evil(2, 1, (1,), (1,))
    assert out.status == "certified"
    return out.certificate


@pytest.fixture(scope="module")
def cert_l5():
    out = pz.certify_evil(3, 5, (0, 0), (1, 1))
    assert out.status == "certified"
    return out.certificate


def test_certificates_verify(cert_q, cert_l5):
    for cert in (cert_q, cert_l5):
        ok, items = pz.verify_certificate(cert)
        assert ok and all(v for _, v in items)
        ok, _ = pz.verify_certificate(to_json(cert))
        assert ok


def test_elliptic_certificate_content(cert_q):
    B = make_Bp(2)[0]
    a = cert_q.alpha
    assert a * a + a + B(1) == B(0)
    assert cert_q.ambient == "quaternion" and cert_q.m == (3,)


def _failed(cert):
    ok, items = pz.verify_certificate(cert)
    return ok, {k for k, v in items if not v}


def test_mutating_x_breaks_norm(cert_q, cert_l5):
    for cert in (cert_q, cert_l5):
        ok, failed = _failed(dataclasses.replace(cert, x=cert.x + cert.x))
        assert not ok and "N(x) = m" in failed


def test_mutating_b_breaks_min_poly(cert_q, cert_l5):
    for cert in (cert_q, cert_l5):
        b = (cert.b[0] + 2,) + cert.b[1:]
        ok, failed = _failed(dataclasses.replace(cert, b=b))
        assert not ok and "min-poly" in failed


def test_mutating_claims_detected(cert_q):
    checks = dict(cert_q.checks)
    checks["order"] = False
    ok, failed = _failed(dataclasses.replace(cert_q, checks=checks))
    assert not ok and failed == {"claims_match"}


def test_non_canonical_basis_rejected(cert_q):
    basis = list(cert_q.order_basis)
    basis[0], basis[1] = basis[1], basis[0]
    ok, failed = _failed(dataclasses.replace(cert_q, order_basis=tuple(basis)))
    assert not ok and "order" in failed


def test_certify_input_errors():
    with pytest.raises(InputError, match="ramified"):
        pz.certify_evil(5, 5, (0, 0), (1, 1))
    with pytest.raises(InputError):
        pz.certify_evil(2, 1, (0,), (4,))  # Z[2i] is not maximal


def test_certify_conditions_and_exhaustion():
    out = pz.certify_evil(5, 1, (0,), (1,))
    assert out.status == "conditions_failed" and out.certificate is None
    out = pz.certify_evil(2, 1, (1,), (1,), search_bound=0)
    assert out.status == "exhausted" and out.stage == "global_represent"
    out = pz.certify_evil(2, 5, (1, 0), (2, 0), search_bound=2)
    assert out.status == "exhausted" and out.stage == "represent_dL"
