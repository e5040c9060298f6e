from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from evilforge import _enum
from evilforge import exactlin as el


# ----------------------------------------------------------------------------
# HNF and lattice operations


def test_hnf_examples():
    h, u = el.hnf([[2, 0], [0, 2]])
    assert h == [[2, 0], [0, 2]] and u == [[1, 0], [0, 1]]
    h, u = el.hnf([[1, 2], [3, 4]])
    assert h == [[1, 0], [0, 2]]
    assert el.mat_mul(u, [[1, 2], [3, 4]]) == h
    h, _ = el.hnf([[0, 0]])
    assert h == [[0, 0]]


matrices = st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=1, max_size=5)
)


@given(matrices)
def test_hnf_properties(m):
    h, u = el.hnf(m)
    assert el.mat_mul(u, m) == h
    assert abs(el.det(u)) == 1
    nz = [r for r in h if any(r)]
    assert h[: len(nz)] == nz  # zero rows last
    piv = [next(j for j, v in enumerate(r) if v) for r in nz]
    assert piv == sorted(set(piv))
    for i, (r, pc) in enumerate(zip(nz, piv)):
        assert r[pc] > 0
        assert all(0 <= nz[k][pc] < r[pc] for k in range(i))
    assert el.hnf_basis(h) == el.hnf_basis(m)


def test_lattice_intersect_examples():
    z2 = el.standard_lattice(2)
    two = el.lattice([[2, 0], [0, 2]])
    assert el.lattice_intersect(z2, two) == two
    assert el.lattice_intersect(el.lattice([[1, 1]]), two) == el.lattice([[2, 2]])
    assert el.lattice_intersect(two, two) == two


lat3 = st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3).filter(
    lambda m: el.det(m) != 0
).map(lambda m: el.lattice(m))


@given(lat3, lat3, lat3)
@settings(max_examples=40)
def test_intersect_commutative_associative(a, b, c):
    assert el.lattice_intersect(a, b) == el.lattice_intersect(b, a)
    assert el.lattice_intersect(el.lattice_intersect(a, b), c) == el.lattice_intersect(a, el.lattice_intersect(b, c))
    ab = el.lattice_intersect(a, b)
    assert all(v in a and v in b for v in ab.basis)


def test_kernel_mod_lattice_examples():
    z2 = el.standard_lattice(2)
    assert el.kernel_mod_lattice([[0], [0]], z2).basis == z2.basis
    two = el.lattice([[2, 0], [0, 2]])
    assert el.kernel_mod_lattice(el.identity(2), z2, two) == two
    z3 = el.standard_lattice(3)
    k = el.kernel_mod_lattice([[1], [1], [1]], z3, el.lattice([[2]]))
    assert el.index_in(k, z3) == 2
    for v in ((1, 1, 0), (0, 1, 1), (2, 0, 0)):
        assert v in k
    assert (1, 0, 0) not in k


def test_saturation_and_index():
    lat = el.lattice([[2, 0, 0], [0, 3, 0]], 3)
    assert el.saturation(lat) == el.lattice([[1, 0, 0], [0, 1, 0]], 3)
    assert not el.is_saturated(lat)
    assert el.index_in(lat, el.saturation(lat)) == 6


# ----------------------------------------------------------------------------
# enumeration


def test_fincke_pohst_examples():
    z3 = el.standard_lattice(3)
    assert el.fincke_pohst(z3, 0) == [(0, 0, 0)]
    two = el.fincke_pohst(z3, 2)
    assert len(two) == 12
    assert all(sorted(map(abs, v)) == [0, 1, 1] for v in two)
    assert el.fincke_pohst(el.standard_lattice(2), 3) == []


@st.composite
def even_grams(draw, max_rank=4):
    n = draw(st.integers(1, max_rank))
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            g[i][j] = g[j][i] = draw(st.integers(-4, 4))
    for i in range(n):
        off = sum(abs(g[i][j]) for j in range(n) if j != i)
        g[i][i] = 2 * ((off + 2) // 2 + draw(st.integers(0, 3)))
    return g


@given(even_grams(), st.integers(0, 30))
@settings(max_examples=60, deadline=None)
def test_fincke_pohst_matches_box(g, target):
    lat = el.IntLattice(len(g), tuple(tuple(r) for r in el.identity(len(g))), tuple(map(tuple, g)))
    assert el.fincke_pohst(lat, target) == el.box_enumerate(lat, target)


def test_fincke_pohst_matches_box_rank6_target200():
    n = 6
    g = [[(100 if i == j else (7 * i + 3 * j) % 5 - 2) for j in range(n)] for i in range(n)]
    g = [[g[min(i, j)][max(i, j)] for j in range(n)] for i in range(n)]
    lat = el.IntLattice(n, tuple(tuple(r) for r in el.identity(n)), tuple(map(tuple, g)))
    assert el.fincke_pohst(lat, 200) == el.box_enumerate(lat, 200)


@given(even_grams(max_rank=5), st.integers(0, 80), st.booleans())
@settings(max_examples=60, deadline=None)
def test_compiled_kernel_matches_python(g, b2, exact):
    ref = sorted(_enum.enumerate_short(g, b2, backend="python", exact=exact))
    got = sorted(_enum.enumerate_short(g, b2, exact=exact))
    assert got == ref


def test_short_vectors_sorted_and_bounded():
    lat = el.lattice(el.identity(3), ambient_gram=[[2, 1, 0], [1, 2, 1], [0, 1, 4]])
    sv = el.short_vectors(lat, 3)
    assert sv == sorted(sv)
    assert all(v <= 3 and lat.q(x) == v for v, x in sv)


def test_indefinite_gram_rejected():
    lat = el.IntLattice(2, ((1, 0), (0, 1)), ((0, 1), (1, 0)))
    with pytest.raises(el.LatticeError):
        el.fincke_pohst(lat, 1)


@given(even_grams())
@settings(max_examples=40, deadline=None)
def test_lll_unimodular(g):
    t, red = el.lll_gram(g)
    assert abs(el.det(t)) == 1
    assert red == [[int(x) for x in r] for r in el._reindex_gram(g, t)]


# ----------------------------------------------------------------------------
# rational invariants


def test_diagonalize_examples():
    assert el.diagonalize_over_Q([[1, 0], [0, 1]]).coefficients == (1, 1)
    hyp = el.diagonalize_over_Q([[0, 1], [1, 0]])
    ref = el.QFormDiag((Fraction(1), Fraction(-1)))
    # rational equivalence of binary forms: same det square class and Hasse invariants everywhere
    assert el.squarefree_part(hyp.determinant()) == el.squarefree_part(ref.determinant()) == -1
    for v in (2, 3, 5, el.INF):
        assert el.hasse_invariant(hyp, v) == el.hasse_invariant(ref, v)
    d = el.diagonalize_over_Q([[2, 1], [1, 2]])
    assert d.coefficients == (2, Fraction(3, 2))


@given(even_grams(max_rank=5))
def test_diagonalize_determinant_square_class(g):
    d = el.diagonalize_over_Q(g)
    assert d.determinant() == el.det(g)
    assert el.squarefree_part(d.determinant()) == el.squarefree_part(el.det(g))


def test_hilbert_examples():
    for b in (2, 3, -5, 7, Fraction(3, 4)):
        for p in (2, 3, 5, 7, el.INF):
            assert el.hilbert_symbol(1, b, p) == 1
    assert el.hilbert_symbol(-1, -1, el.INF) == -1
    assert el.hilbert_symbol(-1, -1, 2) == -1
    assert el.hilbert_symbol(-1, -1, 3) == 1


def test_hasse_examples():
    assert el.hasse_invariant(el.QFormDiag((Fraction(7),)), 3) == 1
    for p in (2, 3, 5, el.INF):
        assert el.hasse_invariant(el.QFormDiag((Fraction(1),) * 5), p) == 1
    assert el.hasse_invariant(el.QFormDiag((Fraction(-1), Fraction(-1))), 2) == -1


def _places(*xs):
    ps = {2}
    for x in xs:
        ps |= set(el.prime_factors(x))
    return sorted(ps) + [el.INF]


nonzero = st.integers(-60, 60).filter(bool)


@given(nonzero, nonzero)
def test_hilbert_product_formula(a, b):
    prod = 1
    for v in _places(a, b):
        prod *= el.hilbert_symbol(a, b, v)
    assert prod == 1


@given(nonzero, nonzero, nonzero)
def test_hilbert_bilinear(a, b, c):
    for v in _places(a, b, c):
        assert el.hilbert_symbol(a, b, v) * el.hilbert_symbol(a, c, v) == el.hilbert_symbol(a, b * c, v)


def _brute_symbol(a, b, p, k):
    # primitive solutions of z^2 = a x^2 + b y^2 modulo p^k with the right valuation profile
    mod = p ** k
    for x in range(mod):
        for y in range(mod):
            if x % p == 0 and y % p == 0:
                continue
            for z in range(mod):
                if (z * z - a * x * x - b * y * y) % mod == 0:
                    return True
    return False


@pytest.mark.parametrize("a,b", [(-1, -1), (-1, 3), (3, 5), (2, 5), (-2, 7)])
def test_hilbert_odd_vs_brute_force(a, b):
    # for odd p with a, b units the symbol is +1; for p dividing one entry brute force mod p
    for p in (3, 5, 7):
        if a % p and b % p:
            assert el.hilbert_symbol(a, b, p) == 1
        elif (a % p) != 0 or (b % p) != 0:
            sym = el.hilbert_symbol(a, b, p)
            assert sym == (1 if _brute_symbol(a, b, p, 2) else -1)
