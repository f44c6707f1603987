import random
from fractions import Fraction

import pytest

from rigidcocycle.errors import RamifiedPrime
from rigidcocycle.quatalg import (
    LocalSplitting,
    QuaternionAlgebra,
    QuaternionOrder,
    RealSplitting,
    eichler_order,
    enumerate_by_norm,
    find_atkin_lehner,
    find_up_cosets,
    local_splitting,
    maximal_order,
)

B6 = QuaternionAlgebra(6, -1)
B10 = QuaternionAlgebra(2, -5)
B22 = QuaternionAlgebra(11, -1)
BSPLIT = QuaternionAlgebra(1, 1)


def test_discriminants():
    assert B6.discriminant == 6
    assert B10.discriminant == 10
    assert B22.discriminant == 22
    assert BSPLIT.discriminant == 1
    assert all(alg.is_indefinite() for alg in (B6, B10, B22, BSPLIT))


def test_element_arithmetic():
    i, j, k = B6.gens()
    assert i * i == 6
    assert j * j == -1
    assert i * j == k
    assert j * i == -k
    assert (i * j) * (i * j) == B6.element(6)
    g = B6.element(Fraction(51, 2), Fraction(21, 2), Fraction(7, 2), 0)
    assert g.nrd() == 1
    assert g.trd() == 51
    assert g * g.conjugate() == g.nrd()
    assert g * g.inverse() == 1


def test_nrd_multiplicative():
    rng = random.Random(3)
    for _ in range(30):
        u = B10.element(*[Fraction(rng.randrange(-9, 10), rng.choice([1, 2])) for _ in range(4)])
        v = B10.element(*[Fraction(rng.randrange(-9, 10), rng.choice([1, 2])) for _ in range(4)])
        assert (u * v).nrd() == u.nrd() * v.nrd()


def test_maximal_order_b6():
    R = maximal_order(B6)
    assert R.reduced_discriminant() == 6
    g1 = B6.element(Fraction(51, 2), Fraction(21, 2), Fraction(7, 2), 0)
    g2 = B6.element(1151, 480, 240, 0)
    assert R.contains(g1)
    assert R.contains(g2)
    i, j, k = B6.gens()
    assert R.contains(i) and R.contains(j) and R.contains(k)


def test_maximal_order_split_is_m2z():
    R = maximal_order(BSPLIT)
    assert R.reduced_discriminant() == 1
    i, j, k = BSPLIT.gens()
    # idempotents of M_2(Z)
    assert R.contains(Fraction(1, 2) * (BSPLIT.one() + i))
    assert R.contains(Fraction(1, 2) * (j + k))


def test_maximal_order_b10_b22():
    assert maximal_order(B10).reduced_discriminant() == 10
    assert maximal_order(B22).reduced_discriminant() == 22


@pytest.fixture(scope="module")
def split6():
    R = maximal_order(B6)
    return R, local_splitting(B6, R, 5, 20)


def test_local_splitting_relations(split6):
    R, sp = split6
    i, j, k = B6.gens()
    I, J = sp.iota(i), sp.iota(j)
    assert (I[0][0] * I[0][0] + I[0][1] * I[1][0]) == 6
    assert (J[0][0] * J[0][0] + J[0][1] * J[1][0]) == -1
    # IJ = -JI entrywise
    from rigidcocycle.quatalg import _mat_mul

    IJ = _mat_mul(I, J)
    JI = _mat_mul(J, I)
    for r in range(2):
        for c in range(2):
            assert (IJ[r][c] + JI[r][c]).is_zero()


def test_local_splitting_is_algebra_map(split6):
    R, sp = split6
    rng = random.Random(11)
    from rigidcocycle.quatalg import _mat_mul

    for _ in range(10):
        u = R.element_from_coords([rng.randrange(-5, 6) for _ in range(4)])
        v = R.element_from_coords([rng.randrange(-5, 6) for _ in range(4)])
        lhs = sp.iota(u * v)
        rhs = _mat_mul(sp.iota(u), sp.iota(v))
        for r in range(2):
            for c in range(2):
                assert lhs[r][c].eq_at(rhs[r][c], 18)
        m = sp.iota(u)
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        tr = m[0][0] + m[1][1]
        assert det.eq_at(sp.iota(u)[0][0].__class__.from_fraction(u.nrd(), 5, 20), 18)
        assert tr.eq_at(m[0][0].__class__.from_fraction(u.trd(), 5, 20), 18)


def test_order_image_integral(split6):
    R, sp = split6
    for e in R.basis:
        m = sp.iota(e)
        for r in range(2):
            for c in range(2):
                assert m[r][c].is_zero() or m[r][c].val >= 0


def test_ramified_prime_rejected():
    R = maximal_order(B6)
    with pytest.raises(RamifiedPrime):
        local_splitting(B6, R, 3, 10)


def test_local_splitting_b10_at_3():
    R = maximal_order(B10)
    sp = local_splitting(B10, R, 3, 15)
    i, j, k = B10.gens()
    I = sp.iota(i)
    assert (I[0][0] * I[0][0] + I[0][1] * I[1][0]) == 2


def test_local_splitting_b22_at_3():
    R = maximal_order(B22)
    sp = local_splitting(B22, R, 3, 15)
    i, j, k = B22.gens()
    J = sp.iota(j)
    assert (J[0][0] * J[0][0] + J[0][1] * J[1][0]) == -1


def test_real_splitting(split6):
    R, _ = split6
    rs = RealSplitting(B6)
    g = B6.element(Fraction(51, 2), Fraction(21, 2), Fraction(7, 2), 0)
    m = rs.iota(g)
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    assert det.a <= 1 <= det.b  # interval contains nrd = 1


def test_enumerate_norm_one_contains_identity():
    R = maximal_order(B6)
    elems = enumerate_by_norm(R, 1, 0.5)
    assert any(e == 1 or e == -1 for e in elems)


def test_enumerate_finds_gamma_psi1():
    R = maximal_order(B6)
    g1 = B6.element(Fraction(51, 2), Fraction(21, 2), Fraction(7, 2), 0)
    elems = enumerate_by_norm(R, 1, 8.0)
    assert g1 in elems or -g1 in elems


def test_eichler_order(split6):
    R, sp = split6
    Rp = eichler_order(B6, R, sp, 5)
    assert Rp.reduced_discriminant() == 30
    for e in Rp.basis:
        m = sp.iota(e)
        ll = m[1][0]
        assert ll.is_zero() or ll.val >= 1


@pytest.fixture(scope="module")
def cosets6(split6):
    R, sp = split6
    Rp = eichler_order(B6, R, sp, 5)
    return R, sp, Rp, find_up_cosets(Rp, sp, 5)


def test_up_cosets(cosets6):
    R, sp, Rp, hs = cosets6
    assert len(hs) == 5
    for h in hs:
        assert h.nrd() == 5
        assert Rp.contains(h)
    labels = set()
    from rigidcocycle.quatalg import _sigma0_label

    for h in hs:
        labels.add(_sigma0_label(sp.iota(h), 5))
    assert labels == {0, 1, 2, 3, 4}


def test_atkin_lehner(cosets6):
    R, sp, Rp, _ = cosets6
    w = find_atkin_lehner(Rp, sp, 5)
    assert w.nrd() == 5
    # w^2 / 5 is a unit of the Eichler order
    u = Fraction(1, 5) * (w * w)
    assert Rp.contains(u)
    assert abs(u.nrd()) == 1
