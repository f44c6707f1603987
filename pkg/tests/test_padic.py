import random

import pytest
from hypothesis import given, settings, strategies as st

from rigidcocycle.errors import NoRoot, NonUnitInput, ZeroInput
from rigidcocycle.padic import (
    PadicNumber,
    PadicQuadNumber,
    QuadContext,
    hensel_sqrt,
    iwasawa_log,
    teichmuller,
)


def Q5(n, prec=20):
    return PadicNumber.from_fraction(n, 5, prec)


CTX53 = QuadContext(5, 1, 13)  # alpha^2 = alpha + 13, the ring of (1+sqrt(53))/2


class TestPadicNumber:
    def test_basic_arithmetic(self):
        a = Q5(7)
        b = Q5(-3)
        assert (a + b).lift() == 4
        assert (a * b) == Q5(-21)
        assert (a / b) * b == a
        assert (a - a).is_zero()

    def test_fraction_input(self):
        x = PadicNumber.from_fraction("1/2", 5, 4)
        assert (2 * x).lift() == 1
        y = PadicNumber.from_fraction("3/25", 5, 4)
        assert y.val == -2

    def test_precision_propagation(self):
        a = PadicNumber(5, 0, 2, 10)
        b = PadicNumber(5, 3, 1, 6)
        assert (a + b).prec == 6
        # relative precision rule for products
        c = PadicNumber(5, 2, 3, 8)  # rel prec 6
        d = PadicNumber(5, 1, 2, 10)  # rel prec 9
        assert (c * d).prec == 3 + 6

    def test_inverse_precision(self):
        x = PadicNumber(5, 1, 2, 7)
        assert x.inverse().prec == 7 - 2
        assert (x * x.inverse()) == 1

    def test_hensel_sqrt_11(self):
        r = hensel_sqrt(Q5(11, 2))
        assert r.lift() % 25 == 6
        r2 = hensel_sqrt(Q5(11, 30))
        assert (r2 * r2).eq_at(Q5(11, 30))

    def test_hensel_sqrt_one(self):
        assert hensel_sqrt(Q5(1)) == 1

    def test_hensel_sqrt_noroot(self):
        with pytest.raises(NoRoot):
            hensel_sqrt(Q5(53))

    def test_sqrt_53_in_quad_extension(self):
        s = CTX53.element(0, 0, 30) + 53
        r = s.sqrt()
        assert (r * r).eq_at(s)
        assert not r.in_base_field()

    def test_teichmuller_2(self):
        w = teichmuller(Q5(2, 2))
        assert w.lift() == 7
        w2 = teichmuller(Q5(2, 30))
        assert (w2**4) == 1
        assert w2.residue() == 2

    def test_teichmuller_nonunit(self):
        with pytest.raises(NonUnitInput):
            teichmuller(Q5(5))

    def test_log_6(self):
        l = iwasawa_log(Q5(6, 3))
        assert l.lift() % 125 == 55

    def test_log_p_is_zero(self):
        assert iwasawa_log(Q5(5, 20)).is_zero()

    def test_log_teichmuller_zero(self):
        assert iwasawa_log(teichmuller(Q5(3, 20))).is_zero()

    def test_log_zero_raises(self):
        with pytest.raises(ZeroInput):
            iwasawa_log(PadicNumber.zero(5, 10))


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_ultrametric(m, n):
    a, b = Q5(m), Q5(n)
    s = a + b
    if m == 0 or n == 0 or m + n == 0:
        return
    assert s.val >= min(a.val, b.val)
    if a.val != b.val:
        assert s.val == min(a.val, b.val)


@settings(max_examples=30)
@given(st.integers(1, 10**8))
def test_sqrt_of_square(x):
    if x % 5 == 0:
        x += 1
    a = Q5(x, 15)
    r = hensel_sqrt(a * a)
    assert r == a or r == -a


def random_unit_q25(rng, prec=20):
    while True:
        a0, a1 = rng.randrange(5**6), rng.randrange(5**6)
        z = CTX53.element(a0, a1, prec)
        if z.valuation() == 0:
            return z


def test_log_additive_100_pairs():
    rng = random.Random(7)
    for _ in range(100):
        u = random_unit_q25(rng)
        v = random_unit_q25(rng)
        lu, lv, luv = u.log(), v.log(), (u * v).log()
        assert luv.eq_at(lu + lv, 17)


def test_quad_norm_trace_vs_resultant():
    # N(a0 + a1*alpha) equals the resultant of x^2 - x - 13 and a0 + a1*x
    rng = random.Random(1)
    for _ in range(40):
        a0, a1 = rng.randrange(-50, 50), rng.randrange(-50, 50)
        z = CTX53.element(a0, a1, 20)
        # product of a0 + a1*r over roots r of x^2 - x - 13:
        # = a0^2 + a0*a1*(r1+r2) + a1^2*r1*r2 = a0^2 + a0*a1*1 + a1^2*(-13)
        expected = a0 * a0 + a0 * a1 - 13 * a1 * a1
        assert z.norm() == Q5(expected)
        assert z.trace() == Q5(2 * a0 + a1)
        assert z * z.conjugate() == CTX53.element(expected, 0, 20)
        assert z.conjugate().conjugate() == z


def test_quad_inverse_and_pow():
    z = CTX53.element(3, 4, 25)
    assert (z * z.inverse()).eq_at(CTX53.one(25))
    assert (z**3) * (z**-3) == CTX53.one(25)


def test_quad_sqrt_deterministic():
    z = CTX53.element(2, 1, 25)
    r1 = (z * z).sqrt()
    r2 = (z * z).sqrt()
    assert r1 == r2
    assert r1 == z or r1 == -z


def test_context_rejects_reducible():
    with pytest.raises(ValueError):
        QuadContext(5, 0, 1)  # x^2 - 1 splits


def test_quad_teichmuller():
    z = CTX53.element(2, 3, 20)
    w = z.teichmuller()
    assert (w ** (25 - 1)).eq_at(CTX53.one(20))
    assert w.residue_pair() == z.residue_pair()
