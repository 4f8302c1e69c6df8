from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from heavyset.cf import (BudgetExhausted, ContinuedFraction, NotPeriodic, RationalTerminated,
                         bounds, compare, digits, gauss, parse_theta, value_quadratic)
from heavyset.numbers import QuadraticReal, RatInterval

R2 = QuadraticReal.sqrt(2)


def frac_digits(x: Fraction, k: int):
    out = []
    for _ in range(k):
        if x == 0:
            break
        y = 1 / x
        a = y.numerator // y.denominator
        out.append(a)
        x = y - a
    return out


# -- digits ---------------------------------------------------------------


def test_digit_examples():
    assert digits(parse_theta("[(2)]"), 5) == [2, 2, 2, 2, 2]
    assert digits(parse_theta("rule:e_minus_2"), 9) == [1, 2, 1, 1, 4, 1, 1, 6, 1]
    assert digits(ContinuedFraction.rational(5, 7), 3) == [1, 2, 2]
    assert digits(parse_theta("arith(2,4)"), 5) == [2, 6, 10, 14, 18]
    assert digits(parse_theta("factorial_interleaved"), 6) == [2, 1, 6, 1, 24, 1]


def test_rational_terminates():
    cf = ContinuedFraction.rational(5, 7)
    with pytest.raises(RationalTerminated):
        cf.digits(4)
    assert cf.is_rational


def test_random_budget_is_explicit():
    cf = ContinuedFraction.random(7, 64)
    n = cf.available(1000)
    assert 5 < n < 60
    with pytest.raises(BudgetExhausted):
        cf.digit(n)
    # digits that were emitted are stable
    assert cf.digits(n) == cf.digits(n)


def test_random_is_deterministic_and_certified():
    a, b = ContinuedFraction.random(11, 512), ContinuedFraction.random(11, 512)
    k = a.available(400)
    assert a.digits(k) == b.digits(k)
    cell = RatInterval(Fraction(a.source.numerator, 2**512), Fraction(a.source.numerator + 1, 2**512))
    # both cell ends expand with the certified prefix
    assert frac_digits(cell.lo, k)[:k] == a.digits(k)
    assert frac_digits(cell.hi, k)[:k] == a.digits(k)


def test_random_budget_gives_enough_digits():
    # about 3.4 bits per digit
    assert ContinuedFraction.random(1, 4096).available(5000) > 1000


# -- bounds and enclosures ------------------------------------------------------


def test_bounds_examples():
    b = bounds(parse_theta("[(2)]"), 2)
    assert {b.lo, b.hi} == {Fraction(1, 2), Fraction(2, 5)}
    assert b.contains(R2 - 1)
    b = bounds(parse_theta("[1;(2)]"), 3)
    assert {b.lo, b.hi} == {Fraction(2, 3), Fraction(5, 7)}
    assert b.contains(R2 / 2)
    b = bounds(ContinuedFraction.rational(5, 7), 3)
    assert b.lo == b.hi == Fraction(5, 7)


digit_lists = st.lists(st.integers(1, 40), min_size=2, max_size=25)


@given(digit_lists, st.lists(st.integers(1, 9), min_size=1, max_size=4))
def test_convergent_bracketing(pre, period):
    cf = ContinuedFraction.periodic(pre, period)
    v = cf.value_quadratic()
    prev = None
    for n in range(1, len(pre) + 6):
        b = cf.bounds(n)
        assert b.contains(v) and b.lo < b.hi
        if prev is not None:
            assert prev.contains(b)
        # any point inside the bracket shares the first n - 1 digits
        if n > 1:
            assert frac_digits(b.mid(), n - 1) == cf.digits(n - 1)
        prev = b


@given(digit_lists)
def test_frozen_and_rational_agree(ds):
    x = Fraction(0)
    for a in reversed(ds):
        x = 1 / (a + x)
    r = ContinuedFraction.rational(x.numerator, x.denominator)
    k = min(len(ds), len(r.source))
    assert r.digits(k) == frac_digits(x, k)


def test_enclosure_never_raises_after_one_digit():
    cf = ContinuedFraction.random(3, 64)
    e = cf.enclosure(10_000)
    assert e.lo < e.hi


# -- Gauss shift ----------------------------------------------------------------


def test_gauss_examples():
    assert gauss(parse_theta("rule:e_minus_2")).digits(4) == [2, 1, 1, 4]
    assert gauss(parse_theta("[(2)]")).digits(3) == [2, 2, 2]
    assert gauss(parse_theta("arith(2,4)")).digits(3) == [6, 10, 14]
    with pytest.raises(RationalTerminated):
        gauss(ContinuedFraction.rational(1, 3)).digit(0)


@given(st.sampled_from(["rule:e_minus_2", "arith(3,5)", "[1,2;(3,4,5)]", "random(5,2048)",
                        "factorial_interleaved"]), st.integers(0, 40))
def test_gauss_shifts(desc, k):
    cf = parse_theta(desc)
    assert gauss(cf).digit(k) == cf.digit(k + 1)


# -- exact values -----------------------------------------------------------------


def test_value_quadratic_examples():
    assert value_quadratic(parse_theta("[(2)]")) == R2 - 1
    assert value_quadratic(parse_theta("[1;(2)]")) == R2 / 2
    assert value_quadratic(parse_theta("[3;(2)]")) == 1 / (2 + R2)
    with pytest.raises(NotPeriodic):
        value_quadratic(parse_theta("rule:e_minus_2"))


def _random_periodic(draw):
    pre = draw(st.lists(st.integers(1, 30), max_size=4))
    per = draw(st.lists(st.integers(1, 30), min_size=1, max_size=5))
    return pre, per


@given(st.data())
def test_quadratic_round_trip(data):
    pre, per = _random_periodic(data.draw)
    cf = ContinuedFraction.periodic(pre, per)
    assert cf.value_quadratic().cf_digits(50) == cf.digits(50)


# -- comparison --------------------------------------------------------------------


def test_compare_examples():
    assert compare(parse_theta("[(2)]"), Fraction(1, 2)) < 0
    assert compare(parse_theta("[1;(2)]"), Fraction(1, 2)) > 0
    assert compare(parse_theta("[(2)]"), Fraction(2, 5)) > 0


@given(st.sampled_from(["rule:e_minus_2", "arith(2,4)", "random(9,1024)", "[(1)]"]),
       st.fractions(0, 1, max_denominator=10**4))
def test_compare_consistent_with_bounds(desc, x):
    cf = parse_theta(desc)
    c = compare(cf, x)
    b = cf.enclosure(64)
    if b.hi < x:
        assert c < 0
    if b.lo > x:
        assert c > 0
    assert c != 0


def test_compare_budget():
    cf = ContinuedFraction.dyadic(1 << 15, 16)  # cell (1/2, 1/2 + 2^-16)
    with pytest.raises(BudgetExhausted):
        compare(cf, Fraction(1, 2) + Fraction(1, 2**17))


# -- descriptors ------------------------------------------------------------------


@pytest.mark.parametrize("text,expect", [
    ("[2;(2)]", [2, 2, 2, 2]),
    ("[(2)]", [2, 2, 2, 2]),
    ("[1;(2)]", [1, 2, 2, 2]),
    ("[1,2,3]", [1, 2, 3]),
    ("5/7", [1, 2, 2]),
    ("rule:target_d(1/2)", [4, 1, 4, 2]),
    ("target_d(0)", [2, 1, 6, 1]),
])
def test_parse(text, expect):
    assert parse_theta(text).digits(len(expect)) == expect


@pytest.mark.parametrize("text", ["", "[1,2", "[0,1]", "rule:nope", "random()", "3/2", "frozen[2,0]", "frozen[]"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_theta(text)


@pytest.mark.parametrize("text", ["[(2)]", "[1;(2)]", "5/7", "rule:e_minus_2", "rule:arith(2,4)",
                                  "rule:target_d(1/2)", "random(4,256)", "dyadic(12345678901234567,64)",
                                  "frozen[2,1,3]"])
def test_describe_round_trips(text):
    cf = parse_theta(text)
    again = parse_theta(cf.describe())
    k = min(cf.available(12), 12)
    assert again.digits(k) == cf.digits(k)
