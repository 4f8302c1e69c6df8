import csv
import io
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from heavyset.cf import ContinuedFraction, parse_theta
from heavyset.numbers import QuadraticReal, RatInterval, enclose
from heavyset.renorm import (Branch, delta, even_bounds, g_arithmetic, g_step, odd_bounds,
                             trajectory, trajectory_csv, weights)

R2 = QuadraticReal.sqrt(2)


def test_g_examples(half_root2, odd_tail, golden):
    nxt, br, a1, _ = g_step(half_root2)
    assert br is Branch.FLIP and nxt.digits(4) == [3, 2, 2, 2]
    nxt, br, _, _ = g_step(odd_tail)
    assert br is Branch.ODD_FOLD and nxt.digits(4) == [1, 2, 2, 2]
    nxt, br, _, _ = g_step(golden)
    assert br is Branch.EVEN_DROP and nxt.digits(4) == [2, 2, 2, 2]


def test_delta_examples(golden, half_root2, odd_tail):
    assert delta(golden) == 3 - 2 * R2
    assert delta(half_root2) == 1
    assert delta(parse_theta("[1,5,7,9]")) == 1
    assert delta(odd_tail) == R2 - 1


def test_weight_examples(golden, odd_tail):
    assert weights(golden) == (3 - 2 * R2, 3)
    assert weights(odd_tail) == (R2 - 1, 1)
    beta_tail = ContinuedFraction.frozen_digits([8, 6, 18, 14, 26])
    assert weights(beta_tail)[1] == 7


def test_trajectory_examples(half_root2, golden):
    t = trajectory(half_root2, 4)
    assert t.branches == [Branch.FLIP, Branch.ODD_FOLD, Branch.FLIP, Branch.ODD_FOLD]
    assert t.parities == [0, 1, 1, 0]
    t = trajectory(golden, 3)
    assert t.branches == [Branch.EVEN_DROP] * 3
    assert t.parities == [0, 0, 0]
    d = 3 - 2 * R2
    assert t.Delta == [1, d, d * d, d ** 3]


def test_e_minus_2_five_step_pattern():
    t = trajectory(parse_theta("rule:e_minus_2"), 15)
    # rows 5k .. 5k+4 of the pattern: [1,4k+2,1,..], [4k+3,1,1,..], [1,1,1,..], [2,1,..], [4k+4,1,1,..]
    for k in range(3):
        s = t.steps[5 * k:5 * k + 5]
        assert [x.branch for x in s] == [Branch.FLIP, Branch.ODD_FOLD, Branch.FLIP,
                                         Branch.EVEN_DROP, Branch.EVEN_DROP]
        assert (s[0].a1, s[0].a2) == (1, 4 * k + 2)
        assert (s[1].a1, s[1].a2) == (4 * k + 3, 1)
        assert (s[3].a1, s[3].a2) == (2, 1)
        assert (s[4].a1, s[4].a2) == (4 * k + 4, 1)
        assert [x.f2 for x in s] == [1, 1, 1, 2, 2]


def test_period_detection(golden, half_root2):
    assert trajectory(golden, 3).period() == (0, 1)
    assert trajectory(half_root2, 6).period()[1] == 2
    assert trajectory(parse_theta("rule:e_minus_2"), 10).period() is None


def test_rational_runs_out():
    t = trajectory(ContinuedFraction.rational(3, 7), 10)
    assert t.partial and t.depth < 10


thetas = st.one_of(
    st.integers(0, 10**6).map(lambda s: ContinuedFraction.random(s, 1024)),
    st.lists(st.integers(1, 12), min_size=1, max_size=4).map(lambda p: ContinuedFraction.periodic([], p)),
    st.lists(st.integers(1, 200), min_size=60, max_size=60).map(ContinuedFraction.frozen_digits),
)


@given(thetas)
def test_parity_bookkeeping(cf):
    t = trajectory(cf, 20)
    for i, s in enumerate(t.steps):
        flips = sum(x.branch is Branch.FLIP for x in t.steps[:i])
        assert s.p == flips % 2
        if i + 1 < t.depth:
            assert (t.steps[i + 1].p != s.p) == (s.branch is Branch.FLIP)


@given(thetas)
def test_delta_sandwich(cf):
    t = trajectory(cf, 20)
    for s in t.steps:
        d = enclose(s.delta, 200)
        n = s.a1 // 2
        if s.branch is Branch.EVEN_DROP:
            lo, hi = even_bounds(n, s.a2)
        elif s.branch is Branch.ODD_FOLD:
            lo, hi = odd_bounds(n)
        else:
            assert s.delta == 1 and s.f2 == 1
            continue
        assert lo < d.lo and d.hi < hi
        assert s.f2 == (s.a2 + 1 if s.branch is Branch.EVEN_DROP else 1)


@given(thetas)
def test_delta_decay(cf):
    t = trajectory(cf, 20)
    for i in range(t.depth):
        if i + 1 < t.depth:
            pair = [enclose(t.steps[i].delta, 64).hi, enclose(t.steps[i + 1].delta, 64).hi]
            assert min(pair) < Fraction(1, 2)
    for k in range(0, t.depth // 2 + 1):
        assert enclose(t.Delta[2 * k], 64).lo <= Fraction(1, 2**k)
    for a, b in zip(t.Delta, t.Delta[1:]):
        assert enclose(b, 64).lo <= enclose(a, 64).hi


@given(st.integers(0, 10**9))
def test_conjugacy_digits_vs_arithmetic(seed):
    cf = ContinuedFraction.random(seed, 2048)
    nxt, br, a1, a2 = g_step(cf)
    th = cf.enclosure(600)
    ga = g_arithmetic(th, a1, a2)
    assert nxt.enclosure(300).intersects(RatInterval(min(ga.lo, ga.hi), max(ga.lo, ga.hi)))


def test_conjugacy_exact(golden, half_root2, odd_tail):
    for cf in (golden, half_root2, odd_tail):
        nxt, _, a1, a2 = g_step(cf)
        assert g_arithmetic(cf.value_quadratic(), a1, a2) == nxt.value_quadratic()


def test_csv_columns(half_root2):
    text = trajectory_csv(trajectory(half_root2, 4), header={"theta": "[1;(2)]"})
    assert text.startswith("# theta=[1;(2)]\n")
    rows = list(csv.DictReader(io.StringIO("".join(l for l in text.splitlines(True) if not l.startswith("#")))))
    assert list(rows[0]) == ["i", "a1", "a2", "branch", "p", "delta_lo", "delta_hi", "f2", "Delta_lo", "Delta_hi"]
    assert [r["branch"] for r in rows] == ["Flip", "OddFold", "Flip", "OddFold"]
    assert Fraction(rows[1]["delta_lo"]) < Fraction(rows[1]["delta_hi"])
