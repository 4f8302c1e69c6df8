import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from heavyset.cf import ContinuedFraction, parse_theta
from heavyset.dimension import theta_for_dimension
from heavyset.heavy import strictly_heavy
from heavyset.oracle import (VerificationReport, birkhoff, default_horizon, heavy_up_to,
                             locate_heavy_point, verify_always_infinite, verify_levels,
                             verify_renormalization, verify_reversal)
from heavyset.renorm import g_step

HALF = Fraction(1, 2)
periodic = st.lists(st.integers(1, 6), min_size=1, max_size=3).map(lambda p: ContinuedFraction.periodic([], p))
rationals = st.fractions(min_value=0, max_value=1).filter(lambda q: q < 1)


def mp_sums(x, cf, N, dps=60):
    """Independent high-precision Birkhoff sums (no fixed point, no enclosures)."""
    with mpmath.workdps(dps):
        q = cf.value_quadratic()
        th = (q.p + q.q * mpmath.sqrt(q.d)) / q.r
        pos = mpmath.mpf(x.numerator) / x.denominator
        s, out = 0, []
        for _ in range(N):
            frac = pos - mpmath.floor(pos)
            s += 1 if frac <= mpmath.mpf(1) / 2 else -1
            out.append(s)
            pos += th
        return out


# -- sums ----------------------------------------------------------------------------------


def test_first_sums(golden):
    assert birkhoff(Fraction(0), golden, 1).S(1) == 1
    assert birkhoff(Fraction(3, 4), golden, 1).S(1) == -1
    assert birkhoff(Fraction(3, 4), parse_theta("rule:e_minus_2"), 1).S(1) == -1
    assert birkhoff(HALF, golden, 1).S(1) == 1  # closed interval at 1/2


@given(periodic, rationals)
def test_sums_match_independent_evaluation(cf, x):
    assert birkhoff(x, cf, 300).sums.tolist() == mp_sums(x, cf, 300)


@given(periodic, rationals, st.integers(1, 400), st.integers(1, 400))
def test_cocycle(cf, x, m, n):
    th = cf.value_quadratic()
    y = x + th * m
    y = y - (y.__floor__())
    whole = birkhoff(x, cf, m + n)
    assert whole.S(m + n) == whole.S(m) + birkhoff(y, cf, n).S(n)


@given(periodic, rationals)
def test_unit_steps(cf, x):
    s = np.concatenate([[0], birkhoff(x, cf, 500).sums])
    assert set(np.abs(np.diff(s)).tolist()) == {1}


def test_strictly_heavy_midpoint_stays_positive(half_root2):
    h = strictly_heavy(half_root2, Fraction(1, 10**12)).enclosure.mid()
    assert birkhoff(h, half_root2, 10**5).min_prefix >= 1


def test_near_half_is_decided_exactly():
    # the orbit of 1/2 - theta hits 1/2 exactly at step 1
    cf = parse_theta("[(2)]")
    x = HALF - cf.value_quadratic()
    assert birkhoff(x, cf, 2).sums.tolist() == [1, 2]


# -- heaviness -----------------------------------------------------------------------------


def test_heavy_examples(golden):
    assert heavy_up_to(Fraction(0), golden, 10**4).heavy
    v = heavy_up_to(Fraction(2, 5), golden, 10**4)
    assert not v and v.first_failure == 29
    # 1/2 lies beyond the depth-1 cover (5 delta / 2 ~ 0.4289); S_7 = -1
    v = heavy_up_to(HALF, golden, 10**4)
    assert not v and v.first_failure == 7
    assert birkhoff(HALF, golden, 7).sums.tolist() == [1, 0, 1, 0, 1, 0, -1]


# -- verification reports ------------------------------------------------------------------


@pytest.mark.parametrize("desc", ["[(2)]", "[3;(2)]"])
def test_verify_renormalization(desc):
    rep = verify_renormalization(parse_theta(desc), 100, 1000)
    assert rep.checked == 100 and rep.passed == 100 and rep.ok


def test_verify_renormalization_from_zero():
    for desc in ("[(2)]", "[(4,1)]", "[5;(3)]"):
        rep = verify_renormalization(parse_theta(desc), 1, 1000)
        assert rep.passed == 1


def test_verify_levels_examples():
    rep = verify_levels(parse_theta("[(2)]"), 4, N=10**4)
    assert rep.ok and rep.checked > 0
    rep = verify_levels(parse_theta("[1;(2)]"), 6, N=10**4)
    assert rep.ok
    rep = verify_levels(theta_for_dimension("1/2"), 3, N=10**4)
    assert rep.ok


@pytest.mark.parametrize("desc", ["[(2)]", "[1;(2)]", "[3;(2)]", "[(1,1,3,1,2,2)]", "[(4,1)]"])
def test_oracle_matches_construction(desc):
    cf = parse_theta(desc)
    depth = 3
    rep = verify_levels(cf, depth, N=default_horizon(cf, depth), per_interval=4, seed=1)
    assert rep.failed == 0 and rep.inconclusive == 0, rep.summary()


def test_default_horizon(golden):
    # q_8 of [0; 2, 2, ...] is 985
    assert default_horizon(golden, 4) == 9850


def test_verify_reversal(half_root2):
    rep = verify_reversal(half_root2, 1000, 200)
    assert rep.passed == 200
    g = g_step(half_root2)[0]
    assert g.digits(4) == [3, 2, 2, 2]
    a = heavy_up_to(Fraction(49, 100), half_root2, 1000)
    b = heavy_up_to(Fraction(1, 100), g, 1000)
    assert a == b
    h = strictly_heavy(half_root2, Fraction(1, 10**12)).enclosure.mid()
    assert heavy_up_to(h, half_root2, 10**4) and heavy_up_to(HALF - h, g, 10**4)


def test_verify_reversal_needs_flip(golden):
    with pytest.raises(ValueError):
        verify_reversal(golden)


@pytest.mark.parametrize("fixture", ["half_root2", "golden"])
def test_always_infinite(fixture, request):
    cf = request.getfixturevalue(fixture)
    rep = verify_always_infinite(cf, 5, 10**4)
    assert rep.passed == 5
    assert rep.params["witnesses"][0] == 1


@pytest.mark.parametrize("desc", ["[3;(2)]", "[(2)]", "[4;(1)]"])
def test_unique_heavy_point_in_upper_part(desc):
    cf = parse_theta(desc)
    th = cf.value_quadratic()
    lo = Fraction(th.enclose(80).hi)
    win = locate_heavy_point(cf, lo, HALF, 20_000)
    h = strictly_heavy(cf, Fraction(1, 10**15)).enclosure
    target = h + th.enclose(80)
    assert win.width() < Fraction(1, 10**4)
    assert win.intersects(target)


def test_report_bookkeeping_and_json():
    rep = VerificationReport("demo", {"x": Fraction(1, 3)})
    rep.record("pass")
    rep.record("ambiguous")
    rep.record("fail", x=Fraction(2, 7), n=12)
    rep.record("fail", x=Fraction(3, 7), n=5)
    assert rep.checked == rep.passed + rep.failed + rep.ambiguous + rep.inconclusive == 4
    doc = json.loads(rep.to_json())
    assert doc["counterexample"] == {"x": {"num": "2", "den": "7"}, "n": 12}
    assert doc["params"]["x"] == {"num": "1", "den": "3"}
    assert not rep.ok
    with pytest.raises(ValueError):
        rep.record("maybe")
