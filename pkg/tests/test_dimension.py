import csv
import io
import math

import pytest
from hypothesis import given, settings, strategies as st

from heavyset.cf import BudgetExhausted, ContinuedFraction, parse_theta
from heavyset.dimension import (PartialTrajectory, dim_estimate, estimate_c, inequality_holds,
                                irregularity_check, log_f2_integral, pointwise_inequality_check,
                                target_ratio, theta_for_dimension)

GOLDEN_DIM = math.log(3) / math.log(3 + 2 * math.sqrt(2))


def test_golden_ratio_is_constant(golden):
    est = dim_estimate(golden, 50)
    assert max(abs(r - GOLDEN_DIM) for r in est.ratio_sequence) < 1e-9
    assert est.limit == pytest.approx(GOLDEN_DIM, abs=1e-12)
    assert est.irregular.holds


def test_countable_case_is_zero(half_root2):
    est = dim_estimate(half_root2, 50)
    assert set(est.ratio_sequence) == {0.0}
    assert est.running_inf == 0.0 and est.limit == 0.0


def test_beta_near_half():
    est = dim_estimate(parse_theta("arith(2,4)"), 200)
    assert abs(est.ratio - 0.5) < 0.02
    assert est.lower_sequence[-1] <= est.ratio <= est.upper_sequence[-1]


def test_e_minus_2_small_and_decreasing():
    est = dim_estimate(parse_theta("rule:e_minus_2"), 1000)
    assert est.ratio < 0.12 and est.running_inf < 0.12
    blocks = est.ratio_sequence[4::5][-100:]
    assert all(b < a for a, b in zip(blocks, blocks[1:]))


def test_partial_trajectory_refused():
    cf = ContinuedFraction.frozen_digits([2, 2, 2, 2, 2])
    with pytest.raises(PartialTrajectory):
        dim_estimate(cf, 10)
    est = dim_estimate(cf, 10, force=True)
    assert est.partial and est.depth < 10


sandwich_thetas = st.one_of(
    st.lists(st.integers(1, 30), min_size=1, max_size=5).map(lambda p: ContinuedFraction.periodic([], p)),
    st.integers(0, 2**32).map(lambda s: ContinuedFraction.random(s, 2048)),
)


@given(sandwich_thetas)
def test_sandwich(cf):
    est = dim_estimate(cf, 30, force=True)
    for lo, r, hi in zip(est.lower_sequence, est.ratio_sequence, est.upper_sequence):
        assert lo <= r <= hi
    started = False
    for f2, lo, hi in zip(est.f2, est.lower_sequence, est.upper_sequence):
        started = started or f2 > 1
        if started:
            assert 0 <= lo and hi <= 1


def test_target_d_gap_shrinks():
    est = dim_estimate(theta_for_dimension("1/2"), 200)
    assert est.upper_sequence[-1] - est.lower_sequence[-1] < 0.01


@pytest.mark.parametrize("d", ["0.25", "0.5", "0.9"])
def test_target_ratio_at_50(d):
    assert abs(target_ratio(d, 50) - float(d)) < 0.01


def test_theta_for_dimension_digits():
    assert theta_for_dimension(0).digits(8) == [2, 1, 6, 1, 24, 1, 120, 1]
    assert theta_for_dimension("1/2").digits(10) == [4, 1, 4, 2, 6, 4, 10, 8, 18, 16]
    assert theta_for_dimension(1).digits(8) == [2, 1, 2, 2, 2, 4, 2, 8]


# -- irregularity --------------------------------------------------------------------


def test_irregularity_examples():
    assert irregularity_check([2] * 100, 0.5, 4).holds
    assert irregularity_check([2**k for k in range(1, 65)], 0.9, 4).holds
    seq = [2]
    for _ in range(8):
        seq.append(math.prod(seq) ** 2)
    v = irregularity_check(seq, 1.99, 2)
    assert not v.holds and v.first_violation == 2


def test_irregularity_exact_tie():
    # m_3 = 2 = (2 * 2)**0.5 exactly, and the inequality is strict
    v = irregularity_check([2] * 100, 0.5, 3)
    assert not v.holds and v.first_violation == 3
    assert not irregularity_check([16, 4], 0.5, 2).holds
    assert irregularity_check([16, 3], 0.5, 2).holds


def test_irregularity_rejects_bad_input():
    with pytest.raises(ValueError):
        irregularity_check([], 0.5, 1)
    with pytest.raises(ValueError):
        irregularity_check([2], 0, 1)


# -- constant c ------------------------------------------------------------------------


def test_estimate_c_deterministic():
    a = estimate_c(samples=8, burnin=5, length=20, bits=512, seed=3)
    b = estimate_c(samples=8, burnin=5, length=20, bits=512, seed=3)
    assert a == b and a.to_json() == b.to_json()
    assert 0 < a.mean < 1 and math.isfinite(a.half_width)
    assert a.used + a.dropped == 8


def test_estimate_c_counts_dropped_samples():
    est = estimate_c(samples=8, burnin=5, length=200, bits=850, seed=0)
    assert est.dropped > 0 and est.used + est.dropped == 8
    with pytest.raises(BudgetExhausted):
        estimate_c(samples=4, burnin=5, length=200, bits=64, seed=0)


def test_pointwise_inequality():
    assert inequality_holds(parse_theta("[(2)]"))[0]
    assert inequality_holds(parse_theta("[3;(2)]"))[0]
    rep = pointwise_inequality_check(samples=200, seed=5)
    assert rep.ok and rep.checked == 200


def test_log_f2_integral_monotone():
    vals = [log_f2_integral(n) for n in (10, 100, 1000)]
    assert all(math.isfinite(v) for v in vals)
    assert vals[0] < vals[1] < vals[2] < 1


# -- export ----------------------------------------------------------------------------


def test_csv_export(golden):
    est = dim_estimate(golden, 12)
    text = est.to_csv({"depth": 12})
    assert text.startswith("# depth=12\n")
    rows = list(csv.DictReader(io.StringIO("".join(l + "\n" for l in text.splitlines()
                                                   if not l.startswith("#")))))
    assert len(rows) == 12 and list(rows[0]) == ["n", "lower", "ratio", "upper"]
    assert float(rows[-1]["ratio"]) == est.ratio
