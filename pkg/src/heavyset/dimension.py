"""Dimension of the heavy set from the renormalization weights.

Each step replaces every interval of the cover by ``f2`` copies scaled by
``f1 = delta``, so the truncated dimension ratio at depth ``n`` is::

    sum_{i<n} log f2(theta_i) / -sum_{i<n} log f1(theta_i)

Two kinds of numbers live here and are never mixed: certified bounds (from
integer digit data, rounded outward) and statistical estimates (Monte Carlo
over random rotation numbers, using enclosure midpoints).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from .cf import BudgetExhausted, CFError, ContinuedFraction, parse_dimension, target_d_parameters
from .numbers import QuadraticReal, RatInterval, enclose, log_fraction
from .renorm import Branch, delta, g_step, trajectory, walk

BURN_IN = 10


class PartialTrajectory(CFError):
    """Digits ran out before the requested depth."""


def _down(x: float) -> float:
    return math.nextafter(math.nextafter(x, -math.inf), -math.inf)


def _up(x: float) -> float:
    return math.nextafter(math.nextafter(x, math.inf), math.inf)


def _log_int_bounds(n: int) -> tuple[float, float]:
    """Outward float bounds on ``log n`` (``math.log`` is within an ulp)."""
    v = math.log(n)
    return _down(v), _up(v)


def neglog_delta(d, bits: int = 96) -> tuple[float, float]:
    """Outward bounds on ``-log delta`` with relative, not absolute, precision."""
    if isinstance(d, Fraction):
        if d == 1:
            return 0.0, 0.0
        lo = hi = d
    else:
        if isinstance(d, QuadraticReal):
            scale = max(1, math.ceil(1 / float(d))).bit_length() + 2
            d = d.enclose(bits + scale)
        lo, hi = d.lo, d.hi
    a = -log_fraction(hi)
    b = -log_fraction(lo)
    return _down(a), _up(b)


def digit_bounds(step) -> tuple[int, int]:
    """Integers ``(L, U)`` with ``L < 1/delta < U`` from the first digits."""
    if step.branch is Branch.FLIP:
        return 1, 1
    n = step.a1 // 2
    if step.branch is Branch.EVEN_DROP:
        return 2 * n * step.a2, (2 * n + 1) * (step.a2 + 1)
    return n + 1, 2 * n + 1


# ---------------------------------------------------------------------------
# truncated dimension
# ---------------------------------------------------------------------------


@dataclass
class DimEstimate:
    theta: str
    depth: int
    ratio_sequence: list[float]
    lower_sequence: list[float]
    upper_sequence: list[float]
    f2: list[int]
    running_inf: float | None
    irregular: "IrregularityVerdict"
    limit: float | None = None  # closed form for an exactly periodic trajectory
    partial: bool = False
    burn_in: int = BURN_IN

    @property
    def ratio(self) -> float:
        return self.ratio_sequence[-1]

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}={v}\n")
        buf.write(f"# theta={self.theta}\n# running_inf={_fmt(self.running_inf)}\n")
        if self.limit is not None:
            buf.write(f"# limit={_fmt(self.limit)}\n")
        if self.partial:
            buf.write("# partial=true\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "lower", "ratio", "upper"])
        for n, (lo, r, hi) in enumerate(zip(self.lower_sequence, self.ratio_sequence,
                                            self.upper_sequence), start=1):
            w.writerow([n, _fmt(lo), _fmt(r), _fmt(hi)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["irregular"] = asdict(self.irregular)
        return d


def _fmt(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def _ratio(num: float, den: float) -> float:
    if num == 0:
        return 0.0
    return num / den


def dim_estimate(cf: ContinuedFraction, depth: int, bits: int = 192, force: bool = False,
                 burn_in: int = BURN_IN) -> DimEstimate:
    """Ratio, certified lower/upper sequences and the running infimum.

    ``lower_sequence[n-1] <= ratio_sequence[n-1] <= upper_sequence[n-1]``:
    the bounds use only the digits (``2nm < 1/delta < (2n+1)(m+1)`` for even
    ``a1``, ``n+1 < 1/delta < 2n+1`` for odd ``a1 = 2n+1``), accumulated as
    exact integer products and rounded outward.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    traj = trajectory(cf, depth, bits)
    if traj.partial and not force:
        raise PartialTrajectory(f"{cf.describe()}: {traj.exhausted}")
    num_prod = 1
    lo_prod, hi_prod = 1, 1  # products of L and U
    den_lo = den_hi = 0.0
    ratio, lower, upper, f2s = [], [], [], []
    for step in traj.steps:
        f2s.append(step.f2)
        num_prod *= step.f2
        L, U = digit_bounds(step)
        lo_prod *= L
        hi_prod *= U
        a, b = neglog_delta(step.delta)
        den_lo += a
        den_hi += b
        num_lo, num_hi = _log_int_bounds(num_prod) if num_prod > 1 else (0.0, 0.0)
        num_mid = math.log(num_prod) if num_prod > 1 else 0.0
        ratio.append(_ratio(num_mid, (den_lo + den_hi) / 2))
        # -log delta > log L, so the upper sequence divides by log(prod L)
        if num_prod == 1:
            lower.append(0.0)
            upper.append(0.0)
        else:
            U_log = _log_int_bounds(hi_prod)[1]
            L_log = _log_int_bounds(lo_prod)[0]
            # log f2 <= -log f1 at every step, so the ratio never exceeds 1
            lower.append(max(0.0, _down(num_lo / U_log)))
            upper.append(min(1.0, _up(num_hi / L_log)) if L_log > 0 else 1.0)
    tail = ratio[burn_in:]
    running_inf = min(tail) if tail else None
    limit = _periodic_limit(traj)
    verdict = irregularity_check(f2s, 0.5, burn_in) if f2s else IrregularityVerdict(True, None, 0)
    return DimEstimate(cf.describe(), traj.depth, ratio, lower, upper, f2s, running_inf, verdict,
                       limit, traj.partial, burn_in)


def _periodic_limit(traj) -> float | None:
    per = traj.period()
    if per is None:
        return None
    start, length = per
    steps = traj.steps[start:start + length]
    if len(steps) < length:
        return None
    num = sum(math.log(s.f2) for s in steps)
    if num == 0:
        return 0.0
    den = sum(sum(neglog_delta(s.delta, 128)) / 2 for s in steps)
    return num / den


# ---------------------------------------------------------------------------
# growth condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrregularityVerdict:
    holds: bool
    first_violation: int | None  # 1-based k
    checked: int


def irregularity_check(seq, epsilon, N: int) -> IrregularityVerdict:
    """Does ``m_k < (m_1 ... m_{k-1})**epsilon`` hold for every ``k >= N``?

    ``seq[0]`` is ``m_1``.  Close calls are settled exactly with ``epsilon``
    read as a decimal rational.
    """
    seq = [int(m) for m in seq]
    if not seq:
        raise ValueError("sequence must be nonempty")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    eps_q = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    eps_f = float(eps_q)
    prod = 1
    log_prod = 0.0
    checked = 0
    for k, m in enumerate(seq, start=1):
        if m < 1:
            raise ValueError("entries must be positive integers")
        if k >= N:
            checked += 1
            lhs, rhs = math.log(m), eps_f * log_prod
            if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
                ok = lhs < rhs
            else:
                ok = m ** eps_q.denominator < prod ** eps_q.numerator
            if not ok:
                return IrregularityVerdict(False, k, checked)
        prod *= m
        log_prod = math.log(prod) if prod > 1 else 0.0
    return IrregularityVerdict(True, None, checked)


# ---------------------------------------------------------------------------
# the almost-sure constant
# ---------------------------------------------------------------------------


@dataclass
class CEstimate:
    mean: float
    half_width: float
    samples: int
    used: int
    dropped: int
    burnin: int
    length: int
    bits: int
    seed: int
    mean_log_f2: float = math.nan
    mean_neglog_f1: float = math.nan

    @property
    def interval(self) -> tuple[float, float]:
        return self.mean - self.half_width, self.mean + self.half_width

    def consistent_with(self, other: "CEstimate") -> bool:
        """Do the two 95% intervals overlap (``|m1 - m2| <= h1 + h2``)?"""
        return abs(self.mean - other.mean) <= self.half_width + other.half_width

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def sample_seed(seed: int, k: int) -> int:
    """Seed of sample ``k``, derived from ``(seed, k)`` only."""
    return int(np.random.SeedSequence([int(seed), int(k)]).generate_state(1, dtype=np.uint64)[0])


def _sample_sums(seed: int, burnin: int, length: int, bits: int) -> tuple[float, float]:
    cf = ContinuedFraction.random(seed, bits)
    a = b = 0.0
    it = walk(cf, bits=128)
    for i in range(burnin + length):
        step, _ = next(it)
        if i < burnin:
            continue
        if step.f2 > 1:
            a += math.log(step.f2)
        lo, hi = neglog_delta(step.delta)
        b += (lo + hi) / 2
    return a / length, b / length


def estimate_c(samples: int = 200, burnin: int = 50, length: int = 300, bits: int = 4096,
               seed: int = 0) -> CEstimate:
    """Pooled ratio ``mean(log f2) / mean(-log f1)`` over random rotations.

    Each sample follows ``g`` for ``burnin + length`` steps from a uniform
    ``theta`` and averages the last ``length`` steps.  Samples whose digit
    budget runs out are dropped and counted.  The 95% half-width comes from
    the delta method for a ratio of means.
    """
    if length < 1 or samples < 2:
        raise ValueError("need length >= 1 and at least two samples")
    A, B = [], []
    dropped = 0
    for k in range(samples):
        try:
            a, b = _sample_sums(sample_seed(seed, k), burnin, length, bits)
        except BudgetExhausted:
            dropped += 1
            continue
        A.append(a)
        B.append(b)
    n = len(A)
    if n < 2:
        raise BudgetExhausted(f"only {n} samples survived the {bits}-bit budget")
    A_, B_ = np.asarray(A), np.asarray(B)
    ma, mb = A_.mean(), B_.mean()
    r = ma / mb
    cov = np.cov(A_, B_, ddof=1)
    var = (cov[0, 0] - 2 * r * cov[0, 1] + r * r * cov[1, 1]) / (n * mb * mb)
    z = NormalDist().inv_cdf(0.975)
    return CEstimate(float(r), float(z * math.sqrt(max(var, 0.0))), samples, n, dropped,
                     burnin, length, bits, seed, float(ma), float(mb))


@dataclass
class InequalityReport:
    checked: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and self.passed == self.checked


def pointwise_inequality_check(samples: int = 1000, seed: int = 0, bits: int = 512) -> InequalityReport:
    """Certify ``-log f1 > log f2`` at random ``theta < 1/2``.

    Two independent certificates per sample: the digit bound
    ``1/delta > L >= f2`` in integers, and ``delta.hi < 1/f2`` from the
    enclosure of ``delta``.  A draw above 1/2 is replaced by ``1 - theta``.
    """
    rep = InequalityReport()
    for k in range(samples):
        cf = ContinuedFraction.random(sample_seed(seed, k), bits)
        if cf.digit(0) == 1:
            cf = g_step(cf)[0]
        rep.checked += 1
        ok, why = inequality_holds(cf)
        if ok:
            rep.passed += 1
        else:
            rep.failures.append({"theta": cf.describe(), "reason": why})
    return rep


def inequality_holds(cf: ContinuedFraction) -> tuple[bool, str]:
    a1, a2 = cf.digit(0), cf.digit(1)
    if a1 == 1:
        return False, "theta > 1/2"
    n = a1 // 2
    f2 = a2 + 1 if a1 % 2 == 0 else 1
    L = 2 * n * a2 if a1 % 2 == 0 else n + 1
    if L < f2:
        return False, f"digit bound {L} < f2 = {f2}"
    d = enclose(delta(cf, 256), 256)
    if not d.hi * f2 < 1:
        return False, "delta enclosure does not certify delta * f2 < 1"
    return True, ""


# ---------------------------------------------------------------------------
# prescribed dimension
# ---------------------------------------------------------------------------


def theta_for_dimension(d) -> ContinuedFraction:
    """``[2n_0, m_0, 2n_1, m_1, ...]`` with ``m_i = 2**i`` (``d = 0``: ``[2!, 1, 3!, 1, ...]``)."""
    d = parse_dimension(d)
    return ContinuedFraction.rule("target_d", str(d))


def target_ratio(d, i: int) -> float:
    """``log(m_i + 1) / (log(2 n_i) + log(m_i + 1))``, which tends to ``d``."""
    n, m = target_d_parameters(parse_dimension(d), i)
    lm = math.log(m + 1)
    return lm / (math.log(2 * n) + lm)


def log_f2_integral(limit: int) -> float:
    """``sum_{n,m <= limit} log m / ((2nm+1)(2n(m+1)+1))``."""
    n = np.arange(1, limit + 1, dtype=np.float64)[:, None]
    m = np.arange(1, limit + 1, dtype=np.float64)[None, :]
    terms = np.log(m) / ((2 * n * m + 1) * (2 * n * (m + 1) + 1))
    return float(terms.sum())
