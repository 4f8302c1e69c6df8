"""The renormalization map ``g`` and bookkeeping along its orbit.

``g`` acts on digit streams::

    a1 = 1          (Flip)     [a2 + 1, a3, ...]      = 1 - theta
    a1 = 2n+1 > 1   (OddFold)  [1, a2, a3, ...]       = 1/(1 + gauss(theta))
    a1 = 2n         (EvenDrop) [a3, a4, ...]          = gauss(gauss(theta))

Along ``theta_i = g^i(theta)`` we track the return length
``delta_i = 1 - 2*floor(a1/2)*theta_i``, the branching count ``f2``, the
orientation parity ``p_i`` and the running product ``Delta_i``.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import CFError, ContinuedFraction, RationalTerminated
from .numbers import QuadraticReal, RatInterval, enclose, fraction_to_decimal


class Branch(str, enum.Enum):
    FLIP = "Flip"
    ODD_FOLD = "OddFold"
    EVEN_DROP = "EvenDrop"

    def __str__(self):
        return self.value


def branch_of(a1: int) -> Branch:
    if a1 == 1:
        return Branch.FLIP
    return Branch.EVEN_DROP if a1 % 2 == 0 else Branch.ODD_FOLD


def g_step(cf: ContinuedFraction):
    """Apply ``g`` once; returns ``(g(cf), branch, a1, a2)``."""
    a1 = cf.digit(0)
    a2 = cf.digit(1)
    br = branch_of(a1)
    if br is Branch.FLIP:
        nxt = cf.drop(2).prepend(a2 + 1)
    elif br is Branch.ODD_FOLD:
        nxt = cf.drop(1).prepend(1)
    else:
        cf.digit(2)  # EvenDrop must leave a non-empty stream
        nxt = cf.drop(2)
    return nxt, br, a1, a2


def delta(cf: ContinuedFraction, bits: int = 128):
    """Return length ``1 - 2*floor(a1/2)*theta`` (exact when possible).

    Evaluated through the Gauss tail ``t = [a2, a3, ...]``: ``t/(2n + t)``
    for ``a1 = 2n`` and ``(1 + t)/(2n + 1 + t)`` for ``a1 = 2n + 1``.  Both
    are increasing in ``t``, so an enclosure of ``t`` maps endpoint-wise
    with no cancellation.
    """
    a1 = cf.digit(0)
    if a1 == 1:
        return Fraction(1)
    n = a1 // 2
    tail = cf.drop(1)
    if not tail.has_digits(1):
        raise RationalTerminated("rational theta = 1/a1 has no return interval")
    t = tail.value(bits)

    def f(x):
        return x / (2 * n + x) if a1 % 2 == 0 else (1 + x) / (2 * n + 1 + x)

    if isinstance(t, RatInterval):
        return RatInterval(f(t.lo), f(t.hi))
    return f(t)


def weights(cf: ContinuedFraction, bits: int = 128):
    """``(f1, f2)``: scale factor and number of child intervals."""
    a1 = cf.digit(0)
    f2 = cf.digit(1) + 1 if a1 % 2 == 0 else 1
    return delta(cf, bits), f2


def g_arithmetic(theta, a1: int, a2: int):
    """``g`` evaluated from the value of theta instead of its digits."""
    if a1 == 1:
        return 1 - theta
    gam = 1 / theta - a1
    if a1 % 2 == 1:
        return 1 / (1 + gam)
    return 1 / gam - a2


def even_bounds(n: int, m: int) -> tuple[Fraction, Fraction]:
    """Open bounds on ``1 - 2n*theta`` when ``a1 = 2n, a2 = m``."""
    return Fraction(1, (2 * n + 1) * (m + 1)), Fraction(1, 2 * n * m)


def odd_bounds(n: int) -> tuple[Fraction, Fraction]:
    """Open bounds on ``1 - 2n*theta`` when ``a1 = 2n + 1 != 1``."""
    return Fraction(1, 2 * n + 1), Fraction(1, n + 1)


@dataclass(frozen=True)
class RenormStep:
    index: int
    a1: int
    a2: int
    a3: int | None
    branch: Branch
    delta: object  # Fraction | QuadraticReal | RatInterval
    f2: int
    p: int

    @property
    def f1(self):
        return self.delta

    @property
    def spawns_isolated(self) -> bool:
        """Step whose copies of the heavy set carry an extra isolated point."""
        if self.branch is Branch.ODD_FOLD:
            return True
        return self.branch is Branch.EVEN_DROP and self.a3 == 1


@dataclass
class RenormTrajectory:
    theta: ContinuedFraction
    steps: list[RenormStep]
    Delta: list  # Delta[i] = prod_{j<i} delta_j, len(steps) + 1 entries
    thetas: list[ContinuedFraction]
    exhausted: str | None = None
    bits: int = 128

    @property
    def depth(self) -> int:
        return len(self.steps)

    @property
    def partial(self) -> bool:
        return self.exhausted is not None

    @property
    def parities(self) -> list[int]:
        return [s.p for s in self.steps]

    @property
    def branches(self) -> list[Branch]:
        return [s.branch for s in self.steps]

    def parity(self, i: int) -> int:
        """``p_i``; valid for ``0 <= i <= depth``."""
        if i < len(self.steps):
            return self.steps[i].p
        last = self.steps[-1]
        return last.p ^ (last.branch is Branch.FLIP)

    def period(self) -> tuple[int, int] | None:
        """``(start, length)`` of an exact cycle in the digit states, if seen."""
        seen: dict = {}
        for i, th in enumerate(self.thetas):
            key = th.state_key()
            if key in seen:
                return seen[key], i - seen[key]
            seen[key] = i
        return None


def walk(cf: ContinuedFraction, bits: int = 128):
    """Yield ``(step, theta_next)`` along the ``g`` orbit until digits run out."""
    p = 0
    cur = cf
    exact_cache: dict = {}
    i = 0
    while True:
        a1 = cur.digit(0)
        a2 = cur.digit(1)
        br = branch_of(a1)
        a3 = cur.digit(2) if br is Branch.EVEN_DROP else None
        if cur.is_periodic:
            key = cur.state_key()
            d = exact_cache.get(key)
            if d is None:
                d = exact_cache[key] = delta(cur, bits)
        else:
            d = delta(cur, bits)
        nxt, _, _, _ = g_step(cur)
        f2 = a2 + 1 if br is Branch.EVEN_DROP else 1
        yield RenormStep(i, a1, a2, a3, br, d, f2, p), nxt
        if br is Branch.FLIP:
            p ^= 1
        cur = nxt
        i += 1


def trajectory(cf: ContinuedFraction, depth: int, bits: int = 128) -> RenormTrajectory:
    """Follow ``g`` for ``depth`` steps; stops early (marked) if digits run out."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    steps: list[RenormStep] = []
    Delta = [Fraction(1)]
    thetas = [cf]
    exhausted = None
    it = walk(cf, bits)
    for i in range(depth):
        try:
            step, nxt = next(it)
        except CFError as exc:
            exhausted = f"step {i}: {exc}"
            break
        steps.append(step)
        D = Delta[-1] * step.delta
        if isinstance(D, RatInterval):
            D = D.rounded(bits + 32)
        Delta.append(D)
        thetas.append(nxt)
    return RenormTrajectory(cf, steps, Delta, thetas, exhausted, bits)


def trajectory_csv(traj: RenormTrajectory, digits: int = 20, header: dict | None = None) -> str:
    """CSV with columns i, a1, a2, branch, p, delta_lo, delta_hi, f2, Delta_lo, Delta_hi."""
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "a1", "a2", "branch", "p", "delta_lo", "delta_hi", "f2", "Delta_lo", "Delta_hi"])
    bits = traj.bits + 32
    for s in traj.steps:
        d = enclose(s.delta, bits)
        D = enclose(traj.Delta[s.index], bits)
        w.writerow([s.index, s.a1, s.a2, s.branch.value, s.p,
                    fraction_to_decimal(d.lo, digits), fraction_to_decimal(d.hi, digits, True),
                    s.f2,
                    fraction_to_decimal(D.lo, digits), fraction_to_decimal(D.hi, digits, True)])
    if traj.exhausted:
        buf.write(f"# exhausted: {traj.exhausted}\n")
    return buf.getvalue()
