"""Brute-force ground truth from Birkhoff sums of the rotation.

``f = +1`` on ``[0, 1/2]`` and ``-1`` on ``(1/2, 1)``; ``S_n(x)`` sums ``f``
along ``x, x + theta, ..., x + (n-1) theta`` (mod 1).  Every indicator is
decided with certified arithmetic: a compiled fixed-point scan with explicit
error bars, falling back to exact quadratic arithmetic or refined rational
enclosures for the rare undecided points.  Nothing here uses the
renormalization machinery except where a check is *about* it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .cf import BudgetExhausted, ContinuedFraction
from .renorm import Branch
from .numbers import Ambiguous, QuadraticReal, RatInterval, certified_cmp, enclose

_FB = _kernels.FRAC_BITS
_SCALE = 1 << _FB
_HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# certified indicator evaluation
# ---------------------------------------------------------------------------


class Rotation:
    """Rotation by ``theta`` with certified point evaluation."""

    def __init__(self, cf: ContinuedFraction, bits: int = 160):
        self.cf = cf
        self.exact = cf.value_quadratic() if cf.is_periodic else None
        self.bits = bits
        self._enc = cf.enclosure(bits)
        lo = math.floor(self._enc.lo * _SCALE)
        hi = math.ceil(self._enc.hi * _SCALE)
        self.fixed = lo
        self.err = max(hi - lo, 1)

    def enclosure(self, bits: int) -> RatInterval:
        if bits > self.bits:
            self.bits = bits
            self._enc = self.cf.enclosure(bits)
        return self._enc

    def point(self, x, i: int):
        """``x + i*theta`` reduced mod 1: exact or an enclosure."""
        if self.exact is not None and not isinstance(x, RatInterval):
            y = self.exact * i + x
            return y - math.floor(y)
        bits = max(self.bits, 128)
        while True:
            y = RatInterval.coerce(x, bits) + self.enclosure(bits) * i
            try:
                return y - math.floor(y)
            except Ambiguous:
                pass
            prev = self._enc.width()
            bits *= 2
            if self.enclosure(bits).width() == prev:
                raise BudgetExhausted(f"cannot reduce x + {i} theta mod 1")

    def f(self, x, i: int) -> int:
        """Certified ``f(T^i x)``."""
        bits = max(self.bits, 128)
        while True:
            y = self.point(x, i)
            try:
                return 1 if certified_cmp(y, _HALF) <= 0 else -1
            except Ambiguous:
                pass
            prev = self._enc.width()
            bits *= 2
            if self.enclosure(bits).width() == prev:
                raise BudgetExhausted(f"cannot decide f at x + {i} theta")


def _fixed(x) -> tuple[int, int]:
    """``(floor(x * 2**60) mod 2**60, error units)`` for x in [0, 1)."""
    if isinstance(x, (QuadraticReal, RatInterval)):
        enc = enclose(x, 2 * _FB)
        lo = math.floor(enc.lo * _SCALE)
        hi = math.ceil(enc.hi * _SCALE)
        return lo % _SCALE, hi - lo
    x = Fraction(x)
    v = x * _SCALE
    lo = math.floor(v)
    return lo % _SCALE, (0 if lo == v else 1)


def _reduce(x):
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return x - math.floor(x)
    if isinstance(x, QuadraticReal):
        return x - math.floor(x)
    return x


# ---------------------------------------------------------------------------
# sums
# ---------------------------------------------------------------------------


@dataclass
class OrbitSum:
    x: object
    theta: str
    N: int
    sums: np.ndarray  # sums[n-1] = S_n
    min_prefix: int

    def S(self, n: int) -> int:
        return int(self.sums[n - 1])


def indicator_values(x, cf: ContinuedFraction, N: int, rot: Rotation | None = None) -> np.ndarray:
    """``f(T^i x)`` for ``0 <= i < N`` as an int8 array."""
    rot = rot or Rotation(cf)
    x = _reduce(x)
    xf, ex = _fixed(x)
    out = np.zeros(N, dtype=np.int8)
    start = 0
    while start < N:
        bad = _kernels.scan_values(np.uint64(xf), np.uint64(ex), np.uint64(rot.fixed),
                                   np.uint64(rot.err), start, N, out)
        if bad < 0:
            break
        out[bad] = rot.f(x, bad)
        start = bad + 1
    return out


def birkhoff(x, cf: ContinuedFraction, N: int, rot: Rotation | None = None) -> OrbitSum:
    """Exact Birkhoff sums ``S_1..S_N`` of the +-1 indicator."""
    if N < 1:
        raise ValueError("N must be >= 1")
    vals = indicator_values(x, cf, N, rot)
    sums = np.cumsum(vals, dtype=np.int64)
    return OrbitSum(x, cf.describe(), N, sums, int(sums.min()))


@dataclass(frozen=True)
class HeavyVerdict:
    heavy: bool
    first_failure: int | None  # smallest n with S_n < 0

    def __bool__(self):
        return self.heavy


def heavy_up_to(x, cf: ContinuedFraction, N: int, rot: Rotation | None = None) -> HeavyVerdict:
    """Is ``S_n(x) >= 0`` for every ``1 <= n <= N``?"""
    rot = rot or Rotation(cf)
    x = _reduce(x)
    xf, ex = _fixed(x)
    s, start = 0, 0
    while True:
        status, idx, s = _kernels.scan_heavy(np.uint64(xf), np.uint64(ex), np.uint64(rot.fixed),
                                             np.uint64(rot.err), start, N, s)
        if status == 0:
            return HeavyVerdict(True, None)
        if status == 1:
            return HeavyVerdict(False, int(idx))
        s += rot.f(x, idx)
        if s < 0:
            return HeavyVerdict(False, int(idx) + 1)
        start = idx + 1
        if start >= N:
            return HeavyVerdict(True, None)


def heavy_batch(xs, cf: ContinuedFraction, N: int) -> list[HeavyVerdict]:
    rot = Rotation(cf)
    return [heavy_up_to(x, cf, N, rot) for x in xs]


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    claim: str
    params: dict
    checked: int = 0
    passed: int = 0
    failed: int = 0
    ambiguous: int = 0
    inconclusive: int = 0
    counterexample: dict | None = None
    notes: list[str] = field(default_factory=list)

    def record(self, outcome: str, **detail) -> None:
        self.checked += 1
        if outcome == "pass":
            self.passed += 1
        elif outcome == "fail":
            self.failed += 1
            if self.counterexample is None:
                self.counterexample = _jsonable(detail)
        elif outcome == "ambiguous":
            self.ambiguous += 1
        elif outcome == "inconclusive":
            self.inconclusive += 1
        else:
            raise ValueError(outcome)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.inconclusive == 0 and self.ambiguous == 0

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def summary(self) -> str:
        return (f"{self.claim}: checked={self.checked} passed={self.passed} failed={self.failed} "
                f"ambiguous={self.ambiguous} inconclusive={self.inconclusive}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return {"num": str(obj.numerator), "den": str(obj.denominator)}
    if isinstance(obj, (QuadraticReal, RatInterval)):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _sign(a, b) -> int | None:
    """Certified sign of ``a - b``; ``None`` if it cannot be separated."""
    try:
        return certified_cmp(a, b)
    except Ambiguous:
        return None


def _value(cf: ContinuedFraction, bits: int = 256):
    return cf.value_quadratic() if cf.is_periodic else cf.enclosure(bits)


# ---------------------------------------------------------------------------
# first-return map
# ---------------------------------------------------------------------------


def verify_renormalization(cf: ContinuedFraction, sample_count: int = 100, N: int = 1000,
                           bits: int = 256) -> VerificationReport:
    """Check the first return to ``[0, delta)`` sample by sample.

    Samples are the grid ``k * delta~ / count`` with ``delta~`` a rational just
    below ``delta``.  For each sample: the sums before return stay ``>= 1``
    (lower half) or ``>= -1`` (upper half), the sum at return is exactly
    ``+1`` / ``-1``, and the return point equals ``x + g(theta)*delta`` taken
    mod ``delta``.
    """
    from .renorm import delta as _delta, g_step

    a1 = cf.digit(0)
    if a1 == 1:
        raise ValueError("first-return check needs theta < 1/2 (a1 != 1)")
    rep = VerificationReport("first-return", {"theta": cf.describe(), "samples": sample_count, "N": N})
    rot = Rotation(cf, bits)
    d = _delta(cf, bits)
    gth = _value(g_step(cf)[0], bits)
    shift = gth * d
    d_lo = enclose(d, bits).lo - Fraction(1, 1 << bits)  # strictly below delta
    for k in range(sample_count):
        x = d_lo * k / sample_count
        low = _sign(x, d / 2)
        if low is None:
            rep.record("ambiguous")
            continue
        low = low <= 0
        n_ret = None
        y = None
        try:
            for i in range(1, N + 1):
                y = rot.point(x, i)
                c = _sign(y, d)
                if c is None:
                    raise Ambiguous
                if c < 0:
                    n_ret = i
                    break
        except (Ambiguous, BudgetExhausted):
            rep.record("ambiguous", x=x)
            continue
        if n_ret is None:
            rep.record("inconclusive", x=x)
            continue
        sums = birkhoff(x, cf, n_ret, rot).sums
        if low:
            ok = bool(sums.min() >= 1) and sums[-1] == 1
        else:
            ok = bool(sums.min() >= -1) and sums[-1] == -1
        z = x + shift
        zc = _sign(z, d)
        if zc is None:
            rep.record("ambiguous", x=x)
            continue
        if zc >= 0:
            z = z - d
        same = _same(y, z)
        if same is None:
            rep.record("ambiguous", x=x)
            continue
        if ok and same:
            rep.record("pass")
        else:
            rep.record("fail", x=x, n=n_ret, S=int(sums[-1]), min_prefix=int(sums.min()),
                       return_map_ok=same)
    return rep


def _same(a, b) -> bool | None:
    """Exact equality, or overlap of enclosures (``None`` when undecidable)."""
    if isinstance(a, RatInterval) or isinstance(b, RatInterval):
        ea, eb = enclose(a, 256), enclose(b, 256)
        return ea.intersects(eb)
    return certified_cmp(a, b) == 0


# ---------------------------------------------------------------------------
# cover versus brute force
# ---------------------------------------------------------------------------


def default_horizon(cf: ContinuedFraction, depth: int) -> int:
    """``10 * q_{2 depth}``: exclusions at level ``depth`` show up within O(q) steps."""
    k = 2 * depth
    try:
        q = cf.convergents(k)[-1][1]
    except Exception:
        avail = cf.available(k)
        q = cf.convergents(avail)[-1][1] if avail else 1
    return 10 * q


def _deep_sample(iv, level: int, steps, Delta, rng, N: int, bits: int):
    """Descend from ``iv`` at ``level`` through random children until tiny."""
    from .heavy import child

    limit = Fraction(1, N << 20)
    k = level
    while True:
        length = enclose(Delta[k], 64).hi / 2
        if length < limit or k >= len(steps):
            break
        st = steps[k]
        j = int(rng.integers(st.f2)) if st.branch is not Branch.FLIP else 0
        iv = child(iv, st.branch, st.f2, st.p, Delta[k + 1], j, bits)
        k += 1
    lo = enclose(iv.left, bits).hi
    hi = enclose(iv.right, bits).lo
    return (lo + hi) / 2 if lo < hi else enclose(iv.left, bits).mid()


def _gaps(levels):
    """Open gaps removed at each level: ``(level, lo, hi)`` with rational ends."""
    out = []
    for k in range(1, len(levels)):
        prev, cur = levels[k - 1], levels[k]
        j = 0
        for iv in prev.intervals:
            pl, pr = enclose(iv.left, 160), enclose(iv.right, 160)
            cursor = pl.hi
            while j < len(cur.intervals):
                c = cur.intervals[j]
                cl = enclose(c.left, 160)
                if cl.lo > pr.hi:
                    break
                if cl.lo > cursor:
                    out.append((k, cursor, cl.lo))
                cursor = enclose(c.right, 160).hi
                j += 1
            if pr.lo > cursor:
                out.append((k, cursor, pr.lo))
    return out


def verify_levels(cf: ContinuedFraction, depth: int, N: int | None = None, per_interval: int = 10,
                  seed: int = 0, levels=None, isolated=None, bits: int = 128) -> VerificationReport:
    """Compare the cover with brute-force heaviness.

    * points deep inside each interval of ``E_depth`` must be heavy up to N,
    * the midpoint of every removed gap must fail by N (no failure is
      *inconclusive*, never a pass),
    * every isolated point must be heavy up to N,
    * each sample's classification by the cover must match its role.

    ``levels`` / ``isolated`` may come from a saved cover; the deep samples
    always use the live construction.
    """
    from .heavy import build_levels, isolated_points, membership
    from .renorm import trajectory

    if N is None:
        N = default_horizon(cf, depth)
    rep = VerificationReport("levels", {"theta": cf.describe(), "depth": depth, "N": N,
                                        "per_interval": per_interval, "seed": seed})
    rot = Rotation(cf)
    cover = build_levels(cf, depth, bits)
    if levels is None:
        levels = cover.levels
        if isolated is None:
            isolated = isolated_points(cf, depth, cover=cover, bits=bits)
    levels = list(levels)[: depth + 1]
    isolated = list(isolated or [])
    if len(levels) <= depth:
        rep.notes.append(f"cover truncated at depth {len(levels) - 1}")

    # a longer trajectory so samples can descend far below 1/N
    extra = 8
    while True:
        traj = trajectory(cf, depth + extra, bits)
        if traj.partial or enclose(traj.Delta[-1], 64).hi < Fraction(1, N << 21):
            break
        extra *= 2
    rng = np.random.default_rng(np.random.SeedSequence([seed, depth]))
    top = len(levels) - 1
    for idx, iv in enumerate(cover.levels[top].intervals):
        for _ in range(per_interval):
            x = _deep_sample(iv, top, traj.steps, traj.Delta, rng, N, bits + 32)
            m = membership(levels, (), x)
            if m.status != "inside" or m.depth != top:
                rep.record("fail", kind="sample-membership", x=x, membership=str(m))
                continue
            v = heavy_up_to(x, cf, N, rot)
            if v.heavy:
                rep.record("pass")
            else:
                rep.record("fail", kind="E-sample-not-heavy", x=x, interval=idx, n=v.first_failure)

    for k, lo, hi in _gaps(levels):
        x = (lo + hi) / 2
        m = membership(levels, isolated, x)
        if m.status == "isolated":
            rep.notes.append(f"gap midpoint at level {k} hits an isolated enclosure")
            rep.record("ambiguous")
            continue
        if m.status != "excluded":
            rep.record("fail", kind="gap-membership", x=x, membership=str(m))
            continue
        v = heavy_up_to(x, cf, N, rot)
        if v.heavy:
            rep.record("inconclusive", kind="gap-not-failed", x=x, level=k)
        else:
            rep.record("pass")

    for pt in isolated:
        x = pt.value.mid()
        if membership(levels, isolated, x).status != "isolated":
            rep.record("fail", kind="isolated-membership", x=x)
            continue
        v = heavy_up_to(x, cf, N, rot)
        if v.heavy:
            rep.record("pass")
        else:
            rep.record("fail", kind="isolated-not-heavy", x=x, birth=pt.birth, n=v.first_failure)
    return rep


# ---------------------------------------------------------------------------
# symmetry checks and the heavy point in [theta, 1/2]
# ---------------------------------------------------------------------------


def verify_reversal(cf: ContinuedFraction, N: int = 1000, grid: int = 200) -> VerificationReport:
    """``H_theta = 1/2 - H_{1-theta}`` on the grid ``(k + 1/2) / (2 grid)``."""
    from .renorm import g_step

    if cf.digit(0) != 1:
        raise ValueError("reversal needs a1 = 1")
    rep = VerificationReport("reversal", {"theta": cf.describe(), "N": N, "grid": grid})
    g = g_step(cf)[0]
    r1, r2 = Rotation(cf), Rotation(g)
    for k in range(grid):
        x = Fraction(2 * k + 1, 4 * grid)
        try:
            a = heavy_up_to(x, cf, N, r1)
            b = heavy_up_to(_HALF - x, g, N, r2)
        except BudgetExhausted:
            rep.record("ambiguous", x=x)
            continue
        if a == b:
            rep.record("pass")
        else:
            rep.record("fail", x=x, theta_verdict=asdict(a), reversed_verdict=asdict(b))
    return rep


def verify_always_infinite(cf: ContinuedFraction, count: int = 5, N: int = 10_000) -> VerificationReport:
    """Translates ``h* + n theta`` with ``S_n(h*) = 1`` are heavy up to N."""
    from .heavy import strictly_heavy

    rep = VerificationReport("always-infinite", {"theta": cf.describe(), "count": count, "N": N})
    tol = Fraction(1, N << 40)
    hs = strictly_heavy(cf, tol)
    h = hs.enclosure.mid()
    rot = Rotation(cf)
    sums = birkhoff(h, cf, N, rot).sums
    times = [int(n) + 1 for n in np.flatnonzero(sums == 1)[:count]]
    th = _value(cf)
    for n in times:
        x = h + th * n
        x = x - math.floor(x) if not isinstance(x, RatInterval) else x - math.floor(x.lo)
        v = heavy_up_to(x, cf, N, rot)
        if v.heavy:
            rep.record("pass")
        else:
            rep.record("fail", n=n, first_failure=v.first_failure)
    if len(times) < count:
        rep.notes.append(f"only {len(times)} witnesses within N={N}")
    rep.params["witnesses"] = times
    return rep


def locate_heavy_point(cf: ContinuedFraction, lo, hi, N: int, grid: int = 64,
                       rounds: int = 12) -> RatInterval:
    """Zoom on the point of ``[lo, hi]`` whose orbit survives longest.

    Each round keeps the window spanned by the grid points with the latest
    first failure (heavy-to-N counts as latest) widened by one grid step;
    it stops once the window no longer shrinks.  Used to recover the unique heavy
    point of ``[theta, 1/2]`` without the renormalization.
    """
    rot = Rotation(cf)
    lo, hi = Fraction(lo), Fraction(hi)
    for _ in range(rounds):
        step = (hi - lo) / grid
        times = []
        for k in range(grid + 1):
            v = heavy_up_to(lo + step * k, cf, N, rot)
            times.append(N + 1 if v.heavy else v.first_failure)
        best = max(times)
        ks = [k for k, t in enumerate(times) if t == best]
        new_lo = max(lo, lo + step * (ks[0] - 1))
        new_hi = min(hi, lo + step * (ks[-1] + 1))
        if new_hi - new_lo >= hi - lo:
            break
        lo, hi = new_lo, new_hi
    return RatInterval(lo, hi)
