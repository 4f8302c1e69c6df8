"""Certified covers of the heavy set and its distinguished points.

The cover ``E_i`` is a list of closed intervals of common length
``Delta_i / 2``.  Each interval of ``E_i`` holds an affine copy of the heavy
set of ``theta_i = g^i(theta)``, oriented by the parity ``p_i``; the next
cover is obtained interval by interval:

==============  =====  ==================================================
step branch     p_i    children of ``[a, b]``
==============  =====  ==================================================
Flip            any    ``[a, b]``
OddFold         0      ``[a, a + D/2]``
OddFold         1      ``[b - D/2, b]``
EvenDrop        0      ``[a, a + D/2] + j*D``,   ``j = 0..a2``
EvenDrop        1      ``[b - D/2, b] - j*D``,   ``j = 0..a2``
==============  =====  ==================================================

with ``D = Delta_{i+1}``.  Steps that are OddFold, or EvenDrop with
``a3 = 1``, also leave one isolated heavy point per interval: the image of
``h*(theta_i) + theta_i``, where ``h*`` is the strictly heavy point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import CFError, ContinuedFraction
from .numbers import Ambiguous, QuadraticReal, RatInterval, certified_cmp, enclose
from .renorm import Branch, RenormTrajectory, trajectory, walk


@dataclass(frozen=True)
class Interval:
    left: object
    right: object

    def enclosure(self, bits: int = 128) -> RatInterval:
        """Outer rational enclosure of the whole interval."""
        return RatInterval(enclose(self.left, bits).lo, enclose(self.right, bits).hi)


@dataclass
class LevelSet:
    depth: int
    intervals: list[Interval]
    length: object  # Delta_i / 2
    parity: int
    parents: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.intervals)


@dataclass
class Cover:
    """Levels ``E_0..E_depth`` plus the trajectory they were built from."""

    traj: RenormTrajectory
    levels: list[LevelSet]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def partial(self) -> bool:
        return self.traj.partial

    def __getitem__(self, i):
        return self.levels[i]

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


@dataclass(frozen=True)
class IsolatedPoint:
    value: object  # RatInterval enclosure
    birth: int
    parent: int


@dataclass
class StrictHeavyResult:
    enclosure: RatInterval
    width: Fraction
    depth: int
    exact_left: object = None
    exact_right: object = None
    partial: bool = False

    def contains(self, x) -> bool:
        return self.enclosure.contains(x)


def _tidy(x, bits):
    return x.rounded(bits) if isinstance(x, RatInterval) else x


def child(iv: Interval, branch: Branch, f2: int, parity: int, D_next, j: int, bits: int = 160):
    """The ``j``-th child of ``iv`` in ascending order (``0 <= j < f2``)."""
    if branch is Branch.FLIP:
        return iv
    half = D_next / 2
    if parity == 0:
        lo = _tidy(iv.left + j * D_next, bits)
        return Interval(lo, _tidy(lo + half, bits))
    hi = _tidy(iv.right - (f2 - 1 - j) * D_next, bits)
    return Interval(_tidy(hi - half, bits), hi)


def children(iv: Interval, branch: Branch, f2: int, parity: int, D_next, bits: int = 160):
    """Child intervals of ``iv`` for one step (ascending order)."""
    if branch is Branch.FLIP:
        return [iv]
    return [child(iv, branch, f2, parity, D_next, j, bits) for j in range(f2)]


def build_levels(cf: ContinuedFraction, depth: int, bits: int = 128,
                 traj: RenormTrajectory | None = None) -> Cover:
    """Covers ``E_0 .. E_depth``; truncated (``partial``) if digits run out."""
    if traj is None or traj.depth < depth:
        traj = trajectory(cf, depth, bits)
    half = Fraction(1, 2)
    levels = [LevelSet(0, [Interval(Fraction(0), half)], half, 0, [0])]
    for i, step in enumerate(traj.steps[:depth]):
        prev = levels[-1]
        D_next = traj.Delta[i + 1]
        ivs: list[Interval] = []
        parents: list[int] = []
        for k, iv in enumerate(prev.intervals):
            kids = children(iv, step.branch, step.f2, step.p, D_next, bits + 32)
            ivs.extend(kids)
            parents.extend([k] * len(kids))
        levels.append(LevelSet(i + 1, ivs, D_next / 2, traj.parity(i + 1), parents))
    return Cover(traj, levels)


# ---------------------------------------------------------------------------
# strictly heavy point
# ---------------------------------------------------------------------------


def _tol_bits(tol: Fraction) -> int:
    return max(64, math.ceil(-math.log2(tol)) + 40)


def strictly_heavy(cf: ContinuedFraction, tol=Fraction(1, 10**9), max_steps: int = 100_000,
                   bits: int | None = None) -> StrictHeavyResult:
    """Nest ``E*_i`` until the enclosure of ``H*`` is narrower than ``tol``."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    bits = bits or _tol_bits(tol)
    a, b = Fraction(0), Fraction(1, 2)
    I = Fraction(1)
    p = 0
    steps = 0
    partial = False

    def outer():
        return RatInterval(enclose(a, bits).lo, enclose(b, bits).hi)

    enc = outer()
    it = walk(cf, bits)
    while enc.width() > tol and steps < max_steps:
        try:
            step, _ = next(it)
        except CFError:
            partial = True
            break
        steps += 1
        if step.branch is Branch.FLIP:
            p ^= 1
            continue
        I = _tidy(I * step.delta, bits + 32)
        if p == 0:
            b = _tidy(a + I / 2, bits + 32)
        else:
            a = _tidy(b - I / 2, bits + 32)
        enc = outer()
    return StrictHeavyResult(enc, enc.width(), steps, a, b, partial or enc.width() > tol)


# ---------------------------------------------------------------------------
# isolated points
# ---------------------------------------------------------------------------


def isolated_points(cf: ContinuedFraction, depth: int, tol=Fraction(1, 10**30),
                    cover: Cover | None = None, bits: int = 128) -> list[IsolatedPoint]:
    """Isolated heavy points born at steps ``< depth``.

    For a spawning step ``i`` each interval ``[a, b]`` of ``E_i`` contributes
    ``a + Delta_i * y`` (``p_i = 0``) or ``b - Delta_i * y`` (``p_i = 1``)
    with ``y = h*(theta_i) + theta_i``.
    """
    if cover is None:
        cover = build_levels(cf, depth, bits)
    traj = cover.traj
    tol = Fraction(tol)
    out: list[IsolatedPoint] = []
    local: dict = {}
    for i, step in enumerate(traj.steps[:depth]):
        if not step.spawns_isolated:
            continue
        th = traj.thetas[i]
        Di = enclose(traj.Delta[i], bits + 64)
        key = th.state_key() if th.is_periodic else None
        y = local.get(key) if key is not None else None
        if y is None:
            local_tol = tol / max(Di.hi, Fraction(1, 2**(bits)))
            hstar = strictly_heavy(th, min(local_tol, Fraction(1, 2**20)))
            y = hstar.enclosure + th.enclosure(_tol_bits(local_tol))
            if key is not None:
                local[key] = y
        for k, iv in enumerate(cover.levels[i].intervals):
            if step.p == 0:
                pt = enclose(iv.left, bits + 64) + Di * y
            else:
                pt = enclose(iv.right, bits + 64) - Di * y
            out.append(IsolatedPoint(pt.rounded(bits + 64), i + 1, k))
    return out


# ---------------------------------------------------------------------------
# criteria and membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OddEvenVerdict:
    holds: bool
    index: int | None  # 1-based index of the first odd-index odd digit
    checked: int

    def __str__(self):
        return "holds-so-far" if self.holds else f"violated-at-index-{self.index}"


def odd_even_criterion(cf: ContinuedFraction, depth: int) -> OddEvenVerdict:
    """Are ``a1, a3, a5, ...`` (first ``depth`` of them) all even?"""
    for i in range(depth):
        if cf.digit(2 * i) % 2:
            return OddEvenVerdict(False, 2 * i + 1, i + 1)
    return OddEvenVerdict(True, None, depth)


@dataclass(frozen=True)
class Membership:
    status: str  # "inside", "isolated", "excluded"
    depth: int
    boundary: bool = False
    index: int | None = None

    def __str__(self):
        if self.status == "inside":
            return f"inside-E-at-depth-{self.depth}"
        if self.status == "isolated":
            return "isolated-point"
        return f"excluded-at-depth-{self.depth}"


def _locate(level: LevelSet, x) -> tuple[int | None, bool]:
    """Index of the interval containing ``x`` (certified) and a boundary flag."""
    ivs = level.intervals
    lo, hi = 0, len(ivs)
    while lo < hi:
        mid = (lo + hi) // 2
        if certified_cmp(ivs[mid].right, x) < 0:
            lo = mid + 1
        else:
            hi = mid
    if lo == len(ivs):
        return None, False
    iv = ivs[lo]
    c_left = certified_cmp(iv.left, x)
    if c_left > 0:
        return None, False
    c_right = certified_cmp(iv.right, x)
    return lo, c_left == 0 or c_right == 0


def membership(levels, isolated, x) -> Membership:
    """Classify ``x`` against the covers (deepest first failing level)."""
    levels = list(levels)
    for pt in isolated or ():
        if pt.value.contains(x):
            return Membership("isolated", pt.birth)
    last = None
    for lvl in levels:
        idx, edge = _locate(lvl, x)
        if idx is None:
            return Membership("excluded", lvl.depth)
        last = Membership("inside", lvl.depth, edge, idx)
    return last


# ---------------------------------------------------------------------------
# JSON exchange
# ---------------------------------------------------------------------------


def _frac_json(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _json_frac(d) -> Fraction:
    return Fraction(int(d["num"]), int(d["den"]))


def cover_to_dict(cf: ContinuedFraction, cover: Cover, isolated=(), bits: int = 128,
                  config: dict | None = None) -> dict:
    levels = []
    for lvl in cover.levels:
        ivs = []
        for iv in lvl.intervals:
            enc = iv.enclosure(bits)
            ivs.append({"lo": _frac_json(enc.lo), "hi": _frac_json(enc.hi)})
        levels.append({"i": lvl.depth, "parity": lvl.parity, "intervals": ivs})
    doc = {
        "theta": cf.describe(),
        "depth": cover.depth,
        "partial": cover.partial,
        "levels": levels,
        "isolated": [{"enclosure": {"lo": _frac_json(p.value.lo), "hi": _frac_json(p.value.hi)},
                      "birth": p.birth, "parent": p.parent} for p in isolated],
    }
    if config is not None:
        doc = {"config": config, **doc}
    return doc


def cover_from_dict(doc: dict) -> tuple[str, list[LevelSet], list[IsolatedPoint]]:
    """Inverse of :func:`cover_to_dict`: rational intervals only."""
    levels = []
    for lvl in doc["levels"]:
        ivs = [Interval(_json_frac(iv["lo"]), _json_frac(iv["hi"])) for iv in lvl["intervals"]]
        length = (ivs[0].right - ivs[0].left) if ivs else Fraction(0)
        levels.append(LevelSet(lvl["i"], ivs, length, lvl.get("parity", 0)))
    iso = [IsolatedPoint(RatInterval(_json_frac(p["enclosure"]["lo"]), _json_frac(p["enclosure"]["hi"])),
                         p["birth"], p.get("parent", 0)) for p in doc.get("isolated", [])]
    return doc["theta"], levels, iso


def rational_levels(cover: Cover, bits: int = 128) -> list[LevelSet]:
    """Levels with each interval replaced by its outer rational enclosure."""
    out = []
    for lvl in cover.levels:
        ivs = []
        for iv in lvl.intervals:
            enc = iv.enclosure(bits)
            ivs.append(Interval(enc.lo, enc.hi))
        out.append(LevelSet(lvl.depth, ivs, lvl.length, lvl.parity, list(lvl.parents)))
    return out
