"""Lazy continued-fraction digit streams.

A rotation number ``theta = [a1, a2, a3, ...] = 1/(a1 + 1/(a2 + ...))`` is
held as a :class:`ContinuedFraction`: a view onto a digit *source* plus a
small edited head.  Renormalization only ever rewrites the first couple of
digits (drop, prepend, bump), so a view is cheap to derive and shares the
memoized tail of its source.

Sources
-------
``FiniteRational``     Euclidean expansion of ``num/den``; terminates.
``PeriodicQuadratic``  ``[pre; (period)]``; exact value is quadratic.
``Rule``               digits from a closed-form generator.
``RandomBits``         a real drawn from a dyadic cell of width ``2**-bits``;
                       digits are emitted only while certified for the
                       whole cell.
``Frozen``             a fixed digit prefix (snapshot); reading past it
                       raises :class:`BudgetExhausted`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np

from .numbers import Ambiguous, QuadraticReal, RatInterval


class CFError(Exception):
    """Base class for digit-stream failures."""


class BudgetExhausted(CFError):
    """The backing cannot certify the requested digit."""


class RationalTerminated(CFError):
    """A rational expansion ended before the requested digit."""


class NotPeriodic(CFError, ValueError):
    """An exact quadratic value was requested from a non-periodic stream."""


# ---------------------------------------------------------------------------
# sources
# ---------------------------------------------------------------------------


class FiniteRational:
    kind = "rational"

    def __init__(self, num: int, den: int):
        if den <= 0 or not 0 < num < den:
            raise ValueError("rational rotation number must lie in (0, 1)")
        g = math.gcd(num, den)
        self.num, self.den = num // g, den // g
        out = []
        n, d = self.num, self.den
        while n:
            a, r = divmod(d, n)
            out.append(a)
            d, n = n, r
        self._digits = tuple(out)

    def digit(self, k: int) -> int:
        if k >= len(self._digits):
            raise RationalTerminated(f"{self.num}/{self.den} has only {len(self._digits)} digits")
        return self._digits[k]

    def __len__(self):
        return len(self._digits)

    def describe(self) -> str:
        return f"{self.num}/{self.den}"


class PeriodicQuadratic:
    kind = "periodic"

    def __init__(self, preperiod, period):
        self.preperiod = tuple(int(a) for a in preperiod)
        self.period = tuple(int(a) for a in period)
        if not self.period:
            raise ValueError("period must be non-empty")
        if any(a < 1 for a in self.preperiod + self.period):
            raise ValueError("partial quotients must be positive")

    def digit(self, k: int) -> int:
        n = len(self.preperiod)
        if k < n:
            return self.preperiod[k]
        return self.period[(k - n) % len(self.period)]

    def describe(self) -> str:
        pre = ",".join(map(str, self.preperiod))
        per = ",".join(map(str, self.period))
        return f"[{pre};({per})]"


class Rule:
    """Closed-form digit generators, addressed by name."""

    kind = "rule"

    def __init__(self, name: str, *params):
        self.name = name
        self.params = tuple(params)
        try:
            self._fn = _RULES[name](*params)
        except KeyError:
            raise ValueError(f"unknown rule {name!r}") from None
        self._cache: dict[int, int] = {}

    def digit(self, k: int) -> int:
        a = self._cache.get(k)
        if a is None:
            a = self._cache[k] = self._fn(k)
        return a

    def describe(self) -> str:
        if not self.params:
            return f"rule:{self.name}"
        return f"rule:{self.name}({','.join(str(p) for p in self.params)})"


class RandomBits:
    """A real in the open dyadic cell ``(N/2**bits, (N+1)/2**bits)``.

    With a seed, ``N`` is drawn uniformly; without one it must be supplied
    (used to pin down a known constant to ``bits`` binary places).
    """

    kind = "random"

    def __init__(self, seed: int | None, bits: int = 4096, numerator: int | None = None):
        if bits < 8:
            raise ValueError("bit budget too small")
        self.seed, self.bits = seed, bits
        if numerator is None:
            if seed is None:
                raise ValueError("need a seed or a numerator")
            rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), 0x7E7A]))
            raw = int.from_bytes(rng.bytes((bits + 7) // 8), "little") & ((1 << bits) - 1)
            numerator = 1 + raw % ((1 << bits) - 2)
        if not 0 < numerator < (1 << bits) - 1:
            raise ValueError("numerator out of range")
        self.numerator = numerator
        # open interval (ln/ld, hn/hd), kept unreduced
        self._state = (numerator, 1 << bits, numerator + 1, 1 << bits)
        self._digits: list[int] = []
        self._dead = False

    def _advance(self) -> None:
        ln, ld, hn, hd = self._state
        if ln == 0:
            self._dead = True
            raise BudgetExhausted(self._msg())
        a = hd // hn
        if ld > (a + 1) * ln:
            self._dead = True
            raise BudgetExhausted(self._msg())
        self._digits.append(a)
        self._state = (hd - a * hn, hn, ld - a * ln, ln)

    def _msg(self) -> str:
        return f"{self.bits}-bit budget exhausted after {len(self._digits)} digits"

    def digit(self, k: int) -> int:
        while len(self._digits) <= k:
            if self._dead:
                raise BudgetExhausted(self._msg())
            self._advance()
        return self._digits[k]

    def describe(self) -> str:
        if self.seed is None:
            return f"dyadic({self.numerator},{self.bits})"
        return f"random({self.seed},{self.bits})"


class Frozen:
    kind = "frozen"

    def __init__(self, digits):
        self._digits = tuple(int(a) for a in digits)

    def digit(self, k: int) -> int:
        if k >= len(self._digits):
            raise BudgetExhausted(f"frozen snapshot holds {len(self._digits)} digits")
        return self._digits[k]

    def describe(self) -> str:
        return "frozen[" + ",".join(map(str, self._digits)) + "]"


# -- rule catalogue ---------------------------------------------------------


def _factorial_interleaved():
    # [2!, 1, 3!, 1, 4!, 1, ...]
    return lambda k: math.factorial(k // 2 + 2) if k % 2 == 0 else 1


def _e_minus_2():
    # e - 2 = [1, 2, 1, 1, 4, 1, 1, 6, ...]; 1-based index j = 3t+2 carries 2(t+1)
    def digit(k):
        j = k + 1
        return 2 * (j + 1) // 3 if j % 3 == 2 else 1
    return digit


def _arith(start, step):
    start, step = int(start), int(step)
    if start < 1 or step < 0:
        raise ValueError("arith needs start >= 1, step >= 0")
    return lambda k: start + k * step


def target_d_parameters(d: Fraction, i: int) -> tuple[int, int]:
    """``(n_i, m_i)`` for the prescribed-dimension construction, ``d > 0``.

    ``m_i = 2**i`` and ``n_i = 1 + floor((m_i + 1)**(1/d - 1) / 2)``, evaluated
    with exact integer roots.
    """
    m = 1 << i
    e = 1 / d - 1  # rational exponent u/v >= 0
    u, v = e.numerator, e.denominator
    root = int(gmpy2.iroot(gmpy2.mpz(m + 1) ** u, v)[0])  # floor((m+1)^(u/v))
    return 1 + root // 2, m


def _target_d(d):
    d = parse_dimension(d)
    if d == 0:
        return _factorial_interleaved()

    @lru_cache(maxsize=None)
    def params(i):
        return target_d_parameters(d, i)

    def digit(k):
        n, m = params(k // 2)
        return 2 * n if k % 2 == 0 else m
    return digit


_RULES = {
    "factorial_interleaved": _factorial_interleaved,
    "e_minus_2": _e_minus_2,
    "arith": _arith,
    "target_d": _target_d,
}


def parse_dimension(d) -> Fraction:
    if isinstance(d, float):
        d = repr(d)
    d = Fraction(d)
    if not 0 <= d <= 1:
        raise ValueError("dimension must lie in [0, 1]")
    return d


# ---------------------------------------------------------------------------
# streams
# ---------------------------------------------------------------------------


class ContinuedFraction:
    """Digit stream ``head + source[offset:]``.

    Digits are indexed from 0 in code (``digit(0)`` is ``a1``).
    """

    __slots__ = ("source", "offset", "head")

    def __init__(self, source, offset: int = 0, head: tuple[int, ...] = ()):
        self.source = source
        self.offset = offset
        self.head = tuple(head)

    # -- constructors -----------------------------------------------------
    @classmethod
    def rational(cls, num: int, den: int = 1) -> "ContinuedFraction":
        return cls(FiniteRational(num, den))

    @classmethod
    def periodic(cls, preperiod, period) -> "ContinuedFraction":
        return cls(PeriodicQuadratic(preperiod, period))

    @classmethod
    def rule(cls, name: str, *params) -> "ContinuedFraction":
        return cls(Rule(name, *params))

    @classmethod
    def random(cls, seed: int, bits: int = 4096) -> "ContinuedFraction":
        return cls(RandomBits(seed, bits))

    @classmethod
    def dyadic(cls, numerator: int, bits: int) -> "ContinuedFraction":
        return cls(RandomBits(None, bits, numerator))

    @classmethod
    def frozen_digits(cls, digits) -> "ContinuedFraction":
        return cls(Frozen(digits))

    # -- digits -----------------------------------------------------------
    def digit(self, k: int) -> int:
        h = len(self.head)
        if k < h:
            return self.head[k]
        return self.source.digit(self.offset + k - h)

    def digits(self, k: int) -> list[int]:
        if k < 1:
            raise ValueError("k must be >= 1")
        return [self.digit(i) for i in range(k)]

    def has_digits(self, k: int) -> bool:
        try:
            self.digit(k - 1)
        except CFError:
            return False
        return True

    def available(self, limit: int) -> int:
        """Number of digits obtainable, capped at ``limit``."""
        lo, hi = 0, limit
        if self.has_digits(limit):
            return limit
        # digits are a prefix-closed set, so bisect
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.has_digits(mid):
                lo = mid
            else:
                hi = mid - 1
        return lo

    # -- head edits -------------------------------------------------------
    def drop(self, j: int) -> "ContinuedFraction":
        h = len(self.head)
        if j <= h:
            return ContinuedFraction(self.source, self.offset, self.head[j:])
        return ContinuedFraction(self.source, self.offset + j - h, ())

    def prepend(self, *digits: int) -> "ContinuedFraction":
        return ContinuedFraction(self.source, self.offset, tuple(digits) + self.head)

    def gauss(self) -> "ContinuedFraction":
        """The Gauss shift ``[a1, a2, ...] -> [a2, a3, ...]``."""
        self.digit(1)  # raises RationalTerminated when nothing remains
        return self.drop(1)

    def freeze(self, k: int) -> "ContinuedFraction":
        """Immutable snapshot of the first ``k`` digits."""
        return ContinuedFraction(Frozen(self.digits(k)))

    # -- identity ---------------------------------------------------------
    @property
    def kind(self) -> str:
        return self.source.kind

    @property
    def is_periodic(self) -> bool:
        return isinstance(self.source, PeriodicQuadratic)

    @property
    def is_rational(self) -> bool:
        return isinstance(self.source, FiniteRational)

    def state_key(self):
        """Hashable key; equal keys imply equal digit streams."""
        src = self.source
        if isinstance(src, PeriodicQuadratic):
            n, p = len(src.preperiod), len(src.period)
            off = self.offset if self.offset < n else n + (self.offset - n) % p
            return (id(src), self.head, off)
        return (id(src), self.head, self.offset)

    def describe(self) -> str:
        base = self.source.describe()
        if self.offset == 0 and not self.head:
            return base
        head = "".join(f"{a}," for a in self.head)
        return f"[{head}...]@{base}+{self.offset}"

    def __repr__(self):
        try:
            shown = self.digits(min(8, max(1, self.available(8))))
        except CFError:
            shown = []
        return f"ContinuedFraction({self.describe()}: {shown}...)"

    # -- numerics ---------------------------------------------------------
    def convergents(self, n: int) -> list[tuple[int, int]]:
        """``[(p_0, q_0), ..., (p_n, q_n)]`` with ``p_0/q_0 = 0/1``."""
        p0, q0, p1, q1 = 1, 0, 0, 1
        out = [(0, 1)]
        for k in range(n):
            a = self.digit(k)
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            out.append((p1, q1))
        return out

    def bounds(self, n: int) -> RatInterval:
        """Enclosure between the convergents ``p_{n-1}/q_{n-1}`` and ``p_n/q_n``."""
        if n < 1:
            raise ValueError("n must be >= 1")
        conv = self.convergents(n)
        a = Fraction(*conv[-2])
        b = Fraction(*conv[-1])
        if self.is_rational and n >= len(self.source) and self.offset == 0 and not self.head:
            return RatInterval(b, b)
        return RatInterval(min(a, b), max(a, b))

    def enclosure(self, bits: int = 128) -> RatInterval:
        """Tightest mediant bracket reachable, aiming at width ``2**-bits``.

        Uses as many digits as the backing can certify; never raises for a
        budget shortfall once at least one digit is known.
        """
        target = 1 << bits
        p0, q0, p1, q1 = 1, 0, 0, 1
        k = 0
        while True:
            try:
                a = self.digit(k)
            except RationalTerminated:
                v = Fraction(p1, q1)
                return RatInterval(v, v)
            except BudgetExhausted:
                if k == 0:
                    raise
                break
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            k += 1
            if q1 * (q1 + q0) >= target:
                break
        x, y = Fraction(p1, q1), Fraction(p1 + p0, q1 + q0)
        if self.is_rational:
            # a terminating expansion may end exactly at the next convergent
            try:
                self.digit(k)
            except RationalTerminated:
                return RatInterval(x, x)
        return RatInterval(min(x, y), max(x, y))

    def value_quadratic(self) -> QuadraticReal:
        """Exact value of an eventually periodic stream."""
        src = self.source
        if not isinstance(src, PeriodicQuadratic):
            raise NotPeriodic(f"{self.describe()} is not periodic")
        n = len(src.preperiod)
        if self.offset < n:
            pre = self.head + src.preperiod[self.offset:]
            per = src.period
        else:
            ph = (self.offset - n) % len(src.period)
            pre = self.head
            per = src.period[ph:] + src.period[:ph]
        A, B, C, D = _mobius(per)
        # fixed point y = (A y + B)/(C y + D), positive root of C y^2 + (D - A) y - B
        disc = (D - A) ** 2 + 4 * B * C
        y = QuadraticReal(A - D, 1, 2 * C, disc)
        if not pre:
            return y
        A, B, C, D = _mobius(pre)
        return (A * y + B) / (C * y + D)

    def value(self, bits: int = 128):
        """Exact value when available (quadratic or rational), else an enclosure."""
        if self.is_periodic:
            return self.value_quadratic()
        if self.is_rational:
            enc = self.enclosure(bits)
            if enc.lo == enc.hi:
                return enc.lo
            return enc
        return self.enclosure(bits)

    def compare(self, x, max_bits: int = 1 << 16) -> int:
        """Certified sign of ``theta - x`` for rational ``x``."""
        x = Fraction(x)
        if self.is_periodic:
            return self.value_quadratic().cmp(x)
        bits = 64
        while True:
            enc = self.enclosure(bits)
            try:
                return enc.cmp(x)
            except Ambiguous:
                pass
            if enc.lo == enc.hi:
                return 0
            if bits >= max_bits:
                raise BudgetExhausted(f"cannot separate {self.describe()} from {x}")
            grown = self.enclosure(bits * 2)
            if grown.width() == enc.width():
                raise BudgetExhausted(f"cannot separate {self.describe()} from {x}")
            bits *= 2


def _mobius(word) -> tuple[int, int, int, int]:
    """Matrix of ``t -> [w1, ..., wk + t]`` as ``(A, B, C, D)``."""
    A, B, C, D = 1, 0, 0, 1
    for a in word:
        # right-multiply by [[0, 1], [1, a]]
        A, B, C, D = B, A + a * B, D, C + a * D
    return A, B, C, D


# -- function forms of the methods ----------------------------------------


def digits(cf: ContinuedFraction, k: int) -> list[int]:
    return cf.digits(k)


def bounds(cf: ContinuedFraction, n: int) -> RatInterval:
    return cf.bounds(n)


def gauss(cf: ContinuedFraction) -> ContinuedFraction:
    return cf.gauss()


def value_quadratic(cf: ContinuedFraction) -> QuadraticReal:
    return cf.value_quadratic()


def compare(cf: ContinuedFraction, x) -> int:
    return cf.compare(x)


# ---------------------------------------------------------------------------
# descriptor grammar
# ---------------------------------------------------------------------------

_PERIODIC = re.compile(r"^\[\s*([0-9,\s]*?)\s*(?:;\s*)?\(\s*([0-9,\s]+)\s*\)\s*\]$")
_FINITE = re.compile(r"^\[\s*([0-9,\s]+)\s*\]$")
_CALL = re.compile(r"^([a-z_][a-z0-9_]*)\s*(?:\((.*)\))?$")


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def parse_theta(text: str) -> ContinuedFraction:
    """Parse a rotation-number descriptor.

    Accepted forms::

        [a1,a2,...]             finite expansion (a rational)
        [a1,...;(p1,...,pk)]    preperiod ; period
        p/q                     rational
        rule:e_minus_2          (prefix optional) factorial_interleaved,
        rule:arith(2,4)         e_minus_2, arith(start,step), target_d(d)
        random(seed,bits)       uniform draw from a dyadic cell
        dyadic(N,bits)          the open cell (N/2**bits, (N+1)/2**bits)
        frozen[a1,...,ak]       an irrational known only through k digits
    """
    s = text.strip()
    m = re.fullmatch(r"frozen\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]", s)
    if m:
        ds = _ints(m.group(1))
        if any(a < 1 for a in ds):
            raise ValueError("partial quotients must be positive")
        return ContinuedFraction.frozen_digits(ds)
    m = _PERIODIC.match(s)
    if m:
        return ContinuedFraction.periodic(_ints(m.group(1)), _ints(m.group(2)))
    m = _FINITE.match(s)
    if m:
        ds = _ints(m.group(1))
        if any(a < 1 for a in ds):
            raise ValueError("partial quotients must be positive")
        A, B, C, D = _mobius(ds)
        # value at t = 0
        return ContinuedFraction.rational(B, D)
    if re.fullmatch(r"\d+\s*/\s*\d+", s):
        num, den = (int(t) for t in s.split("/"))
        return ContinuedFraction.rational(num, den)
    if s.startswith("rule:"):
        s = s[5:]
    m = _CALL.match(s)
    if m:
        name, args = m.group(1), m.group(2)
        params = [a.strip() for a in args.split(",")] if args else []
        if name == "random":
            if len(params) not in (1, 2):
                raise ValueError("random(seed[,bits])")
            return ContinuedFraction.random(*(int(p) for p in params))
        if name == "dyadic":
            if len(params) != 2:
                raise ValueError("dyadic(numerator,bits)")
            return ContinuedFraction.dyadic(int(params[0]), int(params[1]))
        if name == "arith":
            params = [int(p) for p in params]
        if name in _RULES:
            return ContinuedFraction.rule(name, *params)
    raise ValueError(f"unrecognized theta descriptor {text!r}")
