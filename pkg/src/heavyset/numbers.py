"""Exact and certified real numbers.

Three kinds of value flow through the package:

* ``Fraction`` for exact rationals (convergents, sample points, endpoints),
* :class:`QuadraticReal` for exact elements ``(p + q*sqrt(d)) / r`` of a real
  quadratic field, used whenever the rotation number has an eventually
  periodic expansion,
* :class:`RatInterval` for certified rational enclosures of anything else.

Comparisons never guess.  ``QuadraticReal`` comparisons are exact; a
``RatInterval`` comparison either separates or raises :class:`Ambiguous`.
"""

from __future__ import annotations

import math
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from typing import Union

import gmpy2

Rational = Fraction


class Ambiguous(ArithmeticError):
    """A certified comparison could not be decided at the current precision."""


def _squarefree_split(d: int, trial_limit: int = 10**6) -> tuple[int, int]:
    """Return ``(s, k)`` with ``d == s*s*k`` and ``k`` squarefree when possible.

    Trial division stops at ``trial_limit``; past that point ``k`` may keep a
    square factor, which only costs canonical uniqueness, not correctness.
    """
    s = 1
    p = 2
    # after removing every p <= cbrt(d), what is left has at most two prime factors
    limit = min(trial_limit, int(gmpy2.iroot(d, 3)[0]) + 1) if d > 1 else 0
    while p <= limit:
        pp = p * p
        while d % pp == 0:
            d //= pp
            s *= p
        p += 1 if p == 2 else 2
    r = math.isqrt(d)
    if r * r == d:
        return s * r, 1
    return s, d


class QuadraticReal:
    """Exact real ``(p + q*sqrt(d)) / r`` with ``d`` squarefree.

    Rationals are represented with ``q == 0``; they combine with any field.
    """

    __slots__ = ("p", "q", "r", "d")

    def __init__(self, p: int, q: int = 0, r: int = 1, d: int = 0):
        if r == 0:
            raise ZeroDivisionError("zero denominator")
        if q != 0:
            if d <= 1:
                raise ValueError("d must be a non-square integer > 1")
            s, d = _squarefree_split(d)
            q *= s
            if d == 1:
                p, q = p + q, 0
        if q == 0:
            d = 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        self.p, self.q, self.r, self.d = p, q, r, d

    @classmethod
    def _raw(cls, p: int, q: int, r: int, d: int) -> "QuadraticReal":
        # d already squarefree; only normalizes sign and gcd
        obj = cls.__new__(cls)
        if q == 0:
            d = 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        obj.p, obj.q, obj.r, obj.d = p, q, r, d
        return obj

    @classmethod
    def sqrt(cls, d: int) -> "QuadraticReal":
        return cls(0, 1, 1, d)

    @classmethod
    def coerce(cls, x) -> "QuadraticReal":
        if isinstance(x, QuadraticReal):
            return x
        if isinstance(x, int):
            return cls._raw(x, 0, 1, 0)
        if isinstance(x, Fraction):
            return cls._raw(x.numerator, 0, x.denominator, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QuadraticReal")

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if self.q:
            raise ValueError("irrational value")
        return Fraction(self.p, self.r)

    # -- arithmetic -------------------------------------------------------
    def _field(self, other: "QuadraticReal") -> int:
        if self.d and other.d and self.d != other.d:
            raise ValueError(f"incompatible fields sqrt({self.d}) and sqrt({other.d})")
        return self.d or other.d

    def __add__(self, other):
        if isinstance(other, RatInterval):
            return NotImplemented
        try:
            o = QuadraticReal.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(o)
        return QuadraticReal._raw(self.p * o.r + o.p * self.r, self.q * o.r + o.q * self.r,
                                  self.r * o.r, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticReal._raw(-self.p, -self.q, self.r, self.d)

    def __sub__(self, other):
        if isinstance(other, RatInterval):
            return NotImplemented
        try:
            o = QuadraticReal.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return QuadraticReal.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, RatInterval):
            return NotImplemented
        try:
            o = QuadraticReal.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(o)
        p = self.p * o.p + self.q * o.q * d
        q = self.p * o.q + self.q * o.p
        return QuadraticReal._raw(p, q, self.r * o.r, d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticReal":
        return QuadraticReal._raw(self.p, -self.q, self.r, self.d)

    def norm(self) -> Fraction:
        """Field norm ``x * conjugate(x)`` (a rational)."""
        return Fraction(self.p * self.p - self.q * self.q * self.d, self.r * self.r)

    def inverse(self) -> "QuadraticReal":
        n = self.p * self.p - self.q * self.q * self.d
        if n == 0:
            raise ZeroDivisionError("division by zero")
        # 1/x = r * conj(p + q sqrt d) / (p^2 - q^2 d)
        return QuadraticReal._raw(self.r * self.p, -self.r * self.q, n, self.d)

    def __truediv__(self, other):
        if isinstance(other, RatInterval):
            return NotImplemented
        try:
            o = QuadraticReal.coerce(other)
        except TypeError:
            return NotImplemented
        self._field(o)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QuadraticReal.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticReal._raw(1, 0, 1, 0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order ------------------------------------------------------------
    def sign(self) -> int:
        p, q = self.p, self.q
        if q == 0:
            return (p > 0) - (p < 0)
        if p >= 0 and q > 0:
            return 1
        if p <= 0 and q < 0:
            return -1
        # opposite signs: compare p^2 with q^2 d (never equal, d non-square)
        if p * p > q * q * self.d:
            return 1 if p > 0 else -1
        return 1 if q > 0 else -1

    def cmp(self, other) -> int:
        if isinstance(other, RatInterval):
            return -other.cmp(self)
        return (self - other).sign()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadraticReal)):
            o = QuadraticReal.coerce(other)
            return (self.p, self.q, self.r) == (o.p, o.q, o.r) and (self.q == 0 or self.d == o.d)
        return NotImplemented

    def __hash__(self):
        if self.q == 0:
            return hash(Fraction(self.p, self.r))
        return hash((self.p, self.q, self.r, self.d))

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def _floor_sqrt_term(self) -> int:
        """floor(q*sqrt(d)), exact."""
        s = math.isqrt(self.q * self.q * self.d)
        if self.q >= 0:
            return s
        return -s - 1

    def __floor__(self) -> int:
        if self.q == 0:
            return self.p // self.r
        return (self.p + self._floor_sqrt_term()) // self.r

    def __float__(self) -> float:
        return float(self.enclose(80).mid())

    def enclose(self, bits: int = 128) -> "RatInterval":
        """Rational enclosure of width at most ``2**-bits`` (absolute)."""
        if self.q == 0:
            v = Fraction(self.p, self.r)
            return RatInterval(v, v)
        scale = 1 << bits
        # floor(q sqrt(d) * scale) exactly
        s = math.isqrt(self.q * self.q * self.d * scale * scale)
        if self.q < 0:
            lo_num, hi_num = -s - 1, -s
        else:
            lo_num, hi_num = s, s + 1
        den = self.r * scale
        return RatInterval(Fraction(self.p * scale + lo_num, den),
                           Fraction(self.p * scale + hi_num, den))

    def cf_digits(self, k: int) -> list[int]:
        """First ``k`` partial quotients of a value in (0, 1)."""
        if not (0 < self < 1):
            raise ValueError("value must lie in (0, 1)")
        out = []
        x = self
        for _ in range(k):
            if x.q == 0 and x.p == 0:
                break
            y = x.inverse()
            a = math.floor(y)
            out.append(a)
            x = y - a
        return out

    def __repr__(self):
        if self.q == 0:
            return f"QuadraticReal({self.p}/{self.r})"
        return f"QuadraticReal(({self.p} + {self.q}*sqrt({self.d}))/{self.r})"

    def __str__(self):
        if self.q == 0:
            return str(Fraction(self.p, self.r))
        return f"({self.p}{'+' if self.q > 0 else '-'}{abs(self.q)}√{self.d})/{self.r}"


class RatInterval:
    """Closed rational enclosure ``[lo, hi]`` of a real number."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo, self.hi = lo, hi

    @classmethod
    def coerce(cls, x, bits: int = 256) -> "RatInterval":
        if isinstance(x, RatInterval):
            return x
        if isinstance(x, QuadraticReal):
            return x.enclose(bits)
        return cls(x)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, RatInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, QuadraticReal):
            return x.cmp(self.lo) >= 0 and x.cmp(self.hi) <= 0
        return self.lo <= x <= self.hi

    def intersects(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def rounded(self, bits: int) -> "RatInterval":
        """Outward rounding to about ``bits`` significant bits."""
        if self.lo == self.hi and self.lo.denominator.bit_length() <= bits:
            return self
        mag = max(abs(self.lo), abs(self.hi))
        if mag == 0:
            return self
        e = bits - (mag.numerator.bit_length() - mag.denominator.bit_length())
        if e <= 0:
            return self
        scale = 1 << e
        lo = Fraction(math.floor(self.lo * scale), scale)
        hi = Fraction(math.ceil(self.hi * scale), scale)
        return RatInterval(lo, hi)

    def _other(self, other):
        if isinstance(other, (RatInterval, QuadraticReal, int, Fraction)):
            return RatInterval.coerce(other, max(64, self._bits_hint()))
        return None

    def _bits_hint(self) -> int:
        w = self.width()
        if w == 0:
            return 256
        return max(64, w.denominator.bit_length() - w.numerator.bit_length() + 64)

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return RatInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return RatInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.lo >= 0 and o.lo >= 0:
            return RatInterval(self.lo * o.lo, self.hi * o.hi)
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RatInterval(min(c), max(c))

    __rmul__ = __mul__

    def inverse(self) -> "RatInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def cmp(self, other) -> int:
        """Certified comparison; raises :class:`Ambiguous` on overlap."""
        if isinstance(other, QuadraticReal):
            if other.q == 0:
                other = other.as_fraction()
            else:
                if other.cmp(self.lo) < 0:
                    return 1
                if other.cmp(self.hi) > 0:
                    return -1
                raise Ambiguous(f"{other} lies inside [{self.lo}, {self.hi}]")
        if isinstance(other, RatInterval):
            if self.hi < other.lo:
                return -1
            if self.lo > other.hi:
                return 1
            if self.lo == self.hi == other.lo == other.hi:
                return 0
            raise Ambiguous("overlapping enclosures")
        x = Fraction(other)
        if self.hi < x:
            return -1
        if self.lo > x:
            return 1
        if self.lo == self.hi == x:
            return 0
        raise Ambiguous(f"{x} lies inside [{self.lo}, {self.hi}]")

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __floor__(self) -> int:
        a, b = math.floor(self.lo), math.floor(self.hi)
        if a != b:
            raise Ambiguous("floor not determined")
        return a

    def __float__(self) -> float:
        return float(self.mid())

    def enclose(self, bits: int = 128) -> "RatInterval":
        return self

    def __repr__(self):
        return f"RatInterval({float(self.lo)!r}, {float(self.hi)!r})"


Real = Union[Fraction, QuadraticReal, RatInterval]


def enclose(x, bits: int = 128) -> RatInterval:
    """Rational enclosure of any supported value."""
    if isinstance(x, (QuadraticReal, RatInterval)):
        return x.enclose(bits)
    return RatInterval(x)


def certified_cmp(x, y) -> int:
    """Exact or certified three-way comparison; may raise :class:`Ambiguous`."""
    if isinstance(x, (QuadraticReal, RatInterval)):
        return x.cmp(y)
    if isinstance(y, (QuadraticReal, RatInterval)):
        return -y.cmp(x)
    x, y = Fraction(x), Fraction(y)
    return (x > y) - (x < y)


def fraction_to_decimal(x: Fraction, digits: int = 20, upward: bool = False) -> str:
    """Directed decimal rendering of a rational (exponent range unbounded)."""
    ctx = Context(prec=digits, rounding=ROUND_CEILING if upward else ROUND_FLOOR,
                  Emin=-10**9, Emax=10**9)
    return str(ctx.divide(Decimal(x.numerator), Decimal(x.denominator)))


def log_fraction(x: Fraction) -> float:
    """Natural log of a positive rational without float underflow."""
    return math.log(x.numerator) - math.log(x.denominator)
