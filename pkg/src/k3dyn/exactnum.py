"""Exact arithmetic in Q and in real quadratic fields Q(sqrt d).

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator).  :class:`QuadExt` stores ``p + q*sqrt(d)`` with rational
``p, q`` and squarefree ``d > 1``; elements with ``q == 0`` are stored
as purely rational with ``d == 1`` so that zero (and every rational)
compares equal across fields.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

from .errors import DivisionByZero, IncompatibleField, NotSquarefree

BigRational = Fraction


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        if int(den) == 0:
            raise DivisionByZero(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return ``(s, d)`` with ``n == s*s*d`` and ``d`` squarefree (``n > 0``)."""
    if n <= 0:
        raise ValueError("squarefree decomposition needs a positive integer")
    s, d = 1, 1
    f = 2
    m = n
    while f * f <= m:
        e = 0
        while m % f == 0:
            m //= f
            e += 1
        s *= f ** (e // 2)
        if e % 2:
            d *= f
        f += 1
    return s, d * m


@total_ordering
class QuadExt:
    """Immutable element ``rat + rad*sqrt(d)`` of a real quadratic field."""

    __slots__ = ("_p", "_q", "_d")

    def __init__(self, rat=0, rad=0, d: int = 1):
        p = as_rational(rat)
        q = as_rational(rad)
        d = int(d)
        if q == 0:
            d = 1
        elif d == 1:
            # sqrt(1) = 1
            p, q = p + q, Fraction(0)
        elif not is_squarefree(d) or d < 1:
            raise NotSquarefree(f"d={d} must be a squarefree integer > 1")
        object.__setattr__(self, "_p", p)
        object.__setattr__(self, "_q", q)
        object.__setattr__(self, "_d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadExt is immutable")

    @classmethod
    def sqrt(cls, n: int) -> QuadExt:
        """Exact square root of a non-negative integer, reduced to ``s*sqrt(d)``."""
        if n < 0:
            raise ValueError("only real square roots are supported")
        if n == 0:
            return cls(0)
        s, d = squarefree_decomposition(n)
        if d == 1:
            return cls(s)
        return cls(0, s, d)

    @property
    def rat(self) -> Fraction:
        return self._p

    @property
    def rad(self) -> Fraction:
        return self._q

    @property
    def d(self) -> int:
        return self._d

    @property
    def is_rational(self) -> bool:
        return self._q == 0

    def conjugate(self) -> QuadExt:
        return QuadExt(self._p, -self._q, self._d)

    def norm(self) -> Fraction:
        return self._p * self._p - self._q * self._q * self._d

    def trace(self) -> Fraction:
        return 2 * self._p

    # -- coercion ---------------------------------------------------------

    @staticmethod
    def coerce(x) -> QuadExt:
        if isinstance(x, QuadExt):
            return x
        return QuadExt(as_rational(x))

    def _common_d(self, other: QuadExt) -> int:
        if self._q == 0:
            return other._d
        if other._q == 0 or other._d == self._d:
            return self._d
        raise IncompatibleField(f"Q(sqrt {self._d}) and Q(sqrt {other._d}) do not mix")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        try:
            o = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._common_d(o)
        return QuadExt(self._p + o._p, self._q + o._q, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self._p, -self._q, self._d)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if qe_sign(self) < 0 else self

    def __sub__(self, other):
        try:
            o = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._common_d(o)
        return QuadExt(
            self._p * o._p + self._q * o._q * d,
            self._p * o._q + self._q * o._p,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadExt:
        n = self.norm()
        if n == 0:
            # for squarefree d > 1 the norm vanishes only at zero
            raise DivisionByZero("inverse of zero")
        return QuadExt(self._p / n, -self._q / n, self._d)

    def __truediv__(self, other):
        try:
            o = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        self._common_d(o)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QuadExt.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadExt(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison -------------------------------------------------------

    def sign(self) -> int:
        return qe_sign(self)

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            return self._p == other._p and self._q == other._q and self._d == other._d
        if isinstance(other, (int, Rational)):
            return self._q == 0 and self._p == other
        return NotImplemented

    def __hash__(self):
        if self._q == 0:
            return hash(self._p)
        return hash((self._p, self._q, self._d))

    def __lt__(self, other):
        try:
            o = QuadExt.coerce(other)
        except TypeError:
            return NotImplemented
        return qe_sign(self - o) < 0

    def __bool__(self):
        return self._p != 0 or self._q != 0

    def __float__(self):
        return float(self._p) + float(self._q) * math.sqrt(self._d)

    # -- display ----------------------------------------------------------

    def __repr__(self):
        if self._q == 0:
            return f"QuadExt({format_rational(self._p)!r})"
        return f"QuadExt({format_rational(self._p)!r}, {format_rational(self._q)!r}, {self._d})"

    def __str__(self):
        """Exact form such as ``7+4√3`` or ``(3+√5)/2``."""
        if self._q == 0:
            return format_rational(self._p)
        den = math.lcm(self._p.denominator, self._q.denominator)
        a = self._p.numerator * (den // self._p.denominator)
        b = self._q.numerator * (den // self._q.denominator)
        if abs(b) == 1:
            rad = f"√{self._d}"
        else:
            rad = f"{abs(b)}√{self._d}"
        if a == 0:
            body = ("-" if b < 0 else "") + rad
        else:
            body = f"{a}{'-' if b < 0 else '+'}{rad}"
        if den == 1:
            return body
        if a == 0:
            return f"{body}/{den}"
        return f"({body})/{den}"

    def to_json(self) -> dict:
        return {"rat": format_rational(self._p), "rad": format_rational(self._q), "d": self._d}

    @classmethod
    def from_json(cls, obj) -> QuadExt:
        if isinstance(obj, (int, str)):
            return cls(as_rational(obj))
        return cls(parse_rational(str(obj["rat"])), parse_rational(str(obj.get("rad", "0"))), int(obj.get("d", 1)))


def qe_arith(op: str, x, y) -> QuadExt:
    x, y = QuadExt.coerce(x), QuadExt.coerce(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def qe_sign(x) -> int:
    """Exact sign of ``p + q*sqrt(d)`` without floating point."""
    x = QuadExt.coerce(x)
    sp, sq = _sgn(x.rat), _sgn(x.rad)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    # opposite signs: the larger magnitude wins
    diff = x.rat * x.rat - x.rad * x.rad * x.d
    return sp * _sgn(diff)


def qe_floor(x) -> int:
    """Exact floor of a real quadratic number."""
    x = QuadExt.coerce(x)
    if x.is_rational:
        return math.floor(x.rat)
    # estimate with an integer square root, then correct exactly
    scale = x.rad.denominator
    t = x.rad.numerator * x.rad.numerator * x.d
    root = math.isqrt(t)
    est = x.rat + Fraction(root if x.rad > 0 else -root, scale)
    m = math.floor(est)
    while qe_sign(x - m) < 0:
        m -= 1
    while qe_sign(x - (m + 1)) >= 0:
        m += 1
    return m


def qe_embed(x, precision: int) -> str:
    """Correctly rounded decimal string with ``precision`` fractional digits.

    Uses the embedding ``sqrt(d) > 0``; ties round away from zero.
    """
    if precision < 1:
        raise ValueError("precision must be at least 1")
    x = QuadExt.coerce(x)
    neg = qe_sign(x) < 0
    mag = -x if neg else x
    n = qe_floor(mag * 10**precision + Fraction(1, 2))
    digits = str(n).rjust(precision + 1, "0")
    text = f"{digits[:-precision]}.{digits[-precision:]}"
    if neg and n != 0:
        text = "-" + text
    return text


def qe_significant(x, sig: int = 6) -> str:
    """Decimal display with ``sig`` significant digits (at least one fractional)."""
    x = QuadExt.coerce(x)
    if not x:
        return "0." + "0" * max(sig - 1, 1)
    whole = abs(qe_floor(abs(x)))
    int_digits = len(str(whole)) if whole else 0
    if whole == 0:
        # count leading zeros after the point
        probe = abs(x)
        lead = 0
        while qe_sign(probe * 10 - 1) < 0:
            probe = probe * 10
            lead += 1
        frac = lead + sig
    else:
        frac = sig - int_digits
    return qe_embed(x, max(frac, 1))


def qe_from_quadratic_root(b: int, c: int, sign: int) -> QuadExt:
    """Root ``(-b + sign*sqrt(b^2-4c))/2`` of the monic ``t^2 + b t + c``."""
    disc = b * b - 4 * c
    if disc < 0:
        raise ValueError("complex roots are not supported")
    return (QuadExt(-b) + sign * QuadExt.sqrt(disc)) / 2
