"""Exact arithmetic in the real quadratic field Q(sqrt 2) and its complexification.

A :class:`RingReal` is ``a + b*sqrt(2)`` with rational ``a`` and ``b``.  Every
comparison is decided exactly (no floating point), so the sign of a fidelity
minus a power of two is always known for certain.

:class:`CRing` pairs two ring reals as real and imaginary part.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

_SQRT2 = math.sqrt(2.0)
_LITERAL = re.compile(r"^\s*(-?\d+)/(\d+)\+(-?\d+)/(\d+)\*r2\s*$")
_RATIONAL = re.compile(r"^\s*(-?\d+)(?:/(\d+))?\s*$")


class RingError(ValueError):
    """Malformed ring literal or an operation leaving the field."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to a rational")


def _rational_sqrt(q: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


class RingReal:
    """An element ``a + b*sqrt(2)`` of Q(sqrt 2)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = _frac(a)
        self.b = _frac(b)

    @classmethod
    def coerce(cls, x) -> "RingReal":
        if isinstance(x, RingReal):
            return x
        return cls(x)

    @classmethod
    def parse(cls, text: str) -> "RingReal":
        """Parse ``"a/b+c/d*r2"``; a bare rational ``"3/5"`` or ``"-2"`` is also accepted."""
        if not isinstance(text, str):
            raise RingError(f"ring literal must be a string, got {text!r}")
        m = _LITERAL.match(text)
        if m:
            an, ad, bn, bd = (int(g) for g in m.groups())
            if ad == 0 or bd == 0:
                raise RingError(f"zero denominator in {text!r}")
            return cls(Fraction(an, ad), Fraction(bn, bd))
        m = _RATIONAL.match(text)
        if m:
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise RingError(f"zero denominator in {text!r}")
            return cls(Fraction(int(m.group(1)), den))
        raise RingError(f"malformed ring literal {text!r}")

    def __str__(self) -> str:
        a, b = self.a, self.b
        return f"{a.numerator}/{a.denominator}+{b.numerator}/{b.denominator}*r2"

    def __repr__(self) -> str:
        return f"RingReal({self})"

    # arithmetic ------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, RingReal):
            try:
                other = RingReal(other)
            except TypeError:
                return NotImplemented
        return RingReal(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return RingReal(-self.a, -self.b)

    def __sub__(self, other):
        if not isinstance(other, RingReal):
            try:
                other = RingReal(other)
            except TypeError:
                return NotImplemented
        return RingReal(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return RingReal.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RingReal):
            try:
                other = _frac(other)
            except TypeError:
                return NotImplemented
            return RingReal(self.a * other, self.b * other)
        if not other.b:
            return RingReal(self.a * other.a, self.b * other.a)
        if not self.b:
            return RingReal(self.a * other.a, self.a * other.b)
        return RingReal(self.a * other.a + 2 * self.b * other.b,
                        self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def conjugate2(self) -> "RingReal":
        """The Galois conjugate ``a - b*sqrt(2)``."""
        return RingReal(self.a, -self.b)

    def field_norm(self) -> Fraction:
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "RingReal":
        if not self.b:
            if not self.a:
                raise ZeroDivisionError("ring division by zero")
            return RingReal(1 / self.a)
        nrm = self.field_norm()
        return RingReal(self.a / nrm, -self.b / nrm)

    def __truediv__(self, other):
        if not isinstance(other, RingReal):
            try:
                other = _frac(other)
            except TypeError:
                return NotImplemented
            if not other:
                raise ZeroDivisionError("ring division by zero")
            return RingReal(self.a / other, self.b / other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RingReal.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # order -------------------------------------------------------------------

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 against 2 b^2
        d = a * a - 2 * b * b
        return sa if d > 0 else (sb if d < 0 else 0)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        if isinstance(other, RingReal):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Rational)):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash(self.a) if not self.b else hash((self.a, self.b))

    def _cmp(self, other) -> int:
        return (self - RingReal.coerce(other)).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT2

    def sqrt(self):
        """Nonnegative square root inside the field, or None when it leaves Q(sqrt 2)."""
        if self.sign() < 0:
            return None
        a, b = self.a, self.b
        if not b:
            r = _rational_sqrt(a)
            if r is not None:
                return RingReal(r)
            r = _rational_sqrt(a / 2)
            return RingReal(0, r) if r is not None else None
        # (x + y r2)^2 = x^2 + 2y^2 + 2xy r2
        disc = _rational_sqrt(a * a - 2 * b * b)
        if disc is None:
            return None
        for x2 in ((a + disc) / 2, (a - disc) / 2):
            x = _rational_sqrt(x2)
            if x:
                root = RingReal(x, b / (2 * x))
                return root if root.sign() >= 0 else -root
        return None


ZERO = RingReal(0)
ONE = RingReal(1)
SQRT2 = RingReal(0, 1)
INV_SQRT2 = RingReal(0, Fraction(1, 2))


class CRing:
    """Complex number with real and imaginary parts in Q(sqrt 2)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = RingReal.coerce(re)
        self.im = RingReal.coerce(im)

    @classmethod
    def coerce(cls, x) -> "CRing":
        return x if isinstance(x, CRing) else cls(x)

    def __repr__(self):
        return f"CRing({self.re}, {self.im})"

    def __add__(self, other):
        other = CRing.coerce(other)
        return CRing(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = CRing.coerce(other)
        return CRing(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return CRing(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, CRing):
            if not other.im and not self.im:
                return CRing(self.re * other.re, ZERO)
            return CRing(self.re * other.re - self.im * other.im,
                         self.re * other.im + self.im * other.re)
        other = RingReal.coerce(other)
        return CRing(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, CRing):
            d = other.abs2()
            return (self * other.conj()) / d
        other = RingReal.coerce(other)
        return CRing(self.re / other, self.im / other)

    def conj(self) -> "CRing":
        return CRing(self.re, -self.im)

    def abs2(self) -> RingReal:
        if not self.im:
            return self.re * self.re
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, CRing):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational, RingReal)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))


CZERO = CRing(0)
CONE = CRing(1)
