"""Exact Gaussian rationals used as coefficients throughout the algebra."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["Scalar", "as_scalar", "parse_rational", "format_rational"]


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, an int, or a Fraction into a Fraction (floats rejected)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise TypeError("bool is not a rational")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise TypeError(f"cannot read {text!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class Scalar:
    """Complex number ``re + i*im`` with exact rational parts.

    Instances are immutable and hashable; they compare equal to ints and
    Fractions with zero imaginary part.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if type(re) is Fraction else Fraction(re))
        object.__setattr__(self, "im", im if type(im) is Fraction else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    # construction helpers
    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "Scalar":
        s = object.__new__(cls)
        object.__setattr__(s, "re", re)
        object.__setattr__(s, "im", im)
        return s

    @classmethod
    def from_pair(cls, pair) -> "Scalar":
        re, im = pair
        return cls(parse_rational(re), parse_rational(im))

    def to_pair(self) -> list[str]:
        return [format_rational(self.re), format_rational(self.im)]

    # arithmetic
    def __add__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            return NotImplemented
        return Scalar._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            return NotImplemented
        if not self.im and not o.im:
            return Scalar._raw(self.re * o.re, _ZERO)
        return Scalar._raw(self.re * o.re - self.im * o.im,
                           self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if not den:
            raise ZeroDivisionError("Scalar division by zero")
        num = self * o.conjugate()
        return Scalar._raw(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return Scalar(1) / (self ** (-k))
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return Scalar._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "Scalar":
        return Scalar._raw(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im:
            raise TypeError("Scalar has a nonzero imaginary part")
        return float(self.re)

    @property
    def is_real(self) -> bool:
        return not self.im

    def __eq__(self, other):
        o = as_scalar(other)
        if o is NotImplemented:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if not self.im:
            return f"Scalar({self.re})"
        return f"Scalar({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


_ZERO = Fraction(0)
ZERO = Scalar._raw(_ZERO, _ZERO)
ONE = Scalar._raw(Fraction(1), _ZERO)
I = Scalar._raw(_ZERO, Fraction(1))


def as_scalar(x):
    if type(x) is Scalar:
        return x
    if isinstance(x, bool):
        return NotImplemented
    if isinstance(x, (int, Rational)):
        return Scalar._raw(Fraction(x), _ZERO)
    return NotImplemented
