"""Exact arithmetic in Q(i).

Values mix freely with ``int`` and ``Fraction``; combining with ``float`` or
``complex`` falls back to ``complex`` so that exact and floating paths can
share code.
"""
from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Union

Exact = Union[int, Fraction, "GaussianRational"]


class GaussianRational:
    """Element ``re + i*im`` of Q(i) with both parts stored as fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re: int | Fraction | str = 0, im: int | Fraction | str = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # construction helpers ------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    @staticmethod
    def is_exact(x) -> bool:
        return isinstance(x, (GaussianRational, int, Fraction)) and not isinstance(x, bool)

    @property
    def re_num(self) -> int:
        return self.re.numerator

    @property
    def re_den(self) -> int:
        return self.re.denominator

    @property
    def im_num(self) -> int:
        return self.im.numerator

    @property
    def im_den(self) -> int:
        return self.im.denominator

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    # arithmetic -----------------------------------------------------------
    def _other(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) + other if isinstance(other, numbers.Number) else NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) - other if isinstance(other, numbers.Number) else NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return other - complex(self) if isinstance(other, numbers.Number) else NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) * other if isinstance(other, numbers.Number) else NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) / other if isinstance(other, numbers.Number) else NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * o.conjugate()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return other / complex(self) if isinstance(other, numbers.Number) else NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            return complex(self) ** n
        if n < 0:
            return GaussianRational(1) / (self ** (-n))
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparisons / conversions ----------------------------------------------
    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            if isinstance(other, numbers.Number):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_exact(self)


def format_exact(x: GaussianRational) -> str:
    """Compact text such as ``3/2``, ``-i``, ``1+2*i`` or ``(1/2)*i``."""
    re, im = x.re, x.im

    def frac(v: Fraction) -> str:
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def imag(v: Fraction) -> str:
        if v == 1:
            return "i"
        if v == -1:
            return "-i"
        if v.denominator == 1:
            return f"{v.numerator}*i"
        return f"{frac(v)}*i"

    if im == 0:
        return frac(re)
    if re == 0:
        return imag(im)
    sign = "+" if im > 0 else "-"
    return f"{frac(re)}{sign}{imag(abs(im))}"


def to_complex(x) -> complex:
    return complex(x)


I = GaussianRational(0, 1)
