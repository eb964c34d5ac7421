"""Exact Gaussian-rational arithmetic.

Coefficients in the exact layer are elements of Q(i): complex numbers whose
real and imaginary parts are rational.  They are stored as a pair of
``fractions.Fraction`` values, so every ring operation is exact and hashable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

RatLike = Union[int, Fraction, str]


def _as_fraction(value: RatLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot build an exact rational from {value!r}")


class QQi:
    """A Gaussian rational a + b*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RatLike = 0, im: RatLike = 0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("QQi is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def coerce(value) -> "QQi":
        if isinstance(value, QQi):
            return value
        if isinstance(value, (int, Fraction)):
            return QQi(value)
        if isinstance(value, str):
            return QQi(value)
        raise TypeError(f"cannot coerce {value!r} to QQi")

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self.re == 1 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    # -- ring operations -----------------------------------------------

    def __add__(self, other) -> "QQi":
        other = QQi.coerce(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "QQi":
        return QQi(-self.re, -self.im)

    def __sub__(self, other) -> "QQi":
        return self + (-QQi.coerce(other))

    def __rsub__(self, other) -> "QQi":
        return QQi.coerce(other) + (-self)

    def __mul__(self, other) -> "QQi":
        other = QQi.coerce(other)
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "QQi":
        other = QQi.coerce(other)
        n = other.abs2()
        if n == 0:
            raise ZeroDivisionError("division by zero in QQi")
        c = self * other.conjugate()
        return QQi(c.re / n, c.im / n)

    def __rtruediv__(self, other) -> "QQi":
        return QQi.coerce(other) / self

    def __pow__(self, k: int) -> "QQi":
        if not isinstance(k, int) or k < 0:
            raise ValueError("QQi powers must be non-negative integers")
        out = QQi(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def abs2(self) -> Fraction:
        """|a + bi|^2 = a^2 + b^2, exact."""
        return self.re * self.re + self.im * self.im

    # -- comparisons / hashing ------------------------------------------

    def __eq__(self, other) -> bool:
        try:
            other = QQi.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    # -- conversions -----------------------------------------------------

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __str__(self) -> str:
        if self.im == 0:
            return rat_str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{rat_str(self.im)}*i"
        imag = "i" if self.im == 1 else ("-i" if self.im == -1 else f"{rat_str(abs(self.im))}*i")
        sign = "+" if self.im > 0 or imag.startswith("-") else "-"
        if imag.startswith("-"):
            sign = "-"
            imag = imag[1:]
        return f"{rat_str(self.re)}{sign}{imag}"

    def __repr__(self) -> str:
        return f"QQi({self})"


def rat_str(q: Fraction) -> str:
    """Serialize a rational as "p" or "p/q" (the wire format for weights)."""
    q = _as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rat_parse(text: Union[str, int, Fraction]) -> Fraction:
    """Parse the "p/q" wire format back into a Fraction."""
    return _as_fraction(text)


ZERO = QQi(0)
ONE = QQi(1)
I = QQi(0, 1)
