"""Truncated graded series over a commutative coefficient algebra.

The same series engine runs over three coefficient algebras: exact scalars,
exact quasi-cycles (with their formal wedge), and numeric grid form fields.
Multiplication is the Cauchy product, inversion is the alternating geometric
series in (s - 1), and the masked variant assembles the degeneracy-aware
inverse from a full series, a reference series and the masked part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

from .exactnum import QQi
from .currents import QuasiCycle, SmoothPart


class InvalidSeries(Exception):
    pass


@dataclass
class SeriesAlgebra:
    """The coefficient operations a GradedSeries needs."""

    zero: Callable[[], object]
    unit: Callable[[], object]
    add: Callable[[object, object], object]
    mul: Callable[[object, object], object]
    eq: Callable[[object, object], bool]
    neg: Callable[[object], object]
    is_smooth: Optional[Callable[[object], bool]] = None


def scalar_algebra() -> SeriesAlgebra:
    return SeriesAlgebra(
        zero=lambda: QQi(0),
        unit=lambda: QQi(1),
        add=lambda a, b: a + b,
        mul=lambda a, b: a * b,
        eq=lambda a, b: a == b,
        neg=lambda a: -a,
        is_smooth=lambda a: True,
    )


def cycle_algebra(n: int) -> SeriesAlgebra:
    def is_smooth(qc: QuasiCycle) -> bool:
        return all(isinstance(c, SmoothPart) for c in qc.normalize().components)

    return SeriesAlgebra(
        zero=lambda: QuasiCycle.zero(n),
        unit=lambda: QuasiCycle.unit(n),
        add=lambda a, b: a + b,
        mul=lambda a, b: a.wedge(b),
        eq=lambda a, b: a == b,
        neg=lambda a: -a,
        is_smooth=is_smooth,
    )


class GradedSeries:
    """Coefficients (a_0, ..., a_K) of a series truncated at degree K."""

    def __init__(self, algebra: SeriesAlgebra, coefficients: Sequence[object]):
        self.algebra = algebra
        self.coefficients = list(coefficients)
        if not self.coefficients:
            raise InvalidSeries("a series needs at least the degree-0 coefficient")

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    @property
    def degree0_is_identity(self) -> bool:
        return self.algebra.eq(self.coefficients[0], self.algebra.unit())

    def coefficient(self, k: int):
        if k < 0:
            raise IndexError("negative degree")
        if k > self.truncation:
            return self.algebra.zero()
        return self.coefficients[k]

    @staticmethod
    def one(algebra: SeriesAlgebra, truncation: int) -> "GradedSeries":
        coeffs = [algebra.unit()] + [algebra.zero() for _ in range(truncation)]
        return GradedSeries(algebra, coeffs)

    def _check_compatible(self, other: "GradedSeries"):
        if self.truncation != other.truncation:
            raise InvalidSeries(
                f"truncations differ: {self.truncation} vs {other.truncation}"
            )

    def add(self, other: "GradedSeries") -> "GradedSeries":
        self._check_compatible(other)
        alg = self.algebra
        return GradedSeries(
            alg, [alg.add(a, b) for a, b in zip(self.coefficients, other.coefficients)]
        )

    def sub(self, other: "GradedSeries") -> "GradedSeries":
        self._check_compatible(other)
        alg = self.algebra
        return GradedSeries(
            alg,
            [alg.add(a, alg.neg(b)) for a, b in zip(self.coefficients, other.coefficients)],
        )

    def mul(self, other: "GradedSeries") -> "GradedSeries":
        """Cauchy product truncated at the common truncation."""
        self._check_compatible(other)
        alg = self.algebra
        out = []
        for k in range(self.truncation + 1):
            acc = alg.zero()
            for i in range(k + 1):
                acc = alg.add(acc, alg.mul(self.coefficients[i], other.coefficients[k - i]))
            out.append(acc)
        return GradedSeries(alg, out)

    __mul__ = mul

    def invert(self) -> "GradedSeries":
        """sum_k (-1)^k (s - 1)^k, the inverse series through the truncation.

        Requires the degree-0 coefficient to be the unit.
        """
        alg = self.algebra
        if not self.degree0_is_identity:
            raise InvalidSeries("inversion requires the degree-0 coefficient to be the unit")
        excess = GradedSeries(
            alg,
            [alg.zero()] + list(self.coefficients[1:]),
        )
        acc = GradedSeries.one(alg, self.truncation)
        power = GradedSeries.one(alg, self.truncation)
        sign = 1
        for _ in range(1, self.truncation + 1):
            power = power.mul(excess)
            sign = -sign
            term = power if sign > 0 else GradedSeries(alg, [alg.neg(c) for c in power.coefficients])
            acc = acc.add(term)
        return acc

    def whitney_smooth_product(self, other: "GradedSeries") -> "GradedSeries":
        """Product of two series whose coefficients are smooth; used as the
        exact prediction for the direct-sum computation."""
        if self.algebra.is_smooth is not None:
            for series in (self, other):
                for k, c in enumerate(series.coefficients):
                    if k > 0 and not series.algebra.is_smooth(c):
                        raise InvalidSeries(
                            f"whitney_smooth_product expects smooth coefficients; degree {k} is not"
                        )
        return self.mul(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedSeries):
            return NotImplemented
        if self.truncation != other.truncation:
            return False
        return all(
            self.algebra.eq(a, b) for a, b in zip(self.coefficients, other.coefficients)
        )

    def __repr__(self):
        return f"GradedSeries(K={self.truncation})"


def chern_series(s: GradedSeries) -> GradedSeries:
    """The inverse series of s; degree-k coefficient is the degree-k piece of
    sum (-1)^j (s-1)^j."""
    return s.invert()


def chern_Z(
    s: GradedSeries,
    s0: GradedSeries,
    masked: GradedSeries,
    codim_positive: bool = True,
) -> GradedSeries:
    """Degeneracy-aware inverse.

    ``s`` is the full series, ``s0`` the reference (smooth) series, ``masked``
    the part of ``s`` carried by the degeneracy set.  When the degeneracy set
    has positive codimension the result is

        c' - c0 * masked * c'   with   c' = invert(s - masked),  c0 = invert(s0),

    evaluated against the unit; when the degeneracy set is everything the
    result is just invert(s0).
    """
    if not codim_positive:
        return s0.invert()
    s._check_compatible(masked)
    alg = s.algebra
    if not alg.eq(masked.coefficients[0], alg.zero()):
        raise InvalidSeries("the masked series must vanish in degree 0")
    s_prime = s.sub(masked)
    c_prime = s_prime.invert()
    c0 = s0.invert()
    correction = c0.mul(masked).mul(c_prime)
    return c_prime.sub(correction)
