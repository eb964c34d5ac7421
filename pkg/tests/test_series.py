from fractions import Fraction

import pytest

from segrelab.currents import DivisorPart, PointMass, QuasiCycle
from segrelab.exactnum import QQi
from segrelab.oracles import chernex_reference
from segrelab.polynomials import parse_polynomial
from segrelab.series import (
    GradedSeries,
    InvalidSeries,
    chern_Z,
    chern_series,
    cycle_algebra,
    scalar_algebra,
)

V = ("x1", "x2")


def S(*values) -> GradedSeries:
    return GradedSeries(scalar_algebra(), [QQi.coerce(v) for v in values])


def test_truncation_and_coefficient_access():
    s = S(1, 2, 3)
    assert s.truncation == 2
    assert s.coefficient(1) == QQi(2)
    assert s.coefficient(7) == QQi(0)
    with pytest.raises(IndexError):
        s.coefficient(-1)


def test_add_sub_mul_scalar():
    a = S(1, 2, 0)
    b = S(1, 0, 5)
    assert a.add(b) == S(2, 2, 5)
    assert a.sub(b) == S(0, 2, -5)
    # (1 + 2t)(1 + 5t^2) truncated at degree 2
    assert a.mul(b) == S(1, 2, 5)


def test_mul_rejects_mismatched_truncations():
    with pytest.raises(InvalidSeries):
        S(1, 2).mul(S(1, 2, 3))


def test_invert_against_hand_computation():
    # 1/(1 + t) = 1 - t + t^2 - t^3
    s = S(1, 1, 0, 0)
    assert s.invert() == S(1, -1, 1, -1)
    # 1/(1 + a t + b t^2): degree 2 coefficient is a^2 - b
    s2 = S(1, Fraction(1, 2), Fraction(1, 3))
    inv = s2.invert()
    assert inv.coefficient(1) == QQi(Fraction(-1, 2))
    assert inv.coefficient(2) == QQi(Fraction(1, 4) - Fraction(1, 3))


def test_invert_requires_unit_leading_coefficient():
    with pytest.raises(InvalidSeries):
        S(2, 1).invert()


def test_invert_round_trip():
    s = S(1, Fraction(3, 4), QQi(0, 1), Fraction(-2, 5))
    one = GradedSeries.one(scalar_algebra(), s.truncation)
    assert s.mul(s.invert()) == one
    assert s.invert().mul(s) == one
    assert s.invert().invert() == s


def test_chern_series_is_the_inverse():
    s = S(1, 2, 3)
    assert chern_series(s) == s.invert()


def test_chern_Z_with_zero_mask_is_plain_inverse():
    s = S(1, 2, 3)
    s0 = S(1, 7, 1)
    masked = S(0, 0, 0)
    assert chern_Z(s, s0, masked) == s.invert()


def test_chern_Z_masked_term():
    # masked part m in degree 1: c = (s - m)^-1 - c0 * m * (s - m)^-1
    s = S(1, 1, 0)
    s0 = S(1, 0, 0)
    masked = S(0, 1, 0)
    out = chern_Z(s, s0, masked)
    # s - m = 1, c' = 1, c0 = 1 -> c = 1 - m
    assert out == S(1, -1, 0)


def test_chern_Z_requires_masked_to_vanish_in_degree_0():
    with pytest.raises(InvalidSeries):
        chern_Z(S(1, 1), S(1, 0), S(1, 0))


def test_chern_Z_full_degeneracy_returns_reference_inverse():
    s = S(1, 5)
    s0 = S(1, 2)
    assert chern_Z(s, s0, S(0, 0), codim_positive=False) == s0.invert()


def test_cycle_algebra_reproduces_reference_table():
    ref = chernex_reference()
    alg = cycle_algebra(2)
    s = GradedSeries(alg, [QuasiCycle.unit(2), ref["s1"], ref["s2"]])
    c = s.invert()
    assert c.coefficient(1) == ref["s1"].scale(-1)
    assert c.coefficient(2) == ref["c2"]
    assert s.mul(s).coefficient(2).graded_component(2).mult_at(
        (QQi(0), QQi(0))
    ) == Fraction(4)


def test_whitney_smooth_product_guards_cycle_coefficients():
    alg = cycle_algebra(2)
    line = QuasiCycle(2, [DivisorPart(parse_polynomial("x1", V), Fraction(1))])
    singular = GradedSeries(alg, [QuasiCycle.unit(2), line])
    smooth = GradedSeries.one(alg, 1)
    with pytest.raises(InvalidSeries):
        singular.whitney_smooth_product(smooth)
    assert smooth.whitney_smooth_product(smooth) == smooth


def test_one_constructor():
    one = GradedSeries.one(scalar_algebra(), 3)
    assert one.truncation == 3
    assert one.degree0_is_identity
    assert one.mul(one) == one
