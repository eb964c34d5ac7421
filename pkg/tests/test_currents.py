from fractions import Fraction

import pytest

from segrelab.currents import (
    DivisorPart,
    PointMass,
    QasDescriptor,
    QuasiCycle,
    SmoothPart,
    ddc_qas_wedge,
    siu_decompose,
)
from segrelab.exactnum import QQi
from segrelab.polynomials import UnsupportedExactCase, parse_polynomial

V = ("x1", "x2")
ORIGIN = (QQi(0), QQi(0))


def P(text):
    return parse_polynomial(text, V)


def hyperplanes():
    return QuasiCycle(2, [DivisorPart(P("x1"), Fraction(1)), DivisorPart(P("x2"), Fraction(1))])


def test_unit_and_zero():
    one = QuasiCycle.unit(2)
    zero = QuasiCycle.zero(2)
    assert not one.is_zero()
    assert zero.is_zero()
    assert (one + zero).normalize() == one


def test_graded_components_and_bidegrees():
    s = QuasiCycle.unit(2) + hyperplanes() + QuasiCycle(2, [PointMass(ORIGIN, Fraction(1))])
    assert s.bidegrees() == [0, 1, 2]
    assert s.graded_component(1) == hyperplanes()
    with pytest.raises(ValueError):
        s.pure_bidegree()


def test_add_collects_multiplicities():
    a = hyperplanes()
    total = (a + a).normalize()
    mults = {str(c.poly): c.multiplicity for c in total.components}
    assert mults == {str(P("x1")): Fraction(2), str(P("x2")): Fraction(2)}


def test_scale_and_subtract():
    a = hyperplanes()
    assert (a.scale(2) - a - a).normalize().is_zero()


def test_wedge_of_transverse_divisors():
    a = hyperplanes()
    prod = a.wedge(a)
    # [x1]^2 = [x2]^2 = 0, cross terms give the origin twice
    assert prod == QuasiCycle(2, [PointMass(ORIGIN, Fraction(2))])


def test_wedge_squares_with_unit():
    s = QuasiCycle.unit(2) + hyperplanes()
    sq = s.wedge(s).normalize()
    assert sq.graded_component(1) == hyperplanes().scale(2)
    assert sq.graded_component(2) == QuasiCycle(2, [PointMass(ORIGIN, Fraction(2))])


def test_wedge_point_against_divisor_vanishes():
    pt = QuasiCycle(2, [PointMass(ORIGIN, Fraction(1))])
    assert pt.wedge(hyperplanes()).is_zero()


def test_mult_at_counts_local_contributions():
    s2 = hyperplanes().wedge(hyperplanes())
    assert s2.mult_at(ORIGIN) == 2
    assert s2.mult_at((QQi(1), QQi(0))) == 0
    assert hyperplanes().mult_at(ORIGIN) == 2
    assert hyperplanes().mult_at((QQi(0), QQi(5))) == 1


def test_assert_integral():
    good = QuasiCycle(2, [DivisorPart(P("x1"), Fraction(3))])
    good.assert_integral()
    bad = QuasiCycle(2, [DivisorPart(P("x1"), Fraction(1, 2))])
    with pytest.raises(ValueError):
        bad.assert_integral()


def test_restrict_keeps_components_inside_variety():
    mu = hyperplanes()
    restricted = mu.restrict([P("x1")])
    assert restricted == QuasiCycle(2, [DivisorPart(P("x1"), Fraction(1))])


def test_json_round_trip():
    s = (
        QuasiCycle.unit(2)
        + hyperplanes()
        + QuasiCycle(2, [PointMass((QQi(1, 1), QQi(Fraction(-1, 2))), Fraction(3, 2))])
    )
    data = s.to_json()
    back = QuasiCycle.from_json(data)
    assert back == s


def test_component_validation():
    with pytest.raises(ValueError):
        QuasiCycle(1, [PointMass(ORIGIN, Fraction(1))])
    with pytest.raises(ValueError):
        QuasiCycle(1, [DivisorPart(P("x1"), Fraction(1))])


def test_qas_descriptor_validation():
    with pytest.raises(ValueError):
        QasDescriptor(Fraction(-1), (P("x1"),))
    with pytest.raises(ValueError):
        QasDescriptor(Fraction(1), ())
    assert QasDescriptor(Fraction(2), (P("x1"),)).is_integral()
    assert not QasDescriptor(Fraction(1, 2), (P("x1"),)).is_integral()


def test_ddc_qas_wedge_unit_gives_weighted_divisor():
    u = QasDescriptor(Fraction(1), (P("x1**2"),))
    out = ddc_qas_wedge(u, QuasiCycle.unit(2))
    assert out == QuasiCycle(2, [DivisorPart(P("x1"), Fraction(2))])


def test_ddc_qas_wedge_fractional_exponent():
    u = QasDescriptor(Fraction(1, 2), (P("x1"),))
    out = ddc_qas_wedge(u, QuasiCycle.unit(2))
    assert out == QuasiCycle(2, [DivisorPart(P("x1"), Fraction(1, 2))])


def test_ddc_qas_wedge_divisor_gives_intersection_points():
    # the line x1 = 0 crosses the parabola transversally at the origin
    u = QasDescriptor(Fraction(1), (P("x1"),))
    mu = QuasiCycle(2, [DivisorPart(P("x2 - x1**2"), Fraction(1))])
    out = ddc_qas_wedge(u, mu)
    assert out == QuasiCycle(2, [PointMass(ORIGIN, Fraction(1))])
    # tangential contact doubles the weight
    u2 = QasDescriptor(Fraction(1), (P("x2"),))
    out2 = ddc_qas_wedge(u2, mu)
    assert out2 == QuasiCycle(2, [PointMass(ORIGIN, Fraction(2))])


def test_ddc_qas_wedge_rejects_non_proper():
    u = QasDescriptor(Fraction(1), (P("x1"),))
    mu = QuasiCycle(2, [DivisorPart(P("x1"), Fraction(1))])
    with pytest.raises(UnsupportedExactCase):
        ddc_qas_wedge(u, mu)


def test_ddc_qas_wedge_rejects_multiple_generators():
    u = QasDescriptor(Fraction(1), (P("x1"), P("x2")))
    with pytest.raises(UnsupportedExactCase):
        ddc_qas_wedge(u, QuasiCycle.unit(2))


def test_siu_decompose_splits_cycles_from_rest():
    mu = hyperplanes() + QuasiCycle(
        2, [DivisorPart(P("x1"), Fraction(1), wedge_factor=None)]
    )
    rep = siu_decompose(mu.normalize(), 1)
    assert rep.moving.is_zero()
    assert rep.residual_mass_table["[x1=0]"] == "2"
    assert rep.reassembled() == mu.normalize()
    pts = QuasiCycle(2, [PointMass(ORIGIN, Fraction(3))])
    rep2 = siu_decompose(pts, 2)
    assert rep2.fixed == pts
    with pytest.raises(ValueError):
        siu_decompose(hyperplanes() + pts, 1)
