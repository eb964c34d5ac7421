from fractions import Fraction

import pytest

from segrelab.exactnum import QQi
from segrelab.oracles import (
    chernex_reference,
    common_zeros_exact,
    generic_rank,
    intersection_number,
    matrix_minors,
    monomial_lelong,
    poincare_lelong,
    poly_matrix_det,
    pullback_s1_prediction,
    vanishing_order,
)
from segrelab.polynomials import Polynomial, UnsupportedExactCase, parse_polynomial

V = ("x1", "x2")


def P(text: str) -> Polynomial:
    return parse_polynomial(text, V)


def test_poincare_lelong_lists_divisor_components():
    parts = {str(f): m for f, m in poincare_lelong(P("x1**2*x2"))}
    assert parts == {str(P("x1")): 2, str(P("x2")): 1}


def test_poincare_lelong_rejects_zero():
    with pytest.raises(ValueError):
        poincare_lelong(Polynomial.zero(V))


def test_vanishing_order():
    assert vanishing_order(P("x1*x2 + x2**3"), (QQi(0), QQi(0))) == 2
    assert vanishing_order(P("1 + x1"), (QQi(0), QQi(0))) == 0


def test_intersection_transverse_lines():
    assert intersection_number(P("x1"), P("x2"), (QQi(0), QQi(0))) == 1


def test_intersection_tangency():
    # parabola against its tangent line at the origin
    assert intersection_number(P("x2"), P("x2 - x1**2"), (QQi(0), QQi(0))) == 2


def test_intersection_higher_contact():
    assert intersection_number(P("x2"), P("x2 - x1**3"), (QQi(0), QQi(0))) == 3
    assert intersection_number(P("x1**2"), P("x2**2"), (QQi(0), QQi(0))) == 4


def test_intersection_away_from_origin():
    p = P("x1 - 1")
    q = P("x2 - x1**2")
    assert intersection_number(p, q, (QQi(1), QQi(1))) == 1


def test_intersection_is_zero_away_from_common_zeros():
    assert intersection_number(P("x1 + 1"), P("x2"), (QQi(0), QQi(0))) == 0


def test_bezout_regression_pair():
    # Both cubics pass through nine rational points, all simple crossings.
    # An earlier multiplicity routine accepted x1**2 - x1/4 as a "pure power"
    # when restricting to the probe axis and reported 2 at one of them.
    p = P("-12*x1**3 + 6*x1**2*x2 + 12*x1 - 6*x2")
    q = P(
        "-18*x1**3 + 21*x1**2*x2 + 3*x1*x2**2 - 6*x2**3"
        " - 39*x1**2 + 47*x1*x2 - 14*x2**2 - 18*x1 + 12*x2"
    )
    points, complete = common_zeros_exact(p, q)
    assert complete
    assert len(points) == 9
    mults = [intersection_number(p, q, pt) for pt in points]
    assert mults == [1] * 9
    assert sum(mults) == p.total_degree() * q.total_degree()
    assert intersection_number(p, q, (QQi(-1), QQi(Fraction(-3, 2)))) == 1


def test_common_zeros_flags_irrational_points():
    pts, complete = common_zeros_exact(P("x2"), P("x1**2 - 2"))
    assert pts == []
    assert not complete


def test_common_zeros_rejects_shared_component():
    with pytest.raises(UnsupportedExactCase):
        common_zeros_exact(P("x1*x2"), P("x1*x2 - x1"))


def test_monomial_lelong():
    assert monomial_lelong([(1, 0), (0, 1)]) == 1
    assert monomial_lelong([(2, 0), (0, 3)]) == 2
    assert monomial_lelong([(1, 1)], Fraction(1, 2)) == 1
    with pytest.raises(ValueError):
        monomial_lelong([])
    with pytest.raises(ValueError):
        monomial_lelong([(1, 0)], Fraction(-1))


def test_poly_matrix_det_and_minors():
    rows = [[P("x1"), P("0")], [P("0"), P("x2")]]
    assert poly_matrix_det(rows) == P("x1*x2")
    minors = matrix_minors(rows, 1)
    assert sorted(str(m) for m in minors) == sorted(
        [str(P("x1")), str(P("0")), str(P("0")), str(P("x2"))]
    )
    assert generic_rank(rows) == 2
    assert generic_rank([[P("x1"), P("x1")], [P("x1"), P("x1")]]) == 1


def test_pullback_prediction_on_diagonal_example():
    rows = [[P("x1"), P("0")], [P("0"), P("x2")]]
    t = ("t",)
    axis = [parse_polynomial("t", t), parse_polynomial("0", t)]
    diag = [parse_polynomial("t", t), parse_polynomial("t", t)]
    assert pullback_s1_prediction(rows, axis) == 1
    assert pullback_s1_prediction(rows, diag) == 2


def test_reference_table_is_internally_consistent():
    ref = chernex_reference()
    s1, s2 = ref["s1"], ref["s2"]
    assert s1.wedge(s1) == ref["s1_wedge_s1"]
    # c2 = s1^2 - s2 for the inverse series truncation used here
    assert ref["s1_wedge_s1"] - s2 == ref["c2"]
    assert ref["c2_Z"] == ref["c2"].scale(-1)
    origin = (QQi(0), QQi(0))
    assert s2.mult_at(origin) == 1
    assert ref["pullback_lelong"] == 1
