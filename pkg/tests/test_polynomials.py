from fractions import Fraction

import numpy as np
import pytest

from segrelab.exactnum import QQi
from segrelab.polynomials import (
    Polynomial,
    UnsupportedExactCase,
    exact_divide,
    factor_gaussian,
    gcd_gaussian,
    linear_roots_univariate,
    parse_polynomial,
    resultant,
)

V = ("x1", "x2")


def P(text: str) -> Polynomial:
    return parse_polynomial(text, V)


def test_parse_and_str_round_trip():
    p = P("x1**2 - 3*x1*x2/2 + 1")
    assert parse_polynomial(str(p), V) == p


def test_parse_rejects_unknown_symbols():
    with pytest.raises(ValueError):
        parse_polynomial("sin(x1)", V)


def test_parse_gaussian_coefficients():
    p = parse_polynomial("I*x1 + 1/2", V)
    assert p.eval_exact((QQi(0), QQi(0))) == QQi(Fraction(1, 2))
    assert p.eval_exact((QQi(0, 1), QQi(0))) == QQi(Fraction(-1, 2))


def test_arithmetic_matches_hand_expansion():
    assert P("x1 + x2") * P("x1 - x2") == P("x1**2 - x2**2")
    assert P("x1 + 1") ** 3 == P("x1**3 + 3*x1**2 + 3*x1 + 1")
    assert P("x1") - P("x1") == Polynomial.zero(V)


def test_degrees_and_leading_form():
    p = P("x1**2*x2 + x1 + 5")
    assert p.total_degree() == 3
    assert p.degree_in("x1") == 2
    assert p.degree_in("x2") == 1
    assert p.leading_form() == P("x1**2*x2")


def test_partial_derivative():
    p = P("x1**3*x2 - 2*x2**2")
    assert p.partial("x1") == P("3*x1**2*x2")
    assert p.partial("x2") == P("x1**3 - 4*x2")


def test_compose_and_shift():
    p = P("x1**2 + x2")
    composed = p.compose({"x1": P("x1 + x2"), "x2": P("x2")})
    assert composed == P("x1**2 + 2*x1*x2 + x2**2 + x2")
    # shift moves the origin: q(x) = p(x + a)
    q = p.shift((QQi(1), QQi(0)))
    assert q == P("x1**2 + 2*x1 + 1 + x2")


def test_substitute_and_drop_variable():
    p = P("x1*x2 + x2**2")
    q = p.substitute("x2", QQi(2))
    assert q == parse_polynomial("2*x1 + 4", V)
    r = q.drop_variable("x2")
    assert r.variables == ("x1",)
    assert r == parse_polynomial("2*x1 + 4", ("x1",))


def test_vanishing_order():
    assert P("x1**2*x2").vanishing_order((QQi(0), QQi(0))) == 3
    assert P("x1 - 1").vanishing_order((QQi(1), QQi(0))) == 1
    assert P("1 + x1").vanishing_order((QQi(0), QQi(0))) == 0
    assert P("x1**2 - 2*x1 + 1").vanishing_order((QQi(1), QQi(5))) == 2


def test_eval_numpy_matches_eval_exact():
    p = P("x1**3 - x1*x2 + 2")
    pts = [(0.3 + 0.1j, -0.5j), (1.0, 2.0), (-0.25 + 0.75j, 0.5 - 0.5j)]
    arrs = [np.array([a for a, _ in pts]), np.array([b for _, b in pts])]
    vals = p.eval_numpy(arrs)
    for i, (a, b) in enumerate(pts):
        direct = a ** 3 - a * b + 2
        assert abs(vals[i] - direct) < 1e-12


def test_factor_gaussian_splits_over_qi():
    unit, factors = factor_gaussian(P("x1**2 + x2**2"))
    polys = sorted(str(f) for f, m in factors)
    assert len(factors) == 2
    assert all(m == 1 for _, m in factors)
    rebuilt = Polynomial.constant(V, unit)
    for f, m in factors:
        rebuilt = rebuilt * f ** m
    assert rebuilt == P("x1**2 + x2**2")
    assert polys[0] != polys[1]


def test_factor_gaussian_multiplicity():
    _, factors = factor_gaussian(P("x1**2*x2"))
    mults = {str(f): m for f, m in factors}
    assert mults[str(P("x1"))] == 2
    assert mults[str(P("x2"))] == 1


def test_gcd_and_exact_divide():
    p = P("x1**2 - x2**2")
    q = P("x1**2 + 2*x1*x2 + x2**2")
    g = gcd_gaussian(p, q)
    assert g.monic() == P("x1 + x2")
    quot = exact_divide(p, g.monic())
    assert quot == P("x1 - x2")
    assert exact_divide(P("x1"), P("x2")) is None


def test_resultant_eliminates_variable():
    # Res_x1(x2 - x1^2, x1 - x2) = x2 - x2^2 up to sign
    r = resultant(P("x2 - x1**2"), P("x1 - x2"), "x1")
    assert r.variables == ("x2",)
    roots, complete = linear_roots_univariate(r)
    assert complete
    vals = {c for c, _ in roots}
    assert QQi(0) in vals and QQi(1) in vals


def test_linear_roots_reports_incomplete_factorisation():
    one_var = parse_polynomial("x1**2 - 2", ("x1",))
    roots, complete = linear_roots_univariate(one_var)
    assert roots == []
    assert not complete


def test_monomial_and_variable_builders():
    m = Polynomial.monomial(V, (2, 1), QQi(3))
    assert m == P("3*x1**2*x2")
    assert Polynomial.variable("x2", V) == P("x2")
    c = Polynomial.constant(V, QQi(0, 1))
    assert c * c == Polynomial.constant(V, QQi(-1))
