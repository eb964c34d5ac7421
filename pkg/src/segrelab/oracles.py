"""Exact oracles for divisors, multiplicities and intersection numbers.

Everything in this module is computed symbolically over Q(i): principal
divisor expansions, vanishing orders, local intersection multiplicities via
sheared resultants, and the closed-form multiplicity of monomial-generated
singularities.  The numerical engine is validated against these results.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import List, Sequence, Tuple

from .exactnum import QQi
from .polynomials import (
    Polynomial,
    UnsupportedExactCase,
    factor_gaussian,
    gcd_gaussian,
    linear_roots_univariate,
    resultant,
)


def poincare_lelong(poly: Polynomial) -> List[Tuple[Polynomial, int]]:
    """Divisor decomposition of dd^c log|P|^2.

    Returns ``[(P_i, m_i), ...]`` over the irreducible factors of P, i.e. the
    current of integration sum(m_i * [P_i = 0]).  Constants give an empty
    divisor; the zero polynomial is an error.
    """
    if poly.is_zero():
        raise ValueError("dd^c log|0|^2 is undefined")
    if len(poly.variables) > 2:
        raise UnsupportedExactCase("exact principal divisors are supported in n <= 2 only")
    _, factors = factor_gaussian(poly)
    return factors


def vanishing_order(poly: Polynomial, point: Sequence) -> int:
    """Order of vanishing of P at an exact point (0 when P(x) != 0)."""
    return poly.vanishing_order(point)


def _shear_x2(poly: Polynomial, s: int) -> Polynomial:
    """Substitute x2 -> x2 + s*x1 (coordinates named by position)."""
    v1, v2 = poly.variables
    x1 = Polynomial.variable(v1, poly.variables)
    x2 = Polynomial.variable(v2, poly.variables)
    return poly.compose({v1: x1, v2: x2 + x1.scale(s)})

def _restrict_to_axis(poly: Polynomial) -> Polynomial:
    """P(x1, 0) as a polynomial in the same two slots."""
    return poly.substitute(poly.variables[1], 0)


def _is_pure_power_of_x1(poly: Polynomial) -> bool:
    # exactly c*x1^k: a single term, free of the other variable; a gcd like
    # x1*(x1 - c) has an extra root and must be rejected
    i = 0
    return len(poly.terms) == 1 and all(sum(e) == e[i] for e in poly.terms)


def intersection_number(p: Polynomial, q: Polynomial, point: Sequence) -> int:
    """Local intersection multiplicity of two coprime plane curves at an
    exact point.

    Method: translate the point to the origin, shear x2 -> x2 + s*x1 with s
    chosen so (a) both polynomials are regular in x1 (the coefficient of
    x1^deg is a nonzero constant, so no intersections at infinity pollute the
    resultant) and (b) the origin is the only common zero left on the line
    x2 = 0.  Then the multiplicity is the vanishing order at 0 of
    Res_x1(P, Q), which splits the resultant's roots by fiber.
    """
    if len(p.variables) != 2 or p.variables != q.variables:
        raise UnsupportedExactCase("intersection numbers are supported for plane curves only")
    if p.is_zero() or q.is_zero():
        raise ValueError("intersection with the zero polynomial")
    g = gcd_gaussian(p, q)
    if not g.is_constant():
        raise UnsupportedExactCase(f"curves share the component {g}; intersection is not proper")
    pt = [QQi.coerce(a) for a in point]
    p0 = p.shift(pt)
    q0 = q.shift(pt)
    if not p0.eval_exact([0, 0]).is_zero() or not q0.eval_exact([0, 0]).is_zero():
        return 0
    lead_p = p0.leading_form()
    lead_q = q0.leading_form()
    v1 = p.variables[0]
    for s in _shear_candidates():
        # regularity in x1 after the shear: leading form at (1, s) nonzero
        if lead_p.eval_exact([1, s]).is_zero() or lead_q.eval_exact([1, s]).is_zero():
            continue
        ps = _shear_x2(p0, s)
        qs = _shear_x2(q0, s)
        axis_gcd = gcd_gaussian(_restrict_to_axis(ps), _restrict_to_axis(qs))
        if not _is_pure_power_of_x1(axis_gcd):
            continue
        res = resultant(ps, qs, v1)
        if res.is_zero():
            raise UnsupportedExactCase("resultant vanished for coprime curves")
        return min(sum(e) for e in res.terms)
    raise UnsupportedExactCase("no admissible shear found")


def _shear_candidates():
    yield 0
    for k in range(1, 40):
        yield k
        yield -k


def common_zeros_exact(
    p: Polynomial, q: Polynomial
) -> Tuple[List[Tuple[QQi, QQi]], bool]:
    """All Gaussian-rational common zeros of two coprime plane curves.

    Returns ``(points, complete)``; ``complete`` is False when some common
    zeros have irrational coordinates (they are then not listed).
    """
    if len(p.variables) != 2 or p.variables != q.variables:
        raise UnsupportedExactCase("common zeros are supported for plane curves only")
    g = gcd_gaussian(p, q)
    if not g.is_constant():
        raise UnsupportedExactCase("curves share a component")
    v1, v2 = p.variables
    res2 = resultant(p, q, v1)  # polynomial in x2
    complete = True
    points: List[Tuple[QQi, QQi]] = []
    if res2.is_zero():
        raise UnsupportedExactCase("degenerate elimination for coprime curves")
    if res2.is_constant():
        candidates_x2: List[QQi] = []
    else:
        roots2, comp2 = linear_roots_univariate(res2)
        complete = complete and comp2
        candidates_x2 = [r for r, _ in roots2]
    for b in candidates_x2:
        pb = p.substitute(v2, b)
        qb = q.substitute(v2, b)
        fiber = gcd_gaussian(pb, qb)
        if fiber.is_constant():
            continue
        roots1, comp1 = linear_roots_univariate(fiber)
        complete = complete and comp1
        for a, _ in roots1:
            points.append((a, b))
    points.sort(key=lambda ab: (str(ab[0]), str(ab[1])))
    return points, complete


def monomial_lelong(exponents: Sequence[Sequence[int]], c: Fraction = Fraction(1)) -> Fraction:
    """Multiplicity at 0 of c * log sum_k |x^(a_k)|^2: c times the smallest
    total degree among the generating monomials."""
    exps = [tuple(int(e) for e in a) for a in exponents]
    if not exps:
        raise ValueError("need at least one monomial generator")
    if any(e < 0 for a in exps for e in a):
        raise ValueError("monomial exponents must be non-negative")
    c = Fraction(c)
    if c <= 0:
        raise ValueError("the exponent coefficient must be positive")
    return c * min(sum(a) for a in exps)


# -- polynomial matrices -------------------------------------------------------


def poly_matrix_det(rows: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Determinant of a square matrix of polynomials (Laplace expansion;
    sizes stay tiny here)."""
    size = len(rows)
    if any(len(r) != size for r in rows):
        raise ValueError("matrix is not square")
    if size == 0:
        raise ValueError("empty matrix")
    if size == 1:
        return rows[0][0]
    variables = rows[0][0].variables
    out = Polynomial.zero(variables)
    for j in range(size):
        minor = [[rows[i][k] for k in range(size) if k != j] for i in range(1, size)]
        term = rows[0][j] * poly_matrix_det(minor)
        out = out + (term if j % 2 == 0 else -term)
    return out


def matrix_minors(rows: Sequence[Sequence[Polynomial]], size: int) -> List[Polynomial]:
    """All size x size minors of a rectangular polynomial matrix."""
    m = len(rows)
    r = len(rows[0]) if rows else 0
    out = []
    for row_idx in itertools.combinations(range(m), size):
        for col_idx in itertools.combinations(range(r), size):
            sub = [[rows[i][j] for j in col_idx] for i in row_idx]
            out.append(poly_matrix_det(sub))
    return out


def generic_rank(rows: Sequence[Sequence[Polynomial]]) -> int:
    """Largest k with a not-identically-zero k x k minor."""
    m = len(rows)
    r = len(rows[0]) if rows else 0
    for k in range(min(m, r), 0, -1):
        if any(not d.is_zero() for d in matrix_minors(rows, k)):
            return k
    return 0


def pullback_s1_prediction(
    g_rows: Sequence[Sequence[Polynomial]], curve: Sequence[Polynomial]
) -> int:
    """Predicted multiplicity at t = 0 of the degree-1 current of a
    morphism-induced metric pulled back along a polynomial curve.

    The regularized determinant of the pulled-back metric behaves like
    eps^(r - rho) * sum of squared rho x rho minors, rho the generic rank of
    the pulled-back morphism, so the limit multiplicity is the smallest
    vanishing order among those minors.
    """
    tvars = curve[0].variables
    mapping = {}
    for var, component in zip(g_rows[0][0].variables, curve):
        mapping[var] = component.rename_variables(tvars) if component.variables != tvars else component
    pulled = [[entry.compose(mapping) for entry in row] for row in g_rows]
    rho = generic_rank(pulled)
    if rho == 0:
        return 0
    orders = [
        d.vanishing_order([0] * len(tvars))
        for d in matrix_minors(pulled, rho)
        if not d.is_zero()
    ]
    return min(orders)


def chernex_reference() -> dict:
    """Frozen exact reference values for the worked 2x2 diagonal example
    g = diag(x1, x2) with trivial reference metric on the bidisc.

    Keys: "s1", "s2", "s1_wedge_s1", "c2", "c2_Z" (quasi-cycles), plus
    "pullback_lelong" for the curve t -> (t, 0).
    """
    from .currents import DivisorPart, PointMass, QuasiCycle

    x1 = Polynomial.variable("x1", ("x1", "x2"))
    x2 = Polynomial.variable("x2", ("x1", "x2"))
    origin = (QQi(0), QQi(0))
    s1 = QuasiCycle(2, [DivisorPart(x1, Fraction(1)), DivisorPart(x2, Fraction(1))])
    s2 = QuasiCycle(2, [PointMass(origin, Fraction(1))])
    s1s1 = QuasiCycle(2, [PointMass(origin, Fraction(2))])
    c2 = QuasiCycle(2, [PointMass(origin, Fraction(1))])
    c2z = QuasiCycle(2, [PointMass(origin, Fraction(-1))])
    return {
        "s1": s1,
        "s2": s2,
        "s1_wedge_s1": s1s1,
        "c2": c2,
        "c2_Z": c2z,
        "pullback_lelong": 1,
    }
