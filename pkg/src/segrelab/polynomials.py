"""Exact multivariate polynomials over the Gaussian rationals.

A :class:`Polynomial` is an ordered variable list plus a map from exponent
multi-indices to :class:`~segrelab.exactnum.QQi` coefficients.  All ring
operations, evaluation at exact points, derivative, composition and Taylor
recentering are exact.  Irreducible factorization over Q(i), gcds and
resultants are delegated to sympy behind this module's surface; everything
else is self-contained.

Polynomial strings use variables ``x1..xn`` (or ``t`` for curve parameters),
``^`` or ``**`` for powers, rational literals like ``3/4`` and the imaginary
unit ``i``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy

from .exactnum import QQi

Exponents = Tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class UnsupportedExactCase(Exception):
    """Raised when an exact-layer operation falls outside the supported class."""


def _term_sort_key(item):
    exps, _ = item
    return (-sum(exps), tuple(-e for e in exps))


class Polynomial:
    """Exact polynomial in an ordered tuple of variables."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Dict[Exponents, QQi]):
        variables = tuple(variables)
        clean: Dict[Exponents, QQi] = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(variables):
                raise ValueError("exponent arity does not match variable list")
            if any(e < 0 for e in exps):
                raise ValueError("exponents must be non-negative")
            coeff = QQi.coerce(coeff)
            if not coeff.is_zero():
                clean[exps] = clean.get(exps, QQi(0)) + coeff
        clean = {e: c for e, c in clean.items() if not c.is_zero()}
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(variables: Sequence[str]) -> "Polynomial":
        return Polynomial(variables, {})

    @staticmethod
    def constant(variables: Sequence[str], value) -> "Polynomial":
        v = tuple(variables)
        return Polynomial(v, {tuple([0] * len(v)): QQi.coerce(value)})

    @staticmethod
    def variable(name: str, variables: Sequence[str]) -> "Polynomial":
        v = tuple(variables)
        exps = [0] * len(v)
        exps[v.index(name)] = 1
        return Polynomial(v, {tuple(exps): QQi(1)})

    @staticmethod
    def monomial(variables: Sequence[str], exps: Sequence[int], coeff=1) -> "Polynomial":
        return Polynomial(tuple(variables), {tuple(exps): QQi.coerce(coeff)})

    # -- basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> QQi:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        if not self.terms:
            return QQi(0)
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, var: str) -> int:
        if not self.terms:
            return -1
        i = self.variables.index(var)
        return max(e[i] for e in self.terms)

    def sorted_terms(self) -> List[Tuple[Exponents, QQi]]:
        return sorted(self.terms.items(), key=_term_sort_key)

    def leading_coefficient(self) -> QQi:
        """Coefficient of the first term in the canonical term order."""
        if not self.terms:
            return QQi(0)
        return self.sorted_terms()[0][1]

    def monic(self) -> "Polynomial":
        """Divide by the leading coefficient; canonical associate."""
        lc = self.leading_coefficient()
        if lc.is_zero():
            return self
        return self.scale(QQi(1) / lc)

    def leading_form(self) -> "Polynomial":
        """Terms of top total degree."""
        d = self.total_degree()
        return Polynomial(self.variables, {e: c for e, c in self.terms.items() if sum(e) == d})

    # -- arithmetic ----------------------------------------------------------

    def _check_same_vars(self, other: "Polynomial"):
        if self.variables != other.variables:
            raise ValueError(f"variable lists differ: {self.variables} vs {other.variables}")

    def __add__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.variables, other)
        self._check_same_vars(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, QQi(0)) + c
        return Polynomial(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.variables, other)
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return Polynomial.constant(self.variables, other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(QQi.coerce(other))
        self._check_same_vars(other)
        out: Dict[Exponents, QQi] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, QQi(0)) + c1 * c2
        return Polynomial(self.variables, out)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = QQi.coerce(c)
        return Polynomial(self.variables, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        out = Polynomial.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    # -- calculus -------------------------------------------------------------

    def partial(self, var: str) -> "Polynomial":
        """Holomorphic partial derivative d/d var."""
        i = self.variables.index(var)
        out: Dict[Exponents, QQi] = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ne = list(e)
            ne[i] -= 1
            out[tuple(ne)] = out.get(tuple(ne), QQi(0)) + c * e[i]
        return Polynomial(self.variables, out)

    def compose(self, mapping: Dict[str, "Polynomial"]) -> "Polynomial":
        """Substitute each variable by a polynomial (all sharing one target
        variable list)."""
        images = []
        target_vars = None
        for v in self.variables:
            img = mapping.get(v)
            if img is None:
                raise ValueError(f"no image provided for variable {v}")
            if target_vars is None:
                target_vars = img.variables
            elif img.variables != target_vars:
                raise ValueError("images live on different variable lists")
            images.append(img)
        assert target_vars is not None
        out = Polynomial.zero(target_vars)
        for e, c in self.terms.items():
            term = Polynomial.constant(target_vars, c)
            for img, k in zip(images, e):
                if k:
                    term = term * img**k
            out = out + term
        return out

    def shift(self, point: Sequence) -> "Polynomial":
        """Recenter: returns P(x + a), exact Taylor shift."""
        mapping = {}
        for v, a in zip(self.variables, point):
            mapping[v] = Polynomial.variable(v, self.variables) + Polynomial.constant(
                self.variables, QQi.coerce(a)
            )
        return self.compose(mapping)

    def substitute(self, var: str, value) -> "Polynomial":
        """Substitute one variable by an exact scalar; the variable list keeps
        its arity (the substituted slot just stops appearing)."""
        value = QQi.coerce(value)
        i = self.variables.index(var)
        out: Dict[Exponents, QQi] = {}
        for e, c in self.terms.items():
            ne = list(e)
            k = ne[i]
            ne[i] = 0
            coeff = c * value**k
            key = tuple(ne)
            out[key] = out.get(key, QQi(0)) + coeff
        return Polynomial(self.variables, out)

    def drop_variable(self, var: str) -> "Polynomial":
        """Remove a variable the polynomial does not depend on."""
        i = self.variables.index(var)
        if any(e[i] != 0 for e in self.terms):
            raise ValueError(f"polynomial still depends on {var}")
        new_vars = self.variables[:i] + self.variables[i + 1 :]
        return Polynomial(new_vars, {e[:i] + e[i + 1 :]: c for e, c in self.terms.items()})

    def rename_variables(self, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        if len(variables) != len(self.variables):
            raise ValueError("variable count mismatch")
        return Polynomial(variables, dict(self.terms))

    def extend_variables(self, variables: Sequence[str]) -> "Polynomial":
        """View this polynomial inside a larger variable list."""
        variables = tuple(variables)
        pos = [variables.index(v) for v in self.variables]
        out: Dict[Exponents, QQi] = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for p, k in zip(pos, e):
                ne[p] = k
            out[tuple(ne)] = c
        return Polynomial(variables, out)

    def vanishing_order(self, point: Sequence) -> int:
        """Order of vanishing at an exact point: the lowest total degree of
        the recentered polynomial.  Errors on the zero polynomial."""
        if self.is_zero():
            raise ValueError("vanishing order of the zero polynomial is undefined")
        shifted = self.shift([QQi.coerce(a) for a in point])
        return min(sum(e) for e in shifted.terms)

    # -- evaluation -------------------------------------------------------------

    def eval_exact(self, point: Sequence) -> QQi:
        vals = [QQi.coerce(a) for a in point]
        out = QQi(0)
        for e, c in self.terms.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term = term * v**k
            out = out + term
        return out

    def eval_numpy(self, arrays: Sequence):
        """Evaluate on numpy arrays (one complex array per variable,
        broadcastable).  Scalar inputs work too."""
        import numpy as np

        power_cache = {}

        def power(i, k):
            key = (i, k)
            if key not in power_cache:
                if k == 1:
                    power_cache[key] = arrays[i]
                else:
                    power_cache[key] = power(i, k - 1) * arrays[i]
            return power_cache[key]

        out = None
        for e, c in self.sorted_terms():
            term = np.asarray(c.to_complex())
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = term if out is None else out + term
        if out is None:
            return np.asarray(0.0 + 0.0j)
        return out

    # -- printing / parsing -------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{v}^{k}" if k > 1 else v for v, k in zip(self.variables, e) if k
            )
            if not mono:
                parts.append(str(c))
                continue
            if c.is_one():
                parts.append(mono)
            elif c == QQi(-1):
                parts.append(f"-{mono}")
            else:
                coeff = str(c)
                if "+" in coeff[1:] or "-" in coeff[1:]:
                    coeff = f"({coeff})"
                parts.append(f"{coeff}*{mono}")
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    # -- sympy bridge ----------------------------------------------------------------

    def to_sympy(self):
        syms = sympy.symbols(self.variables) if self.variables else ()
        if isinstance(syms, sympy.Symbol):
            syms = (syms,)
        expr = sympy.Integer(0)
        for e, c in self.terms.items():
            term = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
                c.im.numerator, c.im.denominator
            )
            for s, k in zip(syms, e):
                if k:
                    term = term * s**k
            expr = expr + term
        return expr

    @staticmethod
    def from_sympy(expr, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        expr = sympy.expand(expr)
        if not variables:
            return Polynomial((), {(): _sympy_number_to_qqi(expr)})
        syms = [sympy.Symbol(v) for v in variables]
        poly = sympy.Poly(expr, *syms, domain="QQ_I")
        terms: Dict[Exponents, QQi] = {}
        for exps, coeff in poly.terms():
            terms[tuple(int(e) for e in exps)] = _sympy_number_to_qqi(coeff)
        return Polynomial(variables, terms)


def _sympy_number_to_qqi(num) -> QQi:
    num = sympy.nsimplify(sympy.expand(num), rational=True)
    re_part, im_part = num.as_real_imag()
    re_q = sympy.Rational(re_part)
    im_q = sympy.Rational(im_part)
    return QQi(
        Fraction(int(re_q.p), int(re_q.q)),
        Fraction(int(im_q.p), int(im_q.q)),
    )


def parse_polynomial(text: str, variables: Optional[Sequence[str]] = None) -> Polynomial:
    """Parse a polynomial string.  Variables default to the ``x<k>``/``t``
    identifiers appearing in the text, in index order."""
    cleaned = text.replace("^", "**")
    names = set(_IDENT.findall(cleaned))
    local: Dict[str, object] = {}
    found_vars: List[str] = []
    for name in names:
        if name in ("i", "I"):
            local[name] = sympy.I
        else:
            local[name] = sympy.Symbol(name)
            found_vars.append(name)
    if variables is None:
        xs = [v for v in found_vars if re.fullmatch(r"x\d+", v)]
        rest = sorted(v for v in found_vars if not re.fullmatch(r"x\d+", v))
        variables = sorted(xs, key=lambda v: int(v[1:])) + rest
        if not variables:
            variables = ()
    else:
        variables = tuple(variables)
        unknown = [v for v in found_vars if v not in variables]
        if unknown:
            raise ValueError(f"unknown variables in polynomial: {unknown}")
    try:
        expr = sympy.sympify(cleaned, locals=local, rational=True)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse polynomial {text!r}: {exc}") from None
    if not expr.free_symbols.issubset({sympy.Symbol(v) for v in variables}):
        raise ValueError(f"non-polynomial or foreign symbols in {text!r}")
    return Polynomial.from_sympy(expr, variables)


# -- factorization / gcd / resultants (sympy-backed) ----------------------------


def factor_gaussian(poly: Polynomial) -> Tuple[QQi, List[Tuple[Polynomial, int]]]:
    """Irreducible factorization over Q(i).

    Returns ``(content, [(factor, multiplicity), ...])`` where each factor is
    monic in the canonical term order, irreducible over Q(i), and the list is
    deterministically sorted.  ``content * prod(f^m) == poly`` exactly.
    """
    if poly.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if poly.is_constant():
        return poly.constant_value(), []
    coeff, factors = sympy.factor_list(poly.to_sympy(), gaussian=True)
    content = _sympy_number_to_qqi(coeff)
    out: List[Tuple[Polynomial, int]] = []
    for f, mult in factors:
        fp = Polynomial.from_sympy(f, poly.variables)
        if fp.is_constant():
            content = content * fp.constant_value() ** int(mult)
            continue
        lc = fp.leading_coefficient()
        content = content * lc ** int(mult)
        out.append((fp.monic(), int(mult)))
    out.sort(key=lambda fm: (fm[0].total_degree(), str(fm[0])))
    return content, out


def gcd_gaussian(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd over Q(i)."""
    p._check_same_vars(q)
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    syms = [sympy.Symbol(v) for v in p.variables]
    g = sympy.Poly(p.to_sympy(), *syms, domain="QQ_I").gcd(
        sympy.Poly(q.to_sympy(), *syms, domain="QQ_I")
    )
    return Polynomial.from_sympy(g.as_expr(), p.variables).monic()


def exact_divide(p: Polynomial, q: Polynomial) -> Optional[Polynomial]:
    """p / q when the division is exact over Q(i); None otherwise."""
    p._check_same_vars(q)
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return p
    syms = [sympy.Symbol(v) for v in p.variables]
    quo, rem = sympy.div(p.to_sympy(), q.to_sympy(), *syms, domain="QQ_I")
    if sympy.simplify(rem) != 0:
        return None
    return Polynomial.from_sympy(quo, p.variables)


def resultant(p: Polynomial, q: Polynomial, var: str) -> Polynomial:
    """Resultant eliminating ``var``; result keeps the remaining variables."""
    p._check_same_vars(q)
    s = sympy.Symbol(var)
    res = sympy.resultant(p.to_sympy(), q.to_sympy(), s)
    rest = tuple(v for v in p.variables if v != var)
    return Polynomial.from_sympy(res, rest)


def linear_roots_univariate(poly: Polynomial) -> Tuple[List[Tuple[QQi, int]], bool]:
    """Gaussian-rational roots of a univariate polynomial.

    Returns ``(roots, exact_complete)`` where roots is a list of
    ``(root, multiplicity)`` from the linear factors over Q(i) and
    ``exact_complete`` is True when no irreducible factor of degree > 1
    remains (i.e. the listed roots are all the roots).
    """
    nontrivial = [v for v in poly.variables if poly.degree_in(v) > 0]
    if len(nontrivial) > 1:
        raise ValueError("polynomial is not univariate")
    if poly.is_constant():
        return [], True
    _, factors = factor_gaussian(poly)
    var = nontrivial[0]
    roots: List[Tuple[QQi, int]] = []
    complete = True
    for f, m in factors:
        if f.total_degree() == 1:
            # monic a*x + b with a = 1 after monic(): root is -b
            i = f.variables.index(var)
            a = QQi(0)
            b = QQi(0)
            for e, c in f.terms.items():
                if e[i] == 1:
                    a = c
                elif sum(e) == 0:
                    b = c
            roots.append((-b / a, m))
        else:
            complete = False
    roots.sort(key=lambda rm: (str(rm[0]),))
    return roots, complete
