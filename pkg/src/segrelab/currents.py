"""Formal quasi-cycles: exact currents built from smooth forms, divisors and
weighted point masses.

A :class:`QuasiCycle` is a formal sum of graded components on C^n:

* :class:`SmoothPart` -- a (p,p) form, either an exact constant-coefficient
  :class:`ExactForm` or a numeric grid field;
* :class:`DivisorPart` -- a current of integration m*[P = 0], optionally
  wedged with an exact smooth factor;
* :class:`PointMass` -- a weighted Dirac mass in top bidegree.

The formal wedge product implements proper intersections exactly (divisor
pairs meet in weighted point masses via local intersection numbers) and uses
the pluripotential convention that a product against a component supported
inside the singular divisor is zero, which is what makes squares like
([x1=0] + [x2=0])^2 = 2[x1=x2=0] come out right.

Exact coefficients are Gaussian rationals throughout; no floats enter this
module's arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .exactnum import QQi, rat_parse, rat_str
from .polynomials import (
    Polynomial,
    UnsupportedExactCase,
    factor_gaussian,
    parse_polynomial,
)
from . import oracles


def merge_sign(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, Optional[Tuple[int, ...]]]:
    """Shuffle sign for merging two sorted index tuples; (0, None) on overlap."""
    if set(a) & set(b):
        return 0, None
    merged = sorted(a + b)
    seq = list(a + b)
    sign = 1
    # count inversions of the concatenation (bubble; tuples are tiny)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(merged)


class ExactForm:
    """Constant-coefficient (p,p) form with Gaussian-rational entries.

    Coefficients are stored in "dd^c units": the basis element for index pair
    (I, J) is wedge_k dd^c(x_{i_k} * conj(x_{j_k})), so dd^c|x_1|^2 is the
    (1,1) form with single entry 1.  Hermitian symmetry means
    coeff[J, I] == conj(coeff[I, J]).
    """

    __slots__ = ("n", "p", "coeffs")

    def __init__(self, n: int, p: int, coeffs: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], QQi]):
        clean = {}
        for (I, J), c in coeffs.items():
            I = tuple(I)
            J = tuple(J)
            if len(I) != p or len(J) != p:
                raise ValueError("index arity does not match bidegree")
            if any(i < 0 or i >= n for i in I + J):
                raise ValueError("index out of range")
            if tuple(sorted(I)) != I or tuple(sorted(J)) != J:
                raise ValueError("indices must be sorted")
            c = QQi.coerce(c)
            if not c.is_zero():
                clean[(I, J)] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("ExactForm is immutable")

    @staticmethod
    def scalar(n: int, value) -> "ExactForm":
        return ExactForm(n, 0, {((), ()): QQi.coerce(value)})

    @staticmethod
    def standard_kahler(n: int) -> "ExactForm":
        """dd^c |x|^2: the identity Hermitian matrix in dd^c units."""
        return ExactForm(n, 1, {((j,), (j,)): QQi(1) for j in range(n)})

    @staticmethod
    def from_hermitian_matrix(entries: Sequence[Sequence]) -> "ExactForm":
        """dd^c of the quadratic weight sum_jk c_jk x_j conj(x_k)."""
        n = len(entries)
        coeffs = {}
        for j in range(n):
            for k in range(n):
                coeffs[((j,), (k,))] = QQi.coerce(entries[j][k])
        return ExactForm(n, 1, coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_hermitian(self) -> bool:
        for (I, J), c in self.coeffs.items():
            if self.coeffs.get((J, I), QQi(0)) != c.conjugate():
                return False
        return True

    def scale(self, value) -> "ExactForm":
        value = QQi.coerce(value)
        return ExactForm(self.n, self.p, {k: c * value for k, c in self.coeffs.items()})

    def __add__(self, other: "ExactForm") -> "ExactForm":
        if self.n != other.n or self.p != other.p:
            raise ValueError("cannot add forms of different type")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, QQi(0)) + c
        return ExactForm(self.n, self.p, out)

    def __neg__(self) -> "ExactForm":
        return self.scale(-1)

    def wedge(self, other: "ExactForm") -> "ExactForm":
        if self.n != other.n:
            raise ValueError("ambient dimensions differ")
        p = self.p + other.p
        out: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], QQi] = {}
        for (I1, J1), c1 in self.coeffs.items():
            for (I2, J2), c2 in other.coeffs.items():
                s1, I = merge_sign(I1, I2)
                if s1 == 0:
                    continue
                s2, J = merge_sign(J1, J2)
                if s2 == 0:
                    continue
                key = (I, J)
                out[key] = out.get(key, QQi(0)) + c1 * c2 * (s1 * s2)
        return ExactForm(self.n, p, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactForm):
            return NotImplemented
        return self.n == other.n and self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, self.p, frozenset(self.coeffs.items())))

    def canonical_key(self) -> str:
        items = sorted((str(I), str(J), str(c)) for (I, J), c in self.coeffs.items())
        return f"form(p={self.p};{items})"

    def __repr__(self):
        return f"ExactForm(n={self.n}, p={self.p}, {len(self.coeffs)} entries)"

    def to_json(self) -> dict:
        entries = []
        for (I, J), c in sorted(self.coeffs.items()):
            entries.append(
                {"rows": list(I), "cols": list(J), "re": rat_str(c.re), "im": rat_str(c.im)}
            )
        return {"p": self.p, "n": self.n, "entries": entries}

    @staticmethod
    def from_json(data: dict) -> "ExactForm":
        coeffs = {}
        for e in data["entries"]:
            coeffs[(tuple(e["rows"]), tuple(e["cols"]))] = QQi(
                rat_parse(e["re"]), rat_parse(e["im"])
            )
        return ExactForm(int(data["n"]), int(data["p"]), coeffs)


# -- components -----------------------------------------------------------------


@dataclass(frozen=True)
class SmoothPart:
    """A smooth (p,p) piece: exact constant form, or a numeric field."""

    bidegree: int
    form: object  # ExactForm | segrelab.grid.FormField

    def key(self):
        if isinstance(self.form, ExactForm):
            return ("smooth", self.bidegree, self.form.canonical_key())
        return ("smooth-numeric", self.bidegree, id(self.form))


@dataclass(frozen=True)
class DivisorPart:
    """m * [P = 0], optionally wedged with an exact smooth factor."""

    poly: Polynomial
    multiplicity: Fraction
    wedge_factor: Optional[ExactForm] = None

    def __post_init__(self):
        object.__setattr__(self, "multiplicity", Fraction(self.multiplicity))
        if self.poly.is_zero() or self.poly.is_constant():
            raise ValueError("divisor polynomial must be non-constant")

    def bidegree(self) -> int:
        return 1 + (self.wedge_factor.p if self.wedge_factor is not None else 0)

    def key(self):
        wf = self.wedge_factor.canonical_key() if self.wedge_factor is not None else ""
        return ("divisor", self.bidegree(), str(self.poly), wf)


@dataclass(frozen=True)
class PointMass:
    """weight * [point]; top bidegree (n,n)."""

    location: Tuple[QQi, ...]
    weight: Fraction
    bidegree: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "location", tuple(QQi.coerce(a) for a in self.location))
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.bidegree is None:
            object.__setattr__(self, "bidegree", len(self.location))
        elif self.bidegree != len(self.location):
            raise ValueError("point masses live in top bidegree (n,n)")

    def key(self):
        return ("point", self.bidegree, tuple(str(a) for a in self.location))


Component = Union[SmoothPart, DivisorPart, PointMass]


def component_bidegree(c: Component) -> int:
    if isinstance(c, SmoothPart):
        return c.bidegree
    if isinstance(c, DivisorPart):
        return c.bidegree()
    return c.bidegree


# -- quasi-cycles ------------------------------------------------------------------


class QuasiCycle:
    """Formal sum of graded components on C^n."""

    __slots__ = ("ambient_dim", "components")

    def __init__(self, ambient_dim: int, components: Sequence[Component] = ()):
        comps = []
        for c in components:
            k = component_bidegree(c)
            if k > ambient_dim:
                raise ValueError("component bidegree exceeds ambient dimension")
            if isinstance(c, PointMass) and len(c.location) != ambient_dim:
                raise ValueError("point location arity != ambient dimension")
            if isinstance(c, DivisorPart) and len(c.poly.variables) != ambient_dim:
                raise ValueError("divisor polynomial arity != ambient dimension")
            comps.append(c)
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "components", tuple(comps))

    def __setattr__(self, name, value):
        raise AttributeError("QuasiCycle is immutable")

    @staticmethod
    def unit(n: int) -> "QuasiCycle":
        return QuasiCycle(n, [SmoothPart(0, ExactForm.scalar(n, 1))])

    @staticmethod
    def zero(n: int) -> "QuasiCycle":
        return QuasiCycle(n, [])

    def is_zero(self) -> bool:
        return not self.normalize().components

    def bidegrees(self) -> List[int]:
        return sorted({component_bidegree(c) for c in self.components})

    def pure_bidegree(self) -> int:
        degs = self.bidegrees()
        if len(degs) != 1:
            raise ValueError(f"quasi-cycle is not of pure bidegree: {degs}")
        return degs[0]

    def graded_component(self, k: int) -> "QuasiCycle":
        return QuasiCycle(
            self.ambient_dim,
            [c for c in self.components if component_bidegree(c) == k],
        )

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "QuasiCycle") -> "QuasiCycle":
        if not isinstance(other, QuasiCycle):
            return NotImplemented
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")
        return QuasiCycle(self.ambient_dim, self.components + other.components)

    def __neg__(self) -> "QuasiCycle":
        return self.scale(-1)

    def __sub__(self, other: "QuasiCycle") -> "QuasiCycle":
        return self + (-other)

    def scale(self, value) -> "QuasiCycle":
        out = []
        for c in self.components:
            if isinstance(c, SmoothPart):
                if isinstance(c.form, ExactForm):
                    out.append(SmoothPart(c.bidegree, c.form.scale(value)))
                else:
                    out.append(SmoothPart(c.bidegree, c.form * float(Fraction(value))))
            elif isinstance(c, DivisorPart):
                out.append(DivisorPart(c.poly, c.multiplicity * Fraction(value), c.wedge_factor))
            else:
                out.append(PointMass(c.location, c.weight * Fraction(value)))
        return QuasiCycle(self.ambient_dim, out)

    # -- normalization ----------------------------------------------------------

    def normalize(self) -> "QuasiCycle":
        """Canonical form: divisor polynomials factored into monic
        irreducibles, like components merged, zeros dropped, deterministic
        component order.  Idempotent."""
        divisors: Dict[Tuple, Tuple[Polynomial, Fraction, Optional[ExactForm]]] = {}
        points: Dict[Tuple, Tuple[Tuple[QQi, ...], Fraction]] = {}
        smooth_exact: Dict[int, ExactForm] = {}
        smooth_numeric: List[SmoothPart] = []
        for c in self.components:
            if isinstance(c, DivisorPart):
                _, factors = factor_gaussian(c.poly)
                for f, mult in factors:
                    part = DivisorPart(f, c.multiplicity * mult, c.wedge_factor)
                    k = part.key()
                    if k in divisors:
                        old = divisors[k]
                        divisors[k] = (old[0], old[1] + part.multiplicity, old[2])
                    else:
                        divisors[k] = (part.poly, part.multiplicity, part.wedge_factor)
            elif isinstance(c, PointMass):
                k = c.key()
                if k in points:
                    old = points[k]
                    points[k] = (old[0], old[1] + c.weight)
                else:
                    points[k] = (c.location, c.weight)
            else:
                if isinstance(c.form, ExactForm):
                    if c.bidegree in smooth_exact:
                        smooth_exact[c.bidegree] = smooth_exact[c.bidegree] + c.form
                    else:
                        smooth_exact[c.bidegree] = c.form
                else:
                    smooth_numeric.append(c)
        comps: List[Component] = []
        for k in sorted(smooth_exact):
            if not smooth_exact[k].is_zero():
                comps.append(SmoothPart(k, smooth_exact[k]))
        comps.extend(smooth_numeric)
        for key in sorted(divisors, key=str):
            poly, mult, wf = divisors[key]
            if mult != 0:
                comps.append(DivisorPart(poly, mult, wf))
        for key in sorted(points, key=str):
            loc, w = points[key]
            if w != 0:
                comps.append(PointMass(loc, w))
        return QuasiCycle(self.ambient_dim, comps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuasiCycle):
            return NotImplemented
        if self.ambient_dim != other.ambient_dim:
            return False
        a = self.normalize()
        b = other.normalize()

        def canon(qc):
            out = []
            for c in qc.components:
                if isinstance(c, SmoothPart) and not isinstance(c.form, ExactForm):
                    raise UnsupportedExactCase("numeric smooth parts have no exact equality")
                if isinstance(c, DivisorPart):
                    out.append((c.key(), c.multiplicity))
                elif isinstance(c, PointMass):
                    out.append((c.key(), c.weight))
                else:
                    out.append((c.key(), 0))
            return sorted(out, key=str)

        return canon(a) == canon(b)

    def __hash__(self):
        raise TypeError("QuasiCycle is unhashable; compare with ==")

    def __repr__(self):
        if not self.components:
            return "QuasiCycle(0)"
        bits = []
        for c in self.components:
            if isinstance(c, DivisorPart):
                wf = " ^ (smooth)" if c.wedge_factor is not None else ""
                bits.append(f"{c.multiplicity}*[{c.poly}=0]{wf}")
            elif isinstance(c, PointMass):
                loc = ", ".join(str(a) for a in c.location)
                bits.append(f"{c.weight}*[({loc})]")
            else:
                bits.append(f"smooth(p={c.bidegree})")
        return " + ".join(bits)

    # -- restriction and multiplicities --------------------------------------------

    def restrict(self, variety: Sequence[Polynomial]) -> "QuasiCycle":
        """1_V * mu for V the common zero set of the given polynomials.

        Keeps the components whose support lies inside V; smooth parts do not
        charge a proper analytic subset and restrict to zero.
        """
        polys = list(variety)
        if not polys:
            raise ValueError("restriction needs at least one defining polynomial")
        if any(p.is_zero() for p in polys):
            raise ValueError("restriction variety must be proper (no zero polynomial)")
        if all(p.is_constant() for p in polys):
            raise ValueError("restriction variety must be non-empty/proper")
        norm = self.normalize()
        out = []
        for c in norm.components:
            if isinstance(c, SmoothPart):
                continue
            if isinstance(c, PointMass):
                if all(q.eval_exact(list(c.location)).is_zero() for q in polys if not q.is_constant()):
                    out.append(c)
            else:
                from .polynomials import gcd_gaussian

                inside = True
                for q in polys:
                    if q.is_constant():
                        inside = False
                        break
                    # {P=0} subset {q=0} iff the irreducible P divides q
                    g = gcd_gaussian(c.poly, q)
                    if g.is_constant():
                        inside = False
                        break
                if inside:
                    out.append(c)
        return QuasiCycle(self.ambient_dim, out)

    def mult_at(self, point: Sequence) -> Fraction:
        """Multiplicity at an exact point: point-mass weight, plus divisor
        multiplicity times the vanishing order of its polynomial.  Smooth
        parts and divisor parts carrying a positive-degree smooth wedge
        factor contribute zero."""
        pt = [QQi.coerce(a) for a in point]
        total = Fraction(0)
        for c in self.normalize().components:
            if isinstance(c, PointMass):
                if all(a == b for a, b in zip(c.location, pt)):
                    total += c.weight
            elif isinstance(c, DivisorPart):
                if c.wedge_factor is not None and c.wedge_factor.p > 0:
                    continue
                if not c.poly.eval_exact(pt).is_zero():
                    continue
                total += c.multiplicity * c.poly.vanishing_order(pt)
        return total

    def assert_integral(self):
        """Check that every weight/multiplicity is an integer."""
        for c in self.normalize().components:
            if isinstance(c, DivisorPart) and c.multiplicity.denominator != 1:
                raise ValueError(f"non-integer divisor multiplicity {c.multiplicity}")
            if isinstance(c, PointMass) and c.weight.denominator != 1:
                raise ValueError(f"non-integer point weight {c.weight}")

    # -- the formal wedge ---------------------------------------------------------

    def wedge(self, other: "QuasiCycle") -> "QuasiCycle":
        """Formal commutative product.

        Supported exactly: scalar smooth factors, constant-form wedges,
        divisor x divisor in n = 2 via proper intersections (components with
        a common irreducible factor contribute zero, the polar-support
        convention), and any combination whose bidegree overflows the ambient
        dimension (those vanish).  Raises UnsupportedExactCase otherwise.
        """
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimensions differ")
        n = self.ambient_dim
        a = self.normalize()
        b = other.normalize()
        out: List[Component] = []
        for c1 in a.components:
            for c2 in b.components:
                out.extend(_wedge_pair(n, c1, c2))
        return QuasiCycle(n, out).normalize()

    __mul__ = wedge

    # -- serialization ---------------------------------------------------------------

    def to_json(self) -> dict:
        comps = []
        for c in self.normalize().components:
            if isinstance(c, DivisorPart):
                entry = {
                    "kind": "divisor",
                    "poly": str(c.poly),
                    "mult": rat_str(c.multiplicity),
                }
                if c.wedge_factor is not None:
                    entry["wedge"] = c.wedge_factor.to_json()
                comps.append(entry)
            elif isinstance(c, PointMass):
                comps.append(
                    {
                        "kind": "point",
                        "location": [str(a) for a in c.location],
                        "weight": rat_str(c.weight),
                        "bidegree": c.bidegree,
                    }
                )
            else:
                if not isinstance(c.form, ExactForm):
                    raise UnsupportedExactCase("numeric smooth parts are not serializable")
                comps.append({"kind": "smooth", "bidegree": c.bidegree, "form": c.form.to_json()})
        return {"dim": self.ambient_dim, "components": comps}

    @staticmethod
    def from_json(data: dict) -> "QuasiCycle":
        n = int(data["dim"])
        variables = tuple(f"x{i+1}" for i in range(n))
        comps: List[Component] = []
        for entry in data["components"]:
            kind = entry["kind"]
            if kind == "divisor":
                poly = parse_polynomial(entry["poly"], variables)
                wf = ExactForm.from_json(entry["wedge"]) if "wedge" in entry else None
                comps.append(DivisorPart(poly, rat_parse(entry["mult"]), wf))
            elif kind == "point":
                loc = tuple(_parse_exact_scalar(s) for s in entry["location"])
                comps.append(PointMass(loc, rat_parse(entry["weight"]), int(entry["bidegree"])))
            elif kind == "smooth":
                comps.append(SmoothPart(int(entry["bidegree"]), ExactForm.from_json(entry["form"])))
            else:
                raise ValueError(f"unknown component kind {kind!r}")
        return QuasiCycle(n, comps)


def _parse_exact_scalar(text: str) -> QQi:
    return parse_polynomial(text, ()).constant_value()


def _scalar_of(c: Component) -> Optional[QQi]:
    if isinstance(c, SmoothPart) and c.bidegree == 0 and isinstance(c.form, ExactForm):
        return c.form.coeffs.get(((), ()), QQi(0))
    return None


def _wedge_pair(n: int, c1: Component, c2: Component) -> List[Component]:
    s = _scalar_of(c1)
    if s is not None:
        return [] if s.is_zero() else list(QuasiCycle(n, [c2]).scale_exact(s).components)
    s = _scalar_of(c2)
    if s is not None:
        return [] if s.is_zero() else list(QuasiCycle(n, [c1]).scale_exact(s).components)
    k1 = component_bidegree(c1)
    k2 = component_bidegree(c2)
    if k1 + k2 > n:
        return []
    smooth1 = isinstance(c1, SmoothPart)
    smooth2 = isinstance(c2, SmoothPart)
    if smooth1 and not isinstance(c1.form, ExactForm):
        raise UnsupportedExactCase("numeric smooth parts have no exact wedge")
    if smooth2 and not isinstance(c2.form, ExactForm):
        raise UnsupportedExactCase("numeric smooth parts have no exact wedge")
    if smooth1 and smooth2:
        return [SmoothPart(k1 + k2, c1.form.wedge(c2.form))]
    if smooth1 or smooth2:
        form = c1.form if smooth1 else c2.form
        geom = c2 if smooth1 else c1
        if isinstance(geom, PointMass):
            return []  # bidegree overflow was already handled; p >= 1 here
        wf = form if geom.wedge_factor is None else geom.wedge_factor.wedge(form)
        if wf.is_zero():
            return []
        return [DivisorPart(geom.poly, geom.multiplicity, wf)]
    if isinstance(c1, PointMass) or isinstance(c2, PointMass):
        return []  # point against anything of positive degree overflows
    # divisor x divisor
    if c1.wedge_factor is not None or c2.wedge_factor is not None:
        raise UnsupportedExactCase("divisor products with wedge factors exceed top degree only in n<=2")
    if n != 2:
        raise UnsupportedExactCase("exact divisor intersections are implemented in n = 2 only")
    if str(c1.poly) == str(c2.poly):
        return []  # common component: polar-support convention
    points, complete = oracles.common_zeros_exact(c1.poly, c2.poly)
    if not complete:
        raise UnsupportedExactCase(
            f"intersection of {c1.poly} and {c2.poly} has irrational points"
        )
    out: List[Component] = []
    for pt in points:
        mult = oracles.intersection_number(c1.poly, c2.poly, pt)
        out.append(PointMass(pt, c1.multiplicity * c2.multiplicity * mult))
    return out


def _scale_exact(self: QuasiCycle, value: QQi) -> QuasiCycle:
    """Scale by an exact Gaussian rational (smooth forms may pick up complex
    scalars; divisor/point weights must stay rational)."""
    out = []
    for c in self.components:
        if isinstance(c, SmoothPart):
            if not isinstance(c.form, ExactForm):
                raise UnsupportedExactCase("numeric smooth parts have no exact scaling")
            out.append(SmoothPart(c.bidegree, c.form.scale(value)))
        else:
            if not value.is_real():
                raise UnsupportedExactCase("cycle parts only scale by rationals")
            q = Fraction(value.re)
            if isinstance(c, DivisorPart):
                out.append(DivisorPart(c.poly, c.multiplicity * q, c.wedge_factor))
            else:
                out.append(PointMass(c.location, c.weight * q))
    return QuasiCycle(self.ambient_dim, out)


QuasiCycle.scale_exact = _scale_exact


# -- qas descriptors and the principal wedge --------------------------------------


@dataclass(frozen=True)
class QasDescriptor:
    """A weight with analytic singularities: c * log sum_k |f_k|^2 + smooth.

    ``exponent_c`` is a positive rational, ``generators`` are exact
    polynomials, ``smooth_part`` is None, an exact Hermitian-quadratic
    matrix (rows of exact scalars, meaning sum c_jk x_j conj(x_k)) or an
    opaque symbolic string handled only by the numerical engine.
    """

    exponent_c: Fraction
    generators: Tuple[Polynomial, ...]
    smooth_part: object = None

    def __post_init__(self):
        object.__setattr__(self, "exponent_c", Fraction(self.exponent_c))
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.exponent_c <= 0:
            raise ValueError("qas exponent must be positive")
        if not self.generators:
            raise ValueError("qas descriptor needs at least one generator")

    def is_integral(self) -> bool:
        return self.exponent_c.denominator == 1

    def ddc_smooth(self, n: int) -> ExactForm:
        if self.smooth_part is None:
            return ExactForm(n, 1, {})
        if isinstance(self.smooth_part, ExactForm):
            if self.smooth_part.p != 1:
                raise ValueError("smooth part must give a (1,1) form")
            return self.smooth_part
        if isinstance(self.smooth_part, (list, tuple)):
            return ExactForm.from_hermitian_matrix(self.smooth_part)
        raise UnsupportedExactCase(
            "dd^c of a general symbolic smooth part needs the numerical engine"
        )


def ddc_qas_wedge(u: QasDescriptor, mu: QuasiCycle) -> QuasiCycle:
    """Exact dd^c(u) wedge mu for a principal qas weight.

    Requires a single generator, ambient dimension <= 2, and divisor
    components of mu meeting the generator's divisor properly (otherwise
    UnsupportedExactCase).  Smooth components pick up the generator's
    divisor as a wedge factor plus dd^c(smooth part) terms; point masses are
    annihilated by degree.
    """
    n = mu.ambient_dim
    if len(u.generators) != 1:
        raise UnsupportedExactCase("principal case only: exactly one generator")
    if n > 2:
        raise UnsupportedExactCase("exact wedge implemented for n <= 2")
    gen = u.generators[0]
    if gen.is_zero():
        raise ValueError("zero generator")
    divisor_factors = [
        (f, Fraction(m) * u.exponent_c) for f, m in oracles.poincare_lelong(gen)
    ]
    smooth_form = u.ddc_smooth(n)
    out: List[Component] = []
    for c in mu.normalize().components:
        if isinstance(c, SmoothPart):
            if not isinstance(c.form, ExactForm):
                raise UnsupportedExactCase("numeric smooth parts have no exact wedge")
            for f, m in divisor_factors:
                if 1 + c.bidegree <= n:
                    wf = None if c.bidegree == 0 else c.form
                    scale = c.form.coeffs.get(((), ()), QQi(1)) if c.bidegree == 0 else QQi(1)
                    if c.bidegree == 0:
                        if not scale.is_real():
                            raise UnsupportedExactCase("complex scalar against a divisor")
                        out.append(DivisorPart(f, m * Fraction(scale.re)))
                    else:
                        out.append(DivisorPart(f, m, wf))
            if not smooth_form.is_zero() and 1 + c.bidegree <= n:
                out.extend(_wedge_pair(n, SmoothPart(1, smooth_form), c))
        elif isinstance(c, DivisorPart):
            for f, m in divisor_factors:
                if str(f) == str(c.poly):
                    raise UnsupportedExactCase(
                        f"non-proper intersection: {f} appears in both factors"
                    )
            if 2 + (c.wedge_factor.p if c.wedge_factor else 0) <= n:
                for f, m in divisor_factors:
                    if n != 2:
                        raise UnsupportedExactCase("divisor intersections need n = 2")
                    points, complete = oracles.common_zeros_exact(f, c.poly)
                    if not complete:
                        raise UnsupportedExactCase("irrational intersection points")
                    for pt in points:
                        mult = oracles.intersection_number(f, c.poly, pt)
                        out.append(PointMass(pt, m * c.multiplicity * mult))
            if not smooth_form.is_zero():
                out.extend(_wedge_pair(n, SmoothPart(1, smooth_form), c))
        else:
            continue  # point mass: dd^c u ^ [pt] vanishes by degree
    return QuasiCycle(n, out).normalize()


# -- decomposition ------------------------------------------------------------------


@dataclass
class DecompositionReport:
    """Fixed (cycle) and moving split of a pure-bidegree quasi-cycle."""

    fixed: QuasiCycle
    moving: QuasiCycle
    residual_mass_table: Dict[str, str] = field(default_factory=dict)

    def reassembled(self) -> QuasiCycle:
        return self.fixed + self.moving


def siu_decompose(mu: QuasiCycle, k: int) -> DecompositionReport:
    """Split a (k,k) quasi-cycle into its codimension-k cycle part and the
    rest.  Divisor parts without a wedge factor are cycles for k = 1, point
    masses for k = n; everything else moves."""
    n = mu.ambient_dim
    norm = mu.normalize()
    for c in norm.components:
        if component_bidegree(c) != k:
            raise ValueError("siu_decompose expects a pure-bidegree input")
    fixed: List[Component] = []
    moving: List[Component] = []
    table: Dict[str, str] = {}
    for c in norm.components:
        if isinstance(c, DivisorPart) and k == 1 and c.wedge_factor is None:
            fixed.append(c)
            table[f"[{c.poly}=0]"] = rat_str(c.multiplicity)
        elif isinstance(c, PointMass) and k == n:
            fixed.append(c)
            loc = ", ".join(str(a) for a in c.location)
            table[f"({loc})"] = rat_str(c.weight)
        else:
            moving.append(c)
    return DecompositionReport(
        fixed=QuasiCycle(n, fixed),
        moving=QuasiCycle(n, moving),
        residual_mass_table=table,
    )
