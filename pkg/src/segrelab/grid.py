"""Numerical currents on tensor grids: sampling, dd^c, wedges, masses.

Charts are boxes in C^d sampled on cell-centered tensor grids (2d real
axes).  A (p,p) form field stores one complex coefficient array per pair of
sorted index tuples (I, J) with respect to the basis

    E_{I,J} = (i dz_{i1} ^ conj(dz_{j1})) ^ ... ^ (i dz_{ip} ^ conj(dz_{jp})),

so wedge products merge with a pure shuffle sign and the top-degree
coefficient c integrates as integral of Re(c) * 2^d dV.  dd^c is normalized
as (i/2pi) del delbar: the mass of dd^c log|z - a|^2 over a disc containing
``a`` is 1, and dd^c|z|^2 over the unit disc in C^1 also has mass exactly 1.
Those two facts calibrate every mass in the package.

Derivatives use second-order central differences at the grid step.  Summing
the same-axis stencils telescopes to a boundary flux, which is why masses of
clamped singular potentials over regions whose boundary avoids the
singularity come out accurate even when the peak itself is unresolved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .currents import ExactForm, merge_sign

DEFAULT_RESOLUTIONS = {1: 128, 2: 48, 3: 20}
CLAMP_FLOOR = -700.0  # log of a tiny positive double
MASS_MARGIN = 2  # boundary layer excluded from mass integrals

IndexPair = Tuple[Tuple[int, ...], Tuple[int, ...]]


def default_resolution(d: int) -> int:
    if d in DEFAULT_RESOLUTIONS:
        return DEFAULT_RESOLUTIONS[d]
    return 12


@dataclass(frozen=True)
class GridChart:
    """A cell-centered box grid in C^d.

    ``resolution`` is the number of points per real axis (int, or one int per
    complex coordinate).  Cell centers never sit on the box boundary and, for
    even resolutions, never on the center either, which keeps log-type
    singularities off the nodes.
    """

    complex_dim: int
    center: Tuple[complex, ...] = None  # type: ignore[assignment]
    half_widths: Tuple[float, ...] = None  # type: ignore[assignment]
    resolution: Union[int, Tuple[int, ...]] = None  # type: ignore[assignment]

    def __post_init__(self):
        d = self.complex_dim
        if d < 1 or d > 4:
            raise ValueError("charts support 1 <= d <= 4 complex dimensions")
        object.__setattr__(
            self, "center", tuple(self.center) if self.center is not None else (0j,) * d
        )
        object.__setattr__(
            self,
            "half_widths",
            tuple(float(w) for w in self.half_widths) if self.half_widths is not None else (1.0,) * d,
        )
        res = self.resolution
        if res is None:
            res = default_resolution(d)
        if isinstance(res, int):
            res = (res,) * d
        res = tuple(int(r) for r in res)
        if any(r < 8 for r in res):
            raise ValueError("resolution must be at least 8 points per axis")
        object.__setattr__(self, "resolution", res)

    @property
    def shape(self) -> Tuple[int, ...]:
        # real axes ordered (x1, y1, x2, y2, ...)
        return tuple(n for r in self.resolution for n in (r, r))

    @property
    def spacings(self) -> Tuple[float, ...]:
        return tuple(
            2.0 * w / r for w, r in zip(self.half_widths, self.resolution) for _ in (0, 1)
        )

    def axis_values(self, axis: int) -> np.ndarray:
        j = axis // 2
        w = self.half_widths[j]
        n = self.resolution[j]
        h = 2.0 * w / n
        base = -w + (np.arange(n) + 0.5) * h
        offset = self.center[j].real if axis % 2 == 0 else self.center[j].imag
        return base + offset

    def coordinates(self) -> List[np.ndarray]:
        """Complex coordinates as broadcastable arrays (one per complex dim)."""
        d = self.complex_dim
        out = []
        for j in range(d):
            x = self.axis_values(2 * j)
            y = self.axis_values(2 * j + 1)
            shape_x = [1] * (2 * d)
            shape_x[2 * j] = len(x)
            shape_y = [1] * (2 * d)
            shape_y[2 * j + 1] = len(y)
            out.append(x.reshape(shape_x) + 1j * y.reshape(shape_y))
        return out

    def cell_volume(self) -> float:
        v = 1.0
        for h in self.spacings:
            v *= h
        return v

    def interior_mask(self, margin: int) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        if margin > 0:
            for axis in range(len(self.shape)):
                idx = [slice(None)] * len(self.shape)
                idx[axis] = slice(0, margin)
                mask[tuple(idx)] = False
                idx[axis] = slice(-margin, None)
                mask[tuple(idx)] = False
        return mask

    def ball_mask(self, point: Sequence[complex], radius: float) -> np.ndarray:
        dist2 = np.zeros((1,) * len(self.shape))
        for j, z in enumerate(self.coordinates()):
            dist2 = dist2 + np.abs(z - point[j]) ** 2
        return dist2 <= radius * radius

    def box_mask(self, lo: Sequence[complex], hi: Sequence[complex]) -> np.ndarray:
        mask = np.ones((1,) * len(self.shape), dtype=bool)
        for j, z in enumerate(self.coordinates()):
            mask = mask & (z.real >= lo[j].real) & (z.real <= hi[j].real)
            mask = mask & (z.imag >= lo[j].imag) & (z.imag <= hi[j].imag)
        return np.broadcast_to(mask, self.shape)

    def tube_mask(self, poly_values: np.ndarray, radius: float) -> np.ndarray:
        return np.abs(poly_values) <= radius


@dataclass
class ScalarField:
    """A real scalar sampled on a chart, with clamping bookkeeping."""

    chart: GridChart
    values: np.ndarray
    clamp_floor: float = CLAMP_FLOOR
    clamp_count: int = 0
    valid_margin: int = 0

    def copy_with(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.chart, values, self.clamp_floor, self.clamp_count, self.valid_margin)


def sample(
    chart: GridChart,
    f: Union[Callable, str],
    clamp_floor: float = CLAMP_FLOOR,
) -> ScalarField:
    """Sample a real-valued function of the complex coordinates.

    ``f`` is a callable taking d complex arrays, or a sympy-parseable string
    in x1..xd (log, exp, abs/Abs, conjugate allowed).  Values below the clamp
    floor (including -inf from log 0) are clamped and counted.
    """
    coords = chart.coordinates()
    if isinstance(f, str):
        f = symbolic_scalar(f, chart.complex_dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = f(*coords)
    raw = np.asarray(raw)
    if np.iscomplexobj(raw):
        imag_max = float(np.nanmax(np.abs(raw.imag))) if raw.size else 0.0
        if imag_max > 1e-9 * max(1.0, float(np.nanmax(np.abs(raw.real)))):
            raise ValueError("sampled field is not real")
        raw = raw.real
    raw = np.broadcast_to(raw, chart.shape).astype(np.float64, copy=True)
    bad = ~np.isfinite(raw) | (raw < clamp_floor)
    count = int(np.count_nonzero(bad))
    if count:
        raw[bad] = clamp_floor
    return ScalarField(chart, raw, clamp_floor, count)


def symbolic_scalar(expr: str, d: int) -> Callable:
    """Parse a scalar expression in x1..xd into a numpy callable."""
    import sympy

    names = [f"x{j+1}" for j in range(d)]
    syms = [sympy.Symbol(n) for n in names]
    local = {n: s for n, s in zip(names, syms)}
    local.update({"i": sympy.I, "I": sympy.I, "abs": sympy.Abs, "Abs": sympy.Abs,
                  "log": sympy.log, "exp": sympy.exp, "conj": sympy.conjugate,
                  "conjugate": sympy.conjugate, "re": sympy.re, "im": sympy.im,
                  "sqrt": sympy.sqrt})
    parsed = sympy.sympify(expr.replace("^", "**"), locals=local)
    fn = sympy.lambdify(syms, parsed, modules="numpy")
    return fn


class FormField:
    """A (p,p) form on a chart: complex coefficient arrays per sorted index
    pair, Hermitian as a whole (coeff[J,I] == conj(coeff[I,J]))."""

    def __init__(
        self,
        chart: GridChart,
        bidegree: int,
        coeffs: Dict[IndexPair, np.ndarray],
        valid_margin: int = 0,
    ):
        self.chart = chart
        self.bidegree = bidegree
        self.coeffs: Dict[IndexPair, np.ndarray] = {}
        d = chart.complex_dim
        for (I, J), arr in coeffs.items():
            I = tuple(I)
            J = tuple(J)
            if len(I) != bidegree or len(J) != bidegree:
                raise ValueError("index arity does not match bidegree")
            if any(i < 0 or i >= d for i in I + J):
                raise ValueError("index out of range")
            self.coeffs[(I, J)] = np.asarray(arr)
        self.valid_margin = int(valid_margin)

    def entry(self, I: Sequence[int], J: Sequence[int]) -> np.ndarray:
        return self.coeffs.get((tuple(I), tuple(J)), np.zeros(()))

    def hermitize(self) -> "FormField":
        """Average with the conjugate-transposed entries (enforces Hermitian
        symmetry; a no-op up to roundoff for dd^c of real fields)."""
        out: Dict[IndexPair, np.ndarray] = {}
        keys = set(self.coeffs) | {(J, I) for (I, J) in self.coeffs}
        for I, J in keys:
            a = self.coeffs.get((I, J))
            b = self.coeffs.get((J, I))
            if a is None:
                val = np.conj(b)
            elif b is None:
                val = a
            else:
                val = 0.5 * (a + np.conj(b))
            out[(I, J)] = val
        return FormField(self.chart, self.bidegree, out, self.valid_margin)

    def is_hermitian(self, tol: float = 1e-8) -> bool:
        scale = max((float(np.max(np.abs(a))) for a in self.coeffs.values()), default=0.0)
        for (I, J), a in self.coeffs.items():
            b = self.coeffs.get((J, I))
            if b is None:
                return False
            if float(np.max(np.abs(a - np.conj(b)))) > tol * max(scale, 1e-300):
                return False
        return True

    def __add__(self, other: "FormField") -> "FormField":
        if not isinstance(other, FormField):
            return NotImplemented
        if other.bidegree != self.bidegree or other.chart is not self.chart:
            raise ValueError("cannot add fields of different type/chart")
        out = dict(self.coeffs)
        for k, arr in other.coeffs.items():
            out[k] = out[k] + arr if k in out else arr
        return FormField(self.chart, self.bidegree, out, max(self.valid_margin, other.valid_margin))

    def __sub__(self, other: "FormField") -> "FormField":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "FormField":
        return FormField(
            self.chart, self.bidegree, {k: a * c for k, a in self.coeffs.items()}, self.valid_margin
        )

    __mul__ = scale
    __rmul__ = scale

    def wedge(self, other: "FormField") -> "FormField":
        if other.chart is not self.chart:
            raise ValueError("wedge needs a common chart")
        p = self.bidegree + other.bidegree
        if p > self.chart.complex_dim:
            return FormField(self.chart, p, {}, max(self.valid_margin, other.valid_margin))
        out: Dict[IndexPair, np.ndarray] = {}
        for (I1, J1), a in self.coeffs.items():
            for (I2, J2), b in other.coeffs.items():
                s1, I = merge_sign(I1, I2)
                if s1 == 0:
                    continue
                s2, J = merge_sign(J1, J2)
                if s2 == 0:
                    continue
                term = a * b if s1 * s2 > 0 else -(a * b)
                key = (I, J)
                out[key] = out[key] + term if key in out else term
        return FormField(self.chart, p, out, max(self.valid_margin, other.valid_margin))

    def wedge_power(self, k: int) -> "FormField":
        if k == 0:
            return constant_form(self.chart, ExactForm.scalar(self.chart.complex_dim, 1))
        out = self
        for _ in range(k - 1):
            out = out.wedge(self)
        return out

    # -- masses -----------------------------------------------------------------

    def top_mass(self, region: Optional[np.ndarray] = None, margin: Optional[int] = None) -> float:
        """Integral over the region (default: whole valid interior) of a
        top-degree field."""
        d = self.chart.complex_dim
        if self.bidegree != d:
            raise ValueError("top_mass needs a top-degree field")
        margin = MASS_MARGIN if margin is None else margin
        margin = max(margin, self.valid_margin)
        mask = self.chart.interior_mask(margin)
        if region is not None:
            mask = mask & np.broadcast_to(region, self.chart.shape)
        top = tuple(range(d))
        coeff = self.coeffs.get((top, top))
        if coeff is None:
            return 0.0
        vals = np.broadcast_to(coeff, self.chart.shape)
        total = float(np.sum(vals.real, where=mask, dtype=np.float64))
        return total * (2.0**d) * self.chart.cell_volume()

    def kahler_mass(
        self, region: Optional[np.ndarray] = None, margin: Optional[int] = None
    ) -> float:
        """Mass against the standard Kahler form: integral of
        T ^ (dd^c|x|^2)^(d-k), normalized by 1/(d-k)! so that a coordinate
        hyperplane current has unit density per pi^(d-k) * r^(2(d-k)) ball
        volume (see lelong_estimate for the radius normalization)."""
        d = self.chart.complex_dim
        q = d - self.bidegree
        if q == 0:
            return self.top_mass(region, margin)
        omega = standard_kahler_field(self.chart)
        out = self
        for _ in range(q):
            out = out.wedge(omega)
        return out.top_mass(region, margin) / math.factorial(q)


def constant_form(chart: GridChart, exact: ExactForm) -> FormField:
    """Materialize an exact constant form on a chart.  ExactForm coefficients
    are in dd^c units, i.e. each (1,1) unit carries 1/(2pi) in the E basis."""
    factor = (1.0 / (2.0 * math.pi)) ** exact.p
    coeffs = {
        (I, J): np.asarray(c.to_complex() * factor) for (I, J), c in exact.coeffs.items()
    }
    return FormField(chart, exact.p, coeffs)


def standard_kahler_field(chart: GridChart) -> FormField:
    return constant_form(chart, ExactForm.standard_kahler(chart.complex_dim))


# -- derivatives --------------------------------------------------------------------


def _second_same_axis(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.zeros_like(u)
    sl = [slice(None)] * u.ndim
    lo = [slice(None)] * u.ndim
    hi = [slice(None)] * u.ndim
    sl[axis] = slice(1, -1)
    lo[axis] = slice(0, -2)
    hi[axis] = slice(2, None)
    out[tuple(sl)] = (u[tuple(hi)] - 2.0 * u[tuple(sl)] + u[tuple(lo)]) / (h * h)
    return out

def _second_mixed(u: np.ndarray, ax_a: int, ax_b: int, ha: float, hb: float) -> np.ndarray:
    out = np.zeros_like(u)
    mid = [slice(None)] * u.ndim
    mid[ax_a] = slice(1, -1)
    mid[ax_b] = slice(1, -1)

    def shifted(da: int, db: int) -> np.ndarray:
        idx = [slice(None)] * u.ndim
        idx[ax_a] = slice(1 + da, u.shape[ax_a] - 1 + da)
        idx[ax_b] = slice(1 + db, u.shape[ax_b] - 1 + db)
        return u[tuple(idx)]

    out[tuple(mid)] = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (
        4.0 * ha * hb
    )
    return out


def ddc(field: ScalarField) -> FormField:
    """(i/2pi) del delbar of a sampled real field, by grid-step central
    differences:

        H_jk = (1/2pi) * (1/4) [ (d_xj d_xk + d_yj d_yk) u
                                 + i (d_xj d_yk - d_yj d_xk) u ].

    The outermost grid layer has no stencil and is marked invalid.
    """
    chart = field.chart
    u = field.values
    d = chart.complex_dim
    h = chart.spacings
    norm = 1.0 / (8.0 * math.pi)  # (1/2pi) * (1/4)

    def d2(ax_a: int, ax_b: int) -> np.ndarray:
        if ax_a == ax_b:
            return _second_same_axis(u, ax_a, h[ax_a])
        return _second_mixed(u, ax_a, ax_b, h[ax_a], h[ax_b])

    coeffs: Dict[IndexPair, np.ndarray] = {}
    for j in range(d):
        for k in range(j, d):
            xx = d2(2 * j, 2 * k)
            yy = d2(2 * j + 1, 2 * k + 1)
            xy = d2(2 * j, 2 * k + 1)
            yx = d2(2 * j + 1, 2 * k)
            val = norm * ((xx + yy) + 1j * (xy - yx))
            coeffs[((j,), (k,))] = val
            if k != j:
                coeffs[((k,), (j,))] = np.conj(val)
    return FormField(chart, 1, coeffs, valid_margin=field.valid_margin + 1)


def ddc_form(field: FormField) -> FormField:
    """dd^c of a (p,p) field: the scalar dd^c stencil applied to every
    coefficient, wedge-merged into the index pair (same shuffle signs as
    ``FormField.wedge``).  For a (0,0) field this agrees with ``ddc``.

    Only the two outermost derivatives are discrete; the telescoping of the
    same-axis stencils therefore applies to the full field, which is what
    makes box masses of dd^c(psi T) stable when the coefficients of T hold
    unresolved concentration (the discrete Bedford-Taylor step).
    """
    chart = field.chart
    d = chart.complex_dim
    h = chart.spacings
    norm = 1.0 / (8.0 * math.pi)

    def d2(u: np.ndarray, ax_a: int, ax_b: int) -> np.ndarray:
        if ax_a == ax_b:
            return _second_same_axis(u, ax_a, h[ax_a])
        return _second_mixed(u, ax_a, ax_b, h[ax_a], h[ax_b])

    out: Dict[IndexPair, np.ndarray] = {}
    for (I, J), arr in field.coeffs.items():
        u = np.ascontiguousarray(np.broadcast_to(arr, chart.shape))
        for a in range(d):
            sA, IA = merge_sign((a,), I)
            if sA == 0:
                continue
            for b in range(d):
                sB, JB = merge_sign((b,), J)
                if sB == 0:
                    continue
                xx = d2(u, 2 * a, 2 * b)
                yy = d2(u, 2 * a + 1, 2 * b + 1)
                xy = d2(u, 2 * a, 2 * b + 1)
                yx = d2(u, 2 * a + 1, 2 * b)
                val = norm * ((xx + yy) + 1j * (xy - yx))
                if sA * sB < 0:
                    val = -val
                key = (IA, JB)
                out[key] = out[key] + val if key in out else val
    return FormField(chart, field.bidegree + 1, out, valid_margin=field.valid_margin + 1)


# -- regularization -----------------------------------------------------------------


def regularize_chi(psi: ScalarField, psi0: Union[ScalarField, float], eps: float) -> ScalarField:
    """log(e^(psi - psi0) + eps) + psi0: the additive regularization of the
    weight by eps times the reference weight.  Decreases pointwise as eps
    decreases; equals log(eps) + psi0 where psi = -inf."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    base = psi0.values if isinstance(psi0, ScalarField) else float(psi0)
    t = psi.values - base
    vals = np.logaddexp(t, math.log(eps)) + base
    out = psi.copy_with(vals)
    out.clamp_count = psi.clamp_count
    return out


class MonotonicityError(Exception):
    pass


def _radial_kernel(chart: GridChart, eps: float) -> np.ndarray:
    """Discrete radial bump supported in |x| < eps (all real axes), sum 1."""
    h = chart.spacings
    radii = [max(1, int(math.floor(eps / hj))) for hj in h]
    axes = [np.arange(-r, r + 1) * hj for r, hj in zip(radii, h)]
    grids = np.meshgrid(*axes, indexing="ij")
    r2 = sum(g * g for g in grids) / (eps * eps)
    with np.errstate(divide="ignore", over="ignore"):
        ker = np.where(r2 < 1.0, np.exp(-1.0 / np.maximum(1.0 - r2, 1e-300)), 0.0)
    total = ker.sum()
    if total <= 0:
        raise ValueError("mollifier support smaller than one cell; increase eps")
    return ker / total


def regularize_mollify(
    psi: ScalarField,
    v: Union[ScalarField, float],
    eps_schedule: Sequence[float],
    A: Optional[float] = None,
    max_doublings: int = 40,
) -> Tuple[List[ScalarField], float]:
    """Mollified regularization  psi_eps = log( (e^psi * rho_eps) + A eps e^v ).

    ``rho_eps`` is a discrete radial bump of radius eps (convolution in the
    base variables only), ``v`` a bounded comparison weight.  When ``A`` is
    None it is doubled from 1 until the family is pointwise decreasing along
    the schedule; when ``A`` is given and the family is not decreasing,
    MonotonicityError is raised (the constant is too small).
    """
    from scipy.signal import fftconvolve

    eps_list = [float(e) for e in eps_schedule]
    if any(e <= 0 for e in eps_list) or any(
        e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])
    ):
        raise ValueError("eps schedule must be positive and strictly decreasing")
    vvals = v.values if isinstance(v, ScalarField) else float(v)
    ev = np.exp(vvals)
    epsi = np.exp(psi.values)
    h = psi.chart.spacings

    def family(a: float) -> List[ScalarField]:
        out = []
        for e in eps_list:
            ker = _radial_kernel(psi.chart, e)
            smoothed = np.maximum(fftconvolve(epsi, ker, mode="same"), 0.0)
            vals = np.log(smoothed + a * e * ev)
            margin = max(int(math.ceil(e / min(h))), psi.valid_margin)
            out.append(
                ScalarField(psi.chart, vals, psi.clamp_floor, psi.clamp_count, margin)
            )
        return out

    def monotone(fields: List[ScalarField]) -> bool:
        margin = max(f.valid_margin for f in fields)
        mask = psi.chart.interior_mask(margin)
        slack = 1e-12
        for f1, f2 in zip(fields, fields[1:]):
            if np.any((f2.values - f1.values)[mask] > slack):
                return False
        return True

    if A is not None:
        fields = family(float(A))
        if not monotone(fields):
            raise MonotonicityError(f"family is not decreasing at A={A}; A too small")
        return fields, float(A)
    a = 1.0
    for _ in range(max_doublings):
        fields = family(a)
        if monotone(fields):
            return fields, a
        a *= 2.0
    raise MonotonicityError(f"no monotone constant found up to A={a}")


# -- Monge-Ampere powers ---------------------------------------------------------------


@dataclass
class MAPowerReport:
    """Masses of (dd^c psi_eps)^k along a regularization schedule."""

    degree: int
    eps: List[float]
    mass_tables: List[Dict[str, float]]
    cauchy: List[float]
    converged: bool
    final_field: Optional[FormField] = None

    def last_masses(self) -> Dict[str, float]:
        return self.mass_tables[-1]


def default_eps_schedule(count: int = 9) -> List[float]:
    return [4.0 ** (-j) for j in range(count)]


def _relative_diff(a: Dict[str, float], b: Dict[str, float]) -> float:
    num = 0.0
    den = 0.0
    for key in a:
        num += abs(a[key] - b[key])
        den += abs(b[key])
    return num / max(den, 1e-300)


def ma_power(
    fields: Sequence[Tuple[float, ScalarField]],
    k: int,
    regions: Optional[Dict[str, np.ndarray]] = None,
    rel_tol: float = 0.01,
    keep_final: bool = True,
) -> MAPowerReport:
    """Bedford-Taylor power along a regularized family.

    ``fields`` is a decreasing-eps list of smooth scalar fields; for each the
    k-th dd^c power is formed and its masses over the given regions recorded.
    Converged when the last two mass tables differ by less than ``rel_tol``
    in summed relative value.
    """
    eps_list = [e for e, _ in fields]
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps schedule must be strictly decreasing")
    if k < 0:
        raise ValueError("negative power")
    chart = fields[0][1].chart
    if regions is None:
        regions = {"interior": np.ones(chart.shape, dtype=bool)}
    tables: List[Dict[str, float]] = []
    final = None
    for idx, (e, f) in enumerate(fields):
        form = ddc(f).wedge_power(k) if k > 0 else constant_form(chart, ExactForm.scalar(chart.complex_dim, 1))
        table = {}
        for name, mask in regions.items():
            table[name] = form.kahler_mass(mask)
        tables.append(table)
        if keep_final and idx == len(fields) - 1:
            final = form
    cauchy = [_relative_diff(a, b) for a, b in zip(tables, tables[1:])]
    converged = bool(cauchy and cauchy[-1] < rel_tol)
    return MAPowerReport(k, list(eps_list), tables, cauchy, converged, final)


# -- multiplicity estimation --------------------------------------------------------------


@dataclass
class LelongEstimate:
    """Ball-mass regression estimate of a multiplicity at a point."""

    point: Tuple[complex, ...]
    degree: int
    value: float
    radii: List[float]
    normalized_masses: List[float]
    slopes: List[float]
    plateau_found: bool
    secondary: Optional[float] = None
    agreement: Optional[float] = None


def lelong_estimate(
    form: FormField,
    point: Sequence[complex],
    radii: Optional[Sequence[float]] = None,
    slope_tol: float = 0.2,
    secondary_delta: Optional[float] = None,
) -> LelongEstimate:
    """Multiplicity of a (k,k) field at a point from ball masses.

    The mass of T ^ omega_std^(d-k) over B(x, r), divided by r^(2(d-k)),
    tends to the multiplicity (a coordinate hyperplane gives exactly 1, a
    unit point mass in top degree gives its weight).  The estimate is the
    average of the normalized masses over the dyadic plateau where the
    log-log slope is within ``slope_tol`` of 2(d-k); the secondary estimator
    wedges with a smoothed logarithmic kernel instead of shrinking balls.
    """
    chart = form.chart
    d = chart.complex_dim
    q = d - form.bidegree
    point = tuple(complex(p) for p in point)
    if radii is None:
        # dyadic radii from half the box down, keeping a few cells per radius
        rmax = 0.5 * min(
            w - max(abs(complex(p).real - complex(c).real), abs(complex(p).imag - complex(c).imag))
            for p, c, w in zip(point, chart.center, chart.half_widths)
        )
        hmax = max(chart.spacings)
        radii = []
        r = rmax
        while r > 3.0 * hmax and len(radii) < 8:
            radii.append(r)
            r *= 0.5
        if len(radii) < 2:
            radii = [rmax, 0.5 * rmax]
    radii = sorted((float(r) for r in radii), reverse=True)
    raw_masses = [form.kahler_mass(chart.ball_mask(point, r)) for r in radii]
    # normalized so a coordinate hyperplane gives 1 at every radius
    normalized = [m / r ** (2 * q) for m, r in zip(raw_masses, radii)]
    slopes = []
    for (r1, m1), (r2, m2) in zip(zip(radii, raw_masses), list(zip(radii, raw_masses))[1:]):
        if m1 <= 0 or m2 <= 0:
            slopes.append(float("nan"))
            continue
        slopes.append((math.log(m1) - math.log(m2)) / (math.log(r1) - math.log(r2)))
    target = 2.0 * q
    plateau_idx = [
        i for i, s in enumerate(slopes) if math.isfinite(s) and abs(s - target) <= slope_tol
    ]
    if plateau_idx:
        vals = []
        for i in plateau_idx:
            vals.extend([normalized[i], normalized[i + 1]])
        value = float(np.mean(vals))
        plateau = len(plateau_idx) >= 1
    else:
        value = float(normalized[-1])
        plateau = False
    secondary = _kernel_mass_estimate(form, point, secondary_delta)
    agreement = abs(secondary - value) if secondary is not None else None
    return LelongEstimate(
        point=point,
        degree=form.bidegree,
        value=value,
        radii=list(radii),
        normalized_masses=normalized,
        slopes=slopes,
        plateau_found=plateau,
        secondary=secondary,
        agreement=agreement,
    )


def _kernel_mass_estimate(
    form: FormField, point: Sequence[complex], delta: Optional[float]
) -> Optional[float]:
    """Secondary estimator: wedge with (dd^c log(|z - x|^2 + delta))^(d-k)
    and take the near-point mass; the kernel power carries unit mass, so this
    reads off the multiplicity without a radius fit."""
    chart = form.chart
    d = chart.complex_dim
    q = d - form.bidegree
    if q == 0:
        return None
    h = max(chart.spacings)
    delta = (5.0 * h) ** 2 if delta is None else float(delta)
    coords = chart.coordinates()
    r2 = np.zeros(chart.shape)
    for z, p in zip(coords, point):
        r2 = r2 + np.abs(z - p) ** 2
    kernel_field = ScalarField(chart, np.log(r2 + delta))
    kform = ddc(kernel_field).wedge_power(q)
    out = form.wedge(kform)
    rmax = 0.45 * min(chart.half_widths)
    raw = out.top_mass(chart.ball_mask(point, rmax))
    # at scale delta the kernel power carries mass (R^2/(R^2+delta))^q over
    # the R-ball slice of a flat model; undo that known deficit
    deficit = (rmax * rmax / (rmax * rmax + delta)) ** q
    return raw / deficit


# -- numeric series algebra ----------------------------------------------------------------


def field_algebra(chart: GridChart, rel_tol: float = 1e-8):
    """Series coefficients as FormFields of increasing bidegree; equality is
    relative-L1 on the common valid interior."""
    from .series import SeriesAlgebra

    def eq(a, b) -> bool:
        if isinstance(a, FormField) and isinstance(b, FormField):
            # a zero field carries no meaningful bidegree; only gate on the
            # declared degree when both sides are populated
            if a.bidegree != b.bidegree and a.coeffs and b.coeffs:
                return False
            margin = max(MASS_MARGIN, a.valid_margin, b.valid_margin)
            mask = chart.interior_mask(margin)
            num = 0.0
            den = 0.0
            for key in set(a.coeffs) | set(b.coeffs):
                av = np.broadcast_to(a.coeffs.get(key, np.zeros(())), chart.shape)
                bv = np.broadcast_to(b.coeffs.get(key, np.zeros(())), chart.shape)
                num += float(np.sum(np.abs(av - bv), where=mask))
                den += float(np.sum(np.abs(bv), where=mask))
            return num <= rel_tol * max(den, 1e-300)
        return False

    unit = lambda: constant_form(chart, ExactForm.scalar(chart.complex_dim, 1))

    return SeriesAlgebra(
        zero=lambda: FormField(chart, 0, {}),
        unit=unit,
        add=lambda a, b: _field_add_grade(a, b),
        mul=lambda a, b: a.wedge(b),
        eq=eq,
        neg=lambda a: a.scale(-1.0),
        is_smooth=lambda a: True,
    )


def _field_add_grade(a: FormField, b: FormField) -> FormField:
    if a.bidegree == b.bidegree:
        return a + b
    # adding a zero of mismatched declared degree: pick the nonempty one
    if not a.coeffs:
        return b
    if not b.coeffs:
        return a
    raise ValueError("cannot add fields of different bidegree")


def field_rel_l1_diff(a: FormField, b: FormField, margin: Optional[int] = None) -> float:
    """Relative L1 distance between two fields of the same bidegree over the
    common valid interior, normalized by the larger of the two L1 norms."""
    if a.bidegree != b.bidegree:
        raise ValueError("bidegree mismatch")
    chart = a.chart
    m = max(MASS_MARGIN if margin is None else margin, a.valid_margin, b.valid_margin)
    mask = chart.interior_mask(m)
    num = 0.0
    na = 0.0
    nb = 0.0
    for key in set(a.coeffs) | set(b.coeffs):
        av = np.broadcast_to(a.coeffs.get(key, np.zeros(())), chart.shape)
        bv = np.broadcast_to(b.coeffs.get(key, np.zeros(())), chart.shape)
        num += float(np.sum(np.abs(av - bv), where=mask))
        na += float(np.sum(np.abs(av), where=mask))
        nb += float(np.sum(np.abs(bv), where=mask))
    return num / max(na, nb, 1e-300)
