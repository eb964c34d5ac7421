import math

import numpy as np
import pytest

from segrelab.currents import ExactForm
from segrelab.grid import (
    FormField,
    GridChart,
    MonotonicityError,
    constant_form,
    ddc,
    ddc_form,
    default_eps_schedule,
    default_resolution,
    field_algebra,
    field_rel_l1_diff,
    lelong_estimate,
    ma_power,
    regularize_chi,
    regularize_mollify,
    sample,
    standard_kahler_field,
    symbolic_scalar,
)
from segrelab.series import GradedSeries

A = 0.3 - 0.2j


def disc_chart(resolution=64) -> GridChart:
    return GridChart(1, center=(0j,), half_widths=(1.0,), resolution=resolution)


def bidisc_chart(resolution=24) -> GridChart:
    return GridChart(2, center=(0j, 0j), half_widths=(1.0, 1.0), resolution=resolution)


def test_chart_geometry():
    c = disc_chart(16)
    assert c.shape == (16, 16)
    assert c.spacings == (0.125, 0.125)
    assert c.cell_volume() == pytest.approx(0.125 * 0.125)
    z = c.coordinates()[0]
    assert z.shape == (16, 16)
    # midpoint grid: no node sits on the box edge
    assert np.max(np.abs(z.real)) < 1.0


def test_masks():
    c = disc_chart(16)
    interior = c.interior_mask(2)
    assert interior.sum() == 12 * 12
    ball = c.ball_mask((0j,), 0.5)
    assert 0 < ball.sum() < 16 * 16
    box = c.box_mask((-0.5 - 0.5j,), (0.5 + 0.5j,))
    assert box.sum() == 8 * 8


def test_sample_symbolic_and_callable_agree():
    c = disc_chart(16)
    f1 = sample(c, lambda z: np.abs(z) ** 2)
    f2 = sample(c, "abs(x1)**2")
    assert np.allclose(f1.values, f2.values)


def test_sample_clamps_log_singularity():
    c = disc_chart(16)
    f = sample(c, "log(abs(x1)**2)")
    assert np.all(np.isfinite(f.values))


def test_sample_rejects_complex_fields():
    with pytest.raises(ValueError):
        sample(disc_chart(8), lambda z: z)


def test_symbolic_scalar_variables():
    f = symbolic_scalar("re(x1) + im(x2)", 2)
    assert f(1 + 2j, 3 + 4j) == pytest.approx(5.0)


def test_point_mass_calibration():
    # dd^c log|z - a|^2 carries unit mass on any disc around a
    c = disc_chart(64)
    f = ddc(sample(c, lambda z: np.log(np.abs(z - A) ** 2)))
    for r in (0.3, 0.5):
        assert f.top_mass(c.ball_mask((A,), r)) == pytest.approx(1.0, abs=1e-3)


def test_smooth_mass_calibration():
    # dd^c|z|^2 has unit mass on the unit disc, so r^2 on the radius-r disc
    c = disc_chart(64)
    g = ddc(sample(c, lambda z: np.abs(z) ** 2))
    assert g.top_mass(c.ball_mask((0j,), 0.8)) == pytest.approx(0.64, rel=0.01)
    assert g.top_mass(c.ball_mask((0j,), 0.5)) == pytest.approx(0.25, rel=0.015)


def test_standard_kahler_matches_ddc_of_square():
    c = disc_chart(32)
    g = ddc(sample(c, lambda z: np.abs(z) ** 2))
    assert field_rel_l1_diff(g, standard_kahler_field(c)) < 1e-10


def test_constant_form_round_trip():
    c = bidisc_chart(8)
    form = constant_form(c, ExactForm.standard_kahler(2))
    assert form.bidegree == 1
    assert form.is_hermitian()


def test_wedge_symmetry_and_powers():
    c = bidisc_chart(16)
    w = ddc(sample(c, lambda z1, z2: np.abs(z1) ** 2 + np.abs(z2) ** 2))
    sq = w.wedge(w)
    assert field_rel_l1_diff(sq, w.wedge_power(2)) < 1e-14
    assert sq.bidegree == 2
    assert sq.top_mass() > 0


def test_hermitize_is_idempotent():
    c = bidisc_chart(8)
    w = ddc(sample(c, lambda z1, z2: np.abs(z1) ** 2 - 0.3 * np.abs(z2) ** 2))
    assert w.is_hermitian()
    assert field_rel_l1_diff(w.hermitize(), w) < 1e-14


def test_ddc_form_of_closed_field_vanishes():
    c = bidisc_chart(12)
    const = constant_form(c, ExactForm.standard_kahler(2))
    out = ddc_form(const)
    for arr in out.coeffs.values():
        assert np.max(np.abs(arr)) < 1e-12


def test_lelong_estimate_of_coordinate_divisor():
    c = bidisc_chart(40)
    est = lelong_estimate(ddc(sample(c, lambda z1, z2: np.log(np.abs(z1) ** 2))), (0j, 0j))
    assert est.value == pytest.approx(1.0, abs=0.02)
    assert est.degree == 1


def test_default_schedules():
    sched = default_eps_schedule()
    assert len(sched) == 9
    assert sched[0] == 1.0
    assert all(b < a for a, b in zip(sched, sched[1:]))
    assert default_resolution(1) >= default_resolution(2) >= default_resolution(3)


def test_regularize_chi_decreases_and_floors():
    c = bidisc_chart(24)
    psi = sample(c, lambda z1, z2: np.log(np.abs(z1) ** 4))
    schedule = [4.0 ** (-j) for j in range(5)]
    family = [regularize_chi(psi, 0.0, e) for e in schedule]
    worst = max(
        float(np.max(f2.values - f1.values)) for f1, f2 in zip(family, family[1:])
    )
    assert worst <= 1e-9
    # the floor: log(e^t + eps) >= log(eps), with near-equality deep in the
    # singularity (the deepest midpoint node sits at t ~= -11)
    assert float(np.min(family[0].values)) >= math.log(schedule[0])
    mid = np.unravel_index(np.argmin(psi.values), psi.values.shape)
    assert family[0].values[mid] == pytest.approx(math.log(schedule[0]), abs=1e-4)
    with pytest.raises(ValueError):
        regularize_chi(psi, 0.0, -1.0)


def test_ma_power_converges_on_additive_family():
    c = bidisc_chart(24)
    psi = sample(c, lambda z1, z2: np.log(np.abs(z1) ** 4))
    family = [(e, regularize_chi(psi, 0.0, e)) for e in [4.0 ** (-j) for j in range(5)]]
    rep = ma_power(family, 1, rel_tol=0.02)
    assert rep.degree == 1
    assert rep.converged
    assert all(b < a for a, b in zip(rep.cauchy, rep.cauchy[1:]))
    assert rep.last_masses()["interior"] > 0


def test_ma_power_constant_family_has_zero_cauchy():
    c = disc_chart(32)
    smooth = sample(c, lambda z: np.abs(z) ** 2)
    rep = ma_power([(e, smooth) for e in (1.0, 0.5, 0.25)], 1)
    assert rep.cauchy == [0.0, 0.0]
    assert rep.converged


def test_regularize_mollify_finds_constant_and_decreases():
    c = disc_chart(48)
    psi = sample(c, lambda z: np.log(np.abs(z) ** 2 + 1.0))
    schedule = [2.0 ** (-j) for j in range(2, 5)]
    fields, const = regularize_mollify(psi, 0.0, schedule)
    assert const >= 1.0
    mask = c.interior_mask(max(f.valid_margin for f in fields))
    for f1, f2 in zip(fields, fields[1:]):
        assert float(np.max((f2.values - f1.values)[mask])) <= 1e-9


def test_regularize_mollify_rejects_undersized_constant():
    # disc averages of -|z|^2 grow as the radius shrinks, so a tiny A cannot
    # make the family monotone; the search has to raise it
    c = disc_chart(48)
    anti = sample(c, lambda z: -np.abs(z) ** 2)
    schedule = [2.0 ** (-j) for j in range(2, 5)]
    with pytest.raises(MonotonicityError):
        regularize_mollify(anti, 0.0, schedule, A=1e-12)
    _, const = regularize_mollify(anti, 0.0, schedule)
    assert const >= 1.0


def test_regularize_mollify_validates_schedule():
    c = disc_chart(16)
    psi = sample(c, lambda z: np.abs(z) ** 2)
    with pytest.raises(ValueError):
        regularize_mollify(psi, 0.0, [0.25, 0.5])


def test_field_algebra_series_inversion():
    c = disc_chart(16)
    alg = field_algebra(c)
    s = GradedSeries(alg, [alg.unit(), ddc(sample(c, lambda z: np.abs(z) ** 2))])
    one = GradedSeries.one(alg, 1)
    assert s.mul(s.invert()) == one
    assert s.invert().coefficient(1).top_mass() == pytest.approx(
        -s.coefficient(1).top_mass(), rel=1e-12
    )


def test_field_rel_l1_diff_basics():
    c = disc_chart(16)
    g = ddc(sample(c, lambda z: np.abs(z) ** 2))
    assert field_rel_l1_diff(g, g) == 0.0
    assert field_rel_l1_diff(g, g.scale(2.0)) > 0.4
