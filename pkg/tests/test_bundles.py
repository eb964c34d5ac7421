"""Engine-level tests: metric constructors, the Segre driver on small
charts, decomposition helpers, budget plumbing, and the pullback probe.

Grid resolutions here are chosen so each case runs in well under a second;
the verify suites exercise the production-size configurations.
"""

import math
import os

import numpy as np
import pytest

from segrelab.bundles import (
    BudgetClock,
    BudgetExceeded,
    BundleSpec,
    DiagonalQasMetric,
    MorphismInducedMetric,
    _ratio_plateau,
    _unit_divisor_field,
    as_smooth_entries,
    base_variables,
    decompose,
    default_regions,
    degeneracy_locus,
    direct_sum_metric,
    doubled_variables,
    metric_rank,
    pullback_check,
    s1_det_reference,
    segre_current,
    tube_multiplicity_solve,
)
from segrelab.grid import GridChart
from segrelab.polynomials import parse_polynomial


# ---------------------------------------------------------------- helpers


def test_base_and_doubled_variables():
    assert base_variables(2) == ("x1", "x2")
    assert doubled_variables(2) == ("x1", "x2", "xb1", "xb2")


def test_budget_clock_zero_budget_raises():
    with pytest.raises(BudgetExceeded):
        BudgetClock(0.0).check()


def test_budget_clock_from_env(monkeypatch):
    monkeypatch.setenv("SEGRE_LAB_BUDGET_MINUTES", "7.5")
    assert BudgetClock.from_env().minutes == 7.5
    monkeypatch.delenv("SEGRE_LAB_BUDGET_MINUTES")
    assert BudgetClock.from_env().minutes == 10.0


# ------------------------------------------------------------ validation


def test_bundle_spec_rejects_non_positive_reference():
    chart = GridChart(1, resolution=8)
    with pytest.raises(ValueError):
        BundleSpec(1, 1, chart, reference=np.array([[0.0]]))


def test_bundle_spec_rejects_chart_dimension_mismatch():
    with pytest.raises(ValueError):
        BundleSpec(2, 1, GridChart(1, resolution=8))


# ------------------------------------------------- metric constructions


def test_metric_rank_and_direct_sum():
    flat = MorphismInducedMetric.from_strings([["1"]], 1)
    assert metric_rank(flat) == 1
    ds = direct_sum_metric(flat, flat, 1)
    assert metric_rank(ds) == 2
    assert isinstance(ds, MorphismInducedMetric)


def test_as_smooth_entries_preserves_rank():
    m = MorphismInducedMetric.from_strings([["x1", "0"], ["0", "x2"]], 2)
    sm = as_smooth_entries(m, 2)
    assert metric_rank(sm) == 2


def test_degeneracy_locus_of_diagonal_morphism():
    m = MorphismInducedMetric.from_strings([["x1", "0"], ["0", "x2"]], 2)
    loc = degeneracy_locus(m, 2)
    assert loc["kind"] == "morphism"
    assert loc["generic_rank"] == 2
    factors = sorted((str(p), k) for p, k in loc["divisor_factors"])
    assert factors == [("x1", 1), ("x2", 1)]
    assert loc["points_complete"]
    assert not loc["degenerate_everywhere"]


# ------------------------------------------------------ plateau detector


def test_ratio_plateau_picks_flat_stretch():
    # leading pair agrees within 5%, the tail collapses under the
    # regularization width: the plateau is the last entry of the run
    assert _ratio_plateau([1.9995, 1.9923, 1.8842, 1.02]) == 1.9923


def test_ratio_plateau_prefers_latest_run_on_ties():
    assert _ratio_plateau([1.0, 1.0, 5.0, 3.0, 3.0]) == 3.0


def test_ratio_plateau_tail_run():
    assert _ratio_plateau([2.4, 1.7, 1.1, 1.01, 1.004]) == 1.004


def test_ratio_plateau_fallback_and_edge_cases():
    # nothing flat: fall back to the final entry
    assert _ratio_plateau([3.0, 2.0]) == 2.0
    assert _ratio_plateau([1.5]) == 1.5
    assert math.isnan(_ratio_plateau([]))


def test_tube_multiplicity_solve_recovers_coefficients():
    chart = GridChart(2, resolution=24)
    p1 = parse_polynomial("x1", variables=("x1", "x2"))
    p2 = parse_polynomial("x2", variables=("x1", "x2"))
    field = _unit_divisor_field(chart, p1).scale(3.0) + _unit_divisor_field(chart, p2)
    sol = tube_multiplicity_solve(field, ["x1", "x2"], radius=0.5)
    assert sol == pytest.approx([3.0, 1.0], abs=1e-6)


# -------------------------------------------------------- Segre driver


def test_flat_metric_has_zero_higher_degrees():
    flat = MorphismInducedMetric.from_strings([["1"]], 1)
    spec = BundleSpec(1, 1, GridChart(1, resolution=16))
    res = segre_current(spec, flat, degrees=[0, 1],
                        eps_schedule=[0.25, 0.0625], jobs=1)
    assert res.mass_tables[1][-1]["full"] == 0.0
    assert res.s0_deviation == 0.0
    assert res.converged[0] and res.converged[1]
    # two eps values are not enough for a geometric tail
    assert res.richardson(1) is None


def test_quartic_divisor_weight_recovers_multiplicity_two():
    """exp weight |x1|^4 on a line bundle over a disc: the limit current is
    2 [x1 = 0].  The weight smooths over a width of eps^(1/4), so the
    schedule has to run deep enough for that width to fall under the tube
    radii before the plateau appears."""
    chart = GridChart(1, center=(0j,), half_widths=(1.0,), resolution=64)
    spec = BundleSpec(1, 1, chart)
    metric = DiagonalQasMetric.from_descriptors([(2, ["x1"], 0.0)], 1)
    res = segre_current(spec, metric, degrees=[0, 1],
                        eps_schedule=[4.0 ** (-j) for j in range(9)],
                        probe_points=[(0j,)], jobs=1)
    assert res.converged[1]
    lel = [l for l in res.lelong if l.degree == 1]
    assert lel and lel[0].value == pytest.approx(2.0, abs=0.1)
    decompose(res, metric)
    block = res.decomposition[1]
    fixed = block["fixed"]
    assert len(fixed) == 1 and fixed[0]["cycle"] == "x1"
    assert fixed[0]["estimate"] == pytest.approx(2.0, abs=0.05)
    assert fixed[0]["multiplicity"] == 2
    assert abs(block["moving_mass"]) < 0.01


def test_block_diagonal_metric_keeps_s2_small():
    # diag(x1*x2, 1) is a direct sum with a flat line factor, so the
    # degree-2 mass is discretization noise, not a point mass
    metric = MorphismInducedMetric.from_strings([["x1*x2", "0"], ["0", "1"]], 2)
    spec = BundleSpec(2, 2, GridChart(2, resolution=16))
    res = segre_current(spec, metric, degrees=[2], eps_schedule=[0.0625], jobs=1)
    assert abs(res.mass_tables[2][-1]["full"]) < 0.05


def test_s1_det_reference_vanishes_for_flat_metric():
    flat = MorphismInducedMetric.from_strings([["1"]], 1)
    spec = BundleSpec(1, 1, GridChart(1, resolution=16))
    assert s1_det_reference(spec, flat, 0.25).kahler_mass() == 0.0


def test_default_regions_cover_chart():
    chart = GridChart(1, resolution=8)
    regions = default_regions(chart)
    assert set(regions) == {"full", "q_pp", "q_pm", "q_mp", "q_mm"}
    quad_union = sum(regions[k].astype(int) for k in regions if k != "full")
    assert np.array_equal(quad_union.astype(bool), regions["full"])
    assert quad_union.max() == 1


# ------------------------------------------------------------- pullback


def test_pullback_along_axis_matches_prediction():
    metric = MorphismInducedMetric.from_strings([["x1", "0"], ["0", "x2"]], 2)
    spec = BundleSpec(2, 2, GridChart(2, resolution=16))
    rep = pullback_check(spec, metric, ["t", "0"], resolution=48, jobs=1)
    assert rep["predicted_lelong"] == 1
    assert rep["measured_lelong"] == pytest.approx(1.0, abs=0.1)
    assert rep["matches"]
    assert rep["branch"] == "regularized"


def test_pullback_of_dead_curve_uses_reference_branch():
    # a curve mapping into the common zero locus kills the metric, which
    # cannot be regularized from below; the probe reports the flat branch
    metric = MorphismInducedMetric.from_strings([["x1", "0"], ["0", "x2"]], 2)
    spec = BundleSpec(2, 2, GridChart(2, resolution=16))
    rep = pullback_check(spec, metric, ["0", "0"], resolution=32, jobs=1)
    assert rep["branch"] == "reference"
    assert rep["predicted_lelong"] == 0
    assert rep["measured_lelong"] == 0.0
    assert rep["matches"]
