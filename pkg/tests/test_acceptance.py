"""Acceptance gates, one test per gate.

Each test runs (or reuses) a verification suite and asserts the frozen
targets plus the wall-clock cap for that gate, so `pytest -v` prints one
pass/fail line per gate.  Suites are cached per session: the worked
example feeds three gates but runs once.

These are the expensive tests in the tree (the worked example alone is
several minutes of single-core work); everything else in tests/ stays
fast so the heavy failures are isolated here.
"""

from typing import Dict

import pytest

from segrelab.verify import run_suite

_CACHE: Dict[str, Dict[str, dict]] = {}


def suite(name: str) -> Dict[str, dict]:
    if name not in _CACHE:
        _CACHE[name] = {c["name"]: c for c in run_suite(name, jobs=1)}
    return _CACHE[name]


def get(checks: Dict[str, dict], name: str) -> dict:
    assert name in checks, f"missing check {name!r}; got {sorted(checks)}"
    return checks[name]


def test_exact_series_inverses_hold_on_random_draws():
    checks = suite("inversion")
    for side in ("left", "right", "double", "masked_empty"):
        assert get(checks, f"inverse_{side}_failures")["measured"] == 0
    assert get(checks, "inversion_wall_seconds")["measured"] <= 5.0


def test_unit_point_mass_calibration():
    checks = suite("regularization")
    for r in (0.4, 0.6):
        c = get(checks, f"point_mass_disc_{r}")
        assert c["measured"] == pytest.approx(1.0, abs=0.02)
    emb = get(checks, "divisor_density_embedded")
    assert emb["measured"] == pytest.approx(1.0, abs=0.05)
    wall = get(checks, "point_mass_disc_0.6")["_seconds"] + emb["_seconds"]
    assert wall <= 30.0


def test_quartic_weight_masses_converge_monotonically():
    checks = suite("regularization")
    assert get(checks, "additive_pointwise_decrease")["measured"] <= 1e-9
    cauchy = get(checks, "additive_mass_cauchy")
    assert cauchy["measured"] <= 0.01
    assert cauchy["converged"] is True
    assert cauchy["_seconds"] <= 120.0


def test_mollifier_search_terminates_and_decreases():
    checks = suite("regularization")
    for weight in ("log_one_plus_sq", "square"):
        assert get(checks, f"mollify_{weight}_constant_found")["measured"] is True
        assert get(checks, f"mollify_{weight}_pointwise_decrease")["measured"] <= 1e-9
        assert get(checks, f"mollify_{weight}_l1_decreasing")["measured"] <= 1e-12
    assert get(checks, "mollify_wall_seconds")["measured"] <= 60.0


def test_worked_diagonal_example_reproduces_frozen_targets():
    checks = suite("chernex")
    assert get(checks, "s1_lelong_at_origin")["measured"] == pytest.approx(2.0, abs=0.2)
    for gen in ("x1", "x2"):
        assert get(checks, f"s1_multiplicity_{gen}")["measured"] == pytest.approx(
            1.0, abs=0.1
        )
    assert get(checks, "s2_ball_mass_at_origin")["measured"] == pytest.approx(
        1.0, abs=0.1
    )
    assert get(checks, "c2_point_mass")["measured"] == pytest.approx(1.0, abs=0.1)
    assert get(checks, "c2_degeneracy_point_mass")["measured"] == pytest.approx(
        -1.0, abs=0.1
    )
    assert get(checks, "exact_layer_matches_reference")["measured"] is True
    assert get(checks, "worked_example_wall_seconds")["measured"] <= 600.0


def test_fiber_integrated_s1_matches_determinant_oracle():
    checks = suite("chernex")
    assert get(checks, "det_oracle_worst_rel_l1")["measured"] <= 0.03
    assert get(checks, "det_oracle_wall_seconds")["measured"] <= 180.0


def test_direct_sum_masses_match_series_product():
    checks = suite("whitney")
    assert get(checks, "sum_vs_product_degree_1")["measured"] <= 0.03
    assert get(checks, "sum_vs_product_degree_2")["measured"] <= 0.03
    assert get(checks, "whitney_converged")["measured"] is True
    assert get(checks, "whitney_wall_seconds")["measured"] <= 600.0


def test_monomial_scenarios_report_integer_multiplicities():
    checks = suite("integrality")
    failed = [n for n, c in checks.items() if not c["passed"]]
    assert failed == []
    assert get(checks, "integrality_wall_seconds")["measured"] <= 900.0


def test_segre_masses_independent_of_reference_metric():
    checks = suite("chernex")
    assert get(checks, "reference_independence_worst_rel")["measured"] <= 0.02


def test_pullback_to_axis_curve_has_unit_multiplicity():
    checks = suite("pullback")
    assert get(checks, "axis_curve_lelong")["measured"] == pytest.approx(1.0, abs=0.1)
    assert get(checks, "axis_curve_matches")["measured"] is True
    assert get(checks, "pullback_wall_seconds")["measured"] <= 60.0


def test_polynomial_oracles_agree_with_each_other():
    checks = suite("oracles")
    assert get(checks, "bezout_sum_failures")["measured"] == 0
    assert get(checks, "vanishing_order_split_failures")["measured"] == 0
    assert get(checks, "oracles_wall_seconds")["measured"] <= 10.0
