"""Segre and Chern currents of singular Hermitian metrics.

Two layers share one vocabulary: an exact layer (Gaussian-rational
polynomials, quasi-cycles, truncated graded series) and a numeric layer
(grid charts, regularized Monge-Ampere powers, fiber integration over the
projectivized bundle).  ``segre_current`` and ``chern_current`` drive the
numeric layer; ``chernex_reference`` and friends supply exact answers to
hold it against; the ``verify`` suites bundle the frozen comparisons.
"""

from .exactnum import QQi, rat_parse, rat_str
from .polynomials import Polynomial, factor_gaussian, parse_polynomial, resultant
from .currents import (
    QasDescriptor,
    QuasiCycle,
    UnsupportedExactCase,
    ddc_qas_wedge,
    siu_decompose,
)
from .series import GradedSeries, chern_Z, chern_series, cycle_algebra, scalar_algebra
from .grid import (
    FormField,
    GridChart,
    MonotonicityError,
    ScalarField,
    ddc,
    ddc_form,
    default_eps_schedule,
    field_algebra,
    lelong_estimate,
    ma_power,
    regularize_chi,
    regularize_mollify,
    sample,
    standard_kahler_field,
)
from .bundles import (
    BudgetClock,
    BudgetExceeded,
    BundleSpec,
    ChernResult,
    DiagonalQasMetric,
    FiberRule,
    MorphismInducedMetric,
    SegreResult,
    SmoothMetric,
    chern_current,
    decompose,
    degeneracy_locus,
    direct_sum_metric,
    pullback_check,
    s1_det_reference,
    segre_current,
    segre_via_product,
)
from .oracles import (
    chernex_reference,
    common_zeros_exact,
    intersection_number,
    monomial_lelong,
    poincare_lelong,
    pullback_s1_prediction,
    vanishing_order,
)
from .scenarios import (
    Scenario,
    ScenarioError,
    builtin_scenarios,
    load_scenario,
    scenario_from_dict,
)
from .verify import SUITES, all_passed, run_all, run_suite

__version__ = "0.1.0"

__all__ = [
    "QQi",
    "rat_parse",
    "rat_str",
    "Polynomial",
    "factor_gaussian",
    "parse_polynomial",
    "resultant",
    "QasDescriptor",
    "QuasiCycle",
    "UnsupportedExactCase",
    "ddc_qas_wedge",
    "siu_decompose",
    "GradedSeries",
    "chern_Z",
    "chern_series",
    "cycle_algebra",
    "scalar_algebra",
    "FormField",
    "GridChart",
    "MonotonicityError",
    "ScalarField",
    "ddc",
    "ddc_form",
    "default_eps_schedule",
    "field_algebra",
    "lelong_estimate",
    "ma_power",
    "regularize_chi",
    "regularize_mollify",
    "sample",
    "standard_kahler_field",
    "BudgetClock",
    "BudgetExceeded",
    "BundleSpec",
    "ChernResult",
    "DiagonalQasMetric",
    "FiberRule",
    "MorphismInducedMetric",
    "SegreResult",
    "SmoothMetric",
    "chern_current",
    "decompose",
    "degeneracy_locus",
    "direct_sum_metric",
    "pullback_check",
    "s1_det_reference",
    "segre_current",
    "segre_via_product",
    "chernex_reference",
    "common_zeros_exact",
    "intersection_number",
    "monomial_lelong",
    "poincare_lelong",
    "pullback_s1_prediction",
    "vanishing_order",
    "Scenario",
    "ScenarioError",
    "builtin_scenarios",
    "load_scenario",
    "scenario_from_dict",
    "SUITES",
    "all_passed",
    "run_all",
    "run_suite",
    "__version__",
]
