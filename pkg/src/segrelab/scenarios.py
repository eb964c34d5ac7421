"""Scenario documents: one JSON object per computation request.

A scenario pins everything a run depends on (chart, metric, schedule,
probes, seed), so identical documents reproduce identical reports.
Polynomial strings use the variables x1..xn with rational (p/q) and
imaginary (i) literals; complex numbers elsewhere in the document are
plain numbers or [re, im] pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bundles import (
    BundleSpec,
    DiagonalQasMetric,
    FiberRule,
    Metric,
    MorphismInducedMetric,
    SmoothMetric,
)
from .grid import GridChart, default_resolution


class ScenarioError(ValueError):
    """A document that does not parse to a valid computation request."""


_TOP_KEYS = {
    "name",
    "base_dim",
    "rank",
    "chart",
    "metric",
    "reference_metric",
    "eps_schedule",
    "degrees",
    "probe_points",
    "curves",
    "chern_mode",
    "decomposition",
    "budget_minutes",
    "seed",
    "fiber_rule",
}


def _complex_entry(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ScenarioError(f"{where}: expected a number or [re, im] pair, got {v!r}")


@dataclass
class Scenario:
    """A parsed document plus the engine objects it denotes."""

    name: str
    spec: BundleSpec
    metric: Metric
    eps_schedule: Optional[List[float]]
    degrees: Optional[List[int]]
    probe_points: List[Tuple[complex, ...]]
    curves: List[List[str]]
    chern_mode: str = "series"
    decomposition: bool = True
    budget_minutes: Optional[float] = None
    seed: int = 20260814
    fiber_rule: Optional[FiberRule] = None
    raw: dict = dc_field(default_factory=dict)

    @property
    def base_dim(self) -> int:
        return self.spec.base_dim

    @property
    def rank(self) -> int:
        return self.spec.rank


def _parse_chart(doc: dict, base_dim: int) -> GridChart:
    if not isinstance(doc, dict):
        raise ScenarioError("chart must be an object")
    center = doc.get("center", [0.0] * base_dim)
    half = doc.get("half_widths", [1.0] * base_dim)
    res = doc.get("resolution", default_resolution(base_dim))
    if len(center) != base_dim or len(half) != base_dim:
        raise ScenarioError("chart center/half_widths arity must equal base_dim")
    center_c = tuple(_complex_entry(c, "chart.center") for c in center)
    half_f = tuple(float(h) for h in half)
    if any(h <= 0 for h in half_f):
        raise ScenarioError("chart half widths must be positive")
    if isinstance(res, list):
        res = tuple(int(r) for r in res)
    else:
        res = int(res)
    return GridChart(base_dim, center=center_c, half_widths=half_f, resolution=res)


def _parse_metric(doc: dict, base_dim: int) -> Metric:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ScenarioError("metric must be an object with a 'kind'")
    kind = doc["kind"]
    try:
        if kind == "morphism":
            return MorphismInducedMetric.from_strings(doc["rows"], base_dim)
        if kind == "smooth":
            return SmoothMetric.from_strings(doc["entries"], base_dim)
        if kind == "diagonal":
            descs = []
            for w in doc["weights"]:
                exp = w.get("exponent", 1)
                if isinstance(exp, str):
                    exp = Fraction(exp)
                descs.append((exp, w["generators"], float(w.get("smooth", 0.0))))
            return DiagonalQasMetric.from_descriptors(descs, base_dim)
    except ScenarioError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ScenarioError(f"metric does not parse: {exc}") from exc
    raise ScenarioError(f"unknown metric kind: {kind!r}")


def _parse_fiber_rule(doc: Optional[dict], seed: int) -> Optional[FiberRule]:
    if doc is None:
        return None
    if not isinstance(doc, dict):
        raise ScenarioError("fiber_rule must be an object")
    allowed = {"kind", "n_radial", "n_angular", "u_floor"}
    extra = set(doc) - allowed
    if extra:
        raise ScenarioError(f"unknown fiber_rule keys: {sorted(extra)}")
    return FiberRule(
        kind=doc.get("kind", "polar"),
        n_radial=int(doc.get("n_radial", 8)),
        n_angular=int(doc.get("n_angular", 8)),
        u_floor=None if doc.get("u_floor") is None else float(doc["u_floor"]),
        seed=seed,
    )


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ScenarioError(f"unknown scenario keys: {sorted(extra)}")
    for key in ("name", "base_dim", "rank", "metric"):
        if key not in doc:
            raise ScenarioError(f"scenario is missing required key {key!r}")
    name = str(doc["name"])
    base_dim = int(doc["base_dim"])
    rank = int(doc["rank"])
    if base_dim < 1 or rank < 1:
        raise ScenarioError("base_dim and rank must be positive")

    chart = _parse_chart(doc.get("chart", {}), base_dim)
    reference = None
    if doc.get("reference_metric") is not None:
        ref_rows = doc["reference_metric"]
        if len(ref_rows) != rank or any(len(r) != rank for r in ref_rows):
            raise ScenarioError("reference_metric must be a rank x rank matrix")
        reference = np.array(
            [[_complex_entry(e, "reference_metric") for e in row] for row in ref_rows]
        )
    try:
        spec = BundleSpec(base_dim, rank, chart, reference=reference)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    metric = _parse_metric(doc["metric"], base_dim)
    try:
        metric.validate(spec)
    except ValueError as exc:
        raise ScenarioError(f"metric does not fit the bundle: {exc}") from exc

    eps = doc.get("eps_schedule")
    if eps is not None:
        eps = [float(e) for e in eps]
        if not eps or any(e <= 0 for e in eps):
            raise ScenarioError("eps_schedule entries must be positive")
    degrees = doc.get("degrees")
    if degrees is not None:
        degrees = sorted({int(k) for k in degrees})
        if any(k < 0 or k > base_dim for k in degrees):
            raise ScenarioError("degrees must lie in 0..base_dim")
    probes = [
        tuple(_complex_entry(c, "probe_points") for c in pt)
        for pt in doc.get("probe_points", [])
    ]
    for pt in probes:
        if len(pt) != base_dim:
            raise ScenarioError("probe points must have base_dim coordinates")
    curves = [[str(c) for c in curve] for curve in doc.get("curves", [])]
    for curve in curves:
        if len(curve) != base_dim:
            raise ScenarioError("curves must have base_dim components")
    mode = doc.get("chern_mode", "series")
    if mode not in ("series", "alternative_Z"):
        raise ScenarioError(f"unknown chern_mode: {mode!r}")
    seed = int(doc.get("seed", 20260814))
    budget = doc.get("budget_minutes")

    return Scenario(
        name=name,
        spec=spec,
        metric=metric,
        eps_schedule=eps,
        degrees=degrees,
        probe_points=probes,
        curves=curves,
        chern_mode=mode,
        decomposition=bool(doc.get("decomposition", True)),
        budget_minutes=None if budget is None else float(budget),
        seed=seed,
        fiber_rule=_parse_fiber_rule(doc.get("fiber_rule"), seed),
        raw=doc,
    )


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def builtin_scenarios() -> Dict[str, dict]:
    """Ready-made documents: the worked diagonal example at two sizes, a
    flat bundle, a one-variable divisor weight, and the smooth-plus-
    singular direct sum."""
    chernex = {
        "name": "chernex",
        "base_dim": 2,
        "rank": 2,
        "chart": {"center": [0, 0], "half_widths": [1.0, 1.0], "resolution": 48},
        "metric": {"kind": "morphism", "rows": [["x1", "0"], ["0", "x2"]]},
        "eps_schedule": [4.0**-j for j in range(5)],
        "degrees": [0, 1, 2],
        "probe_points": [[0, 0]],
        "curves": [["t", "0"], ["t", "t"]],
        "fiber_rule": {"kind": "polar", "n_radial": 8, "n_angular": 6},
    }
    chernex_small = dict(chernex)
    chernex_small["name"] = "chernex_small"
    chernex_small["chart"] = {
        "center": [0, 0],
        "half_widths": [1.0, 1.0],
        "resolution": 24,
    }
    chernex_small["eps_schedule"] = [4.0**-j for j in range(6)]
    flat = {
        "name": "flat_rank2",
        "base_dim": 2,
        "rank": 2,
        "chart": {"center": [0, 0], "half_widths": [1.0, 1.0], "resolution": 16},
        "metric": {"kind": "morphism", "rows": [["1", "0"], ["0", "1"]]},
        "eps_schedule": [1.0, 0.25, 0.0625],
        "degrees": [0, 1],
        "probe_points": [],
        "decomposition": False,
    }
    line = {
        "name": "line_divisor",
        "base_dim": 1,
        "rank": 1,
        "chart": {"center": [0], "half_widths": [1.0], "resolution": 128},
        "metric": {
            "kind": "diagonal",
            "weights": [{"exponent": 2, "generators": ["x1"], "smooth": 0.0}],
        },
        "degrees": [0, 1],
        "probe_points": [[0]],
    }
    whitney = {
        "name": "whitney_sum",
        "base_dim": 2,
        "rank": 3,
        "chart": {"center": [0, 0], "half_widths": [1.0, 1.0], "resolution": 14},
        "metric": {
            "kind": "smooth",
            "entries": [
                ["1 + x1*xb1", "0", "0"],
                ["0", "x1*xb1", "0"],
                ["0", "0", "x2*xb2"],
            ],
        },
        "eps_schedule": [4.0**-j for j in range(5)],
        "degrees": [0, 1, 2],
        "probe_points": [[0, 0]],
        "decomposition": False,
        "fiber_rule": {"kind": "polar", "n_radial": 8, "n_angular": 6},
    }
    return {
        "chernex": chernex,
        "chernex_small": chernex_small,
        "flat_rank2": flat,
        "line_divisor": line,
        "whitney_sum": whitney,
    }
