"""Scenario document parsing: the builtin documents, the rejection paths,
and the file round trip."""

import json
from fractions import Fraction

import pytest

from segrelab.scenarios import (
    Scenario,
    ScenarioError,
    builtin_scenarios,
    load_scenario,
    scenario_from_dict,
)


def _minimal(**extra):
    doc = {
        "name": "t",
        "base_dim": 1,
        "rank": 1,
        "metric": {"kind": "morphism", "rows": [["1"]]},
    }
    doc.update(extra)
    return doc


def test_builtin_documents_all_parse():
    docs = builtin_scenarios()
    assert set(docs) == {
        "chernex",
        "chernex_small",
        "flat_rank2",
        "line_divisor",
        "whitney_sum",
    }
    for key, doc in docs.items():
        sc = scenario_from_dict(doc)
        assert isinstance(sc, Scenario)
        assert sc.name == key
        assert sc.raw == doc


def test_builtin_shapes():
    docs = builtin_scenarios()
    cx = scenario_from_dict(docs["chernex"])
    assert (cx.base_dim, cx.rank) == (2, 2)
    assert cx.degrees == [0, 1, 2]
    assert len(cx.curves) == 2 and all(len(c) == 2 for c in cx.curves)
    assert cx.fiber_rule is not None and cx.fiber_rule.n_angular == 6
    line = scenario_from_dict(docs["line_divisor"])
    # no explicit schedule: the engine default applies at run time
    assert line.eps_schedule is None
    assert line.spec.chart.resolution == (128,)
    ws = scenario_from_dict(docs["whitney_sum"])
    assert ws.rank == 3 and ws.decomposition is False


def test_defaults_and_seed():
    sc = scenario_from_dict(_minimal())
    assert sc.seed == 20260814
    assert sc.decomposition is True
    assert sc.chern_mode == "series"
    assert sc.budget_minutes is None
    assert sc.probe_points == [] and sc.curves == []


def test_fraction_exponent_parses_from_string():
    sc = scenario_from_dict(
        _minimal(metric={
            "kind": "diagonal",
            "weights": [{"exponent": "3/2", "generators": ["x1"]}],
        })
    )
    assert sc.metric.weights[0].exponent == Fraction(3, 2)


def test_complex_entries_accept_pairs():
    sc = scenario_from_dict(
        _minimal(chart={"center": [[0.5, -0.25]]}, probe_points=[[[0.5, -0.25]]])
    )
    assert sc.spec.chart.center[0] == 0.5 - 0.25j
    assert sc.probe_points == [(0.5 - 0.25j,)]


def test_degrees_deduplicate_and_sort():
    sc = scenario_from_dict(_minimal(degrees=[1, 0, 1]))
    assert sc.degrees == [0, 1]


@pytest.mark.parametrize(
    "doc",
    [
        {"base_dim": 1, "rank": 1, "metric": {"kind": "morphism", "rows": [["1"]]}},
        _minimal(zzz=1),
        _minimal(metric={"kind": "weird"}),
        _minimal(metric={"kind": "morphism", "rows": [["x2"]]}),
        _minimal(rank=2),
        _minimal(eps_schedule=[0.0]),
        _minimal(eps_schedule=[]),
        _minimal(degrees=[5]),
        _minimal(probe_points=[[0, 0]]),
        _minimal(curves=[["t", "t"]]),
        _minimal(chern_mode="bogus"),
        _minimal(reference_metric=[[0.0]]),
        _minimal(reference_metric=[[1.0, 0.0]]),
        _minimal(chart={"half_widths": [-1.0]}),
        _minimal(chart={"center": [0, 0]}),
        _minimal(fiber_rule={"nodes": 4}),
        "not a dict",
    ],
)
def test_invalid_documents_raise(doc):
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_load_scenario_round_trip(tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(builtin_scenarios()["flat_rank2"]))
    sc = load_scenario(str(path))
    assert sc.name == "flat_rank2"
    assert sc.eps_schedule == [1.0, 0.25, 0.0625]


def test_load_scenario_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ScenarioError):
        load_scenario(str(path))
