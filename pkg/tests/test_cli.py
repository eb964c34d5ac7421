"""Command line behavior: exit codes, report determinism, serialization.

The heavy scenario configurations live in the verify suites; these tests
stick to the one-variable builtin so each invocation stays under a second.
"""

import dataclasses
import json
import math
import os
from fractions import Fraction

import numpy as np
import pytest

from segrelab.cli import json_ready, main
from segrelab.scenarios import builtin_scenarios


def _read(out_dir, name):
    with open(os.path.join(str(out_dir), name)) as fh:
        return json.load(fh)


# ---------------------------------------------------------- serialization


def test_json_ready_scalars():
    assert json_ready(1 + 2j) == [1.0, 2.0]
    assert json_ready(float("nan")) is None
    assert json_ready(float("inf")) is None
    assert json_ready(np.float64(0.5)) == 0.5
    assert json_ready(np.int32(3)) == 3
    assert json_ready(np.bool_(True)) is True
    assert json_ready(Fraction(1, 3)) == "1/3"


def test_json_ready_drops_underscore_keys():
    payload = {"keep": [1, {"_hidden": 2, "shown": 3}], "_top": 4}
    assert json_ready(payload) == {"keep": [1, {"shown": 3}]}


def test_json_ready_handles_dataclasses_and_rejects_objects():
    @dataclasses.dataclass
    class Row:
        value: complex
        _elapsed: float = 0.0

    assert json_ready(Row(1j)) == {"value": [0.0, 1.0]}
    with pytest.raises(TypeError):
        json_ready(object())


# ------------------------------------------------------------ subcommands


def test_segre_subcommand_writes_deterministic_report(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert main(["segre", "--scenario", "line_divisor", "--out", str(d1)]) == 0
    assert main(["segre", "--scenario", "line_divisor", "--out", str(d2)]) == 0
    raw1 = (d1 / "line_divisor_segre.json").read_bytes()
    raw2 = (d2 / "line_divisor_segre.json").read_bytes()
    assert raw1 == raw2
    report = json.loads(raw1)
    assert report["converged"] == {"0": True, "1": True}
    assert not any(k.startswith("_") for k in report)
    # convergence tables and the multiplicity probe land next to the JSON
    for name in (
        "line_divisor_s0_convergence.csv",
        "line_divisor_s1_convergence.csv",
        "line_divisor_lelong.csv",
    ):
        assert (d1 / name).exists()


def test_decompose_subcommand_reports_fixed_cycle(tmp_path):
    assert main(["decompose", "--scenario", "line_divisor", "--out", str(tmp_path)]) == 0
    report = _read(tmp_path, "line_divisor_decompose.json")
    fixed = report["decomposition"]["1"]["fixed"]
    assert len(fixed) == 1
    assert fixed[0]["cycle"] == "x1"
    assert fixed[0]["multiplicity"] == 2
    assert abs(report["decomposition"]["1"]["moving_mass"]) < 0.01


def test_lelong_subcommand_estimates_multiplicity(tmp_path):
    assert main(["lelong", "--scenario", "line_divisor", "--out", str(tmp_path)]) == 0
    report = _read(tmp_path, "line_divisor_lelong.json")
    est = report["estimates"][0]
    assert est["degree"] == 1
    assert est["value"] == pytest.approx(2.0, abs=0.1)
    assert est["plateau_found"] is True


def test_chern_subcommand_runs_both_modes(tmp_path):
    assert main(["chern", "--scenario", "line_divisor", "--out", str(tmp_path)]) == 0
    report = _read(tmp_path, "line_divisor_chern.json")
    assert sorted(report["modes"]) == ["alternative_Z", "series"]
    series = report["modes"]["series"]
    # a double divisor weight on a line bundle: c_1 = -s_1 = -2 [x1 = 0]
    assert series["mass_tables"]["1"]["full"] == pytest.approx(-2.0, abs=0.01)
    assert "exact_chern" in series and "exact_segre" in series
    assert (tmp_path / "line_divisor_chern_diff.csv").exists()


def test_verify_subcommand_reports_suite(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert main(["verify", "--suite", "inversion", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert {c["name"] for c in report["suites"]["inversion"]} >= {
        "inverse_left_failures",
        "inverse_right_failures",
        "inverse_double_failures",
    }
    printed = capsys.readouterr().out
    assert "PASS inversion/" in printed


def test_budget_overrun_flushes_stub_and_exits_two(tmp_path):
    doc = dict(builtin_scenarios()["line_divisor"])
    doc["budget_minutes"] = 0.0
    path = tmp_path / "starved.json"
    path.write_text(json.dumps(doc))
    assert main(["segre", "--scenario", str(path), "--out", str(tmp_path)]) == 2
    stub = _read(tmp_path, "line_divisor_segre.json")
    assert stub["budget_exceeded"] is True
    assert "error" in stub


# ------------------------------------------------------------ error paths


@pytest.mark.parametrize(
    "argv",
    [
        ["segre", "--scenario", "no_such_builtin"],
        ["segre", "--scenario", "line_divisor", "--eps", "0.1,0.5"],
        ["segre", "--scenario", "line_divisor", "--eps", "-1.0"],
        ["verify", "--suite", "bogus"],
        ["lelong", "--scenario", "flat_rank2"],
    ],
)
def test_configuration_errors_exit_one(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)] if argv[0] != "verify" else argv) == 1
