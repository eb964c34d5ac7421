"""Command line front end.

Subcommands: ``segre``, ``chern``, ``lelong``, ``decompose`` run one scenario
document each and write JSON reports plus CSV tables for plotting; ``verify``
runs the named check suites.  Exit codes: 0 on success/convergence, 2 when a
computation did not converge or a check failed (results are still written),
1 on a configuration error.

Reports are deterministic: the same scenario and seed produce byte-identical
JSON.  Keys starting with an underscore carry wall-clock timings internally
and are stripped before writing, complex numbers serialize as [re, im] pairs,
non-finite floats as null.  SEGRE_LAB_BUDGET_MINUTES caps the wall time per
scenario (default 10); on an exceeded budget the partial report is flushed
and the exit code is 2.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bundles import (
    BudgetClock,
    BudgetExceeded,
    BundleSpec,
    chern_current,
    decompose,
    segre_current,
)
from .currents import QuasiCycle, UnsupportedExactCase
from .exactnum import QQi
from .grid import GridChart
from .scenarios import Scenario, ScenarioError, builtin_scenarios, load_scenario, scenario_from_dict
from . import verify as verify_mod


# -- serialization -----------------------------------------------------------------


def json_ready(obj):
    """Recursive conversion to plain JSON types.

    Underscore-prefixed dict keys are dropped (timing and other
    run-to-run-varying data), complex becomes [re, im], non-finite floats
    become null, exact scalars become strings.
    """
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return json_ready(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [json_ready(float(obj.real)), json_ready(float(obj.imag))]
    if isinstance(obj, (Fraction, QQi)):
        return str(obj)
    if isinstance(obj, QuasiCycle):
        try:
            return obj.to_json()
        except UnsupportedExactCase:
            return str(obj)
    if isinstance(obj, dict):
        return {
            str(k): json_ready(v)
            for k, v in obj.items()
            if not (isinstance(k, str) and k.startswith("_"))
        }
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        return json_ready(dataclasses.asdict(obj))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(path: str, payload: dict) -> None:
    text = json.dumps(json_ready(payload), sort_keys=True, indent=2)
    with open(path, "w") as fh:
        fh.write(text + "\n")


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- scenario loading and overrides ----------------------------------------------------


def _load_scenario(ref: str) -> Scenario:
    builtins = builtin_scenarios()
    if ref in builtins:
        return scenario_from_dict(builtins[ref])
    if not os.path.exists(ref):
        raise ScenarioError(
            f"{ref!r} is neither a scenario file nor a builtin "
            f"(builtins: {', '.join(sorted(builtins))})"
        )
    return load_scenario(ref)


def _apply_overrides(scn: Scenario, args: argparse.Namespace) -> Scenario:
    updates = {}
    if getattr(args, "grid", None):
        chart = scn.spec.chart
        new_chart = GridChart(
            chart.complex_dim,
            center=chart.center,
            half_widths=chart.half_widths,
            resolution=args.grid,
        )
        updates["spec"] = BundleSpec(
            scn.spec.base_dim, scn.spec.rank, new_chart, reference=scn.spec.reference
        )
    if getattr(args, "eps", None):
        schedule = [float(tok) for tok in args.eps.split(",") if tok.strip()]
        if not schedule or any(e <= 0 for e in schedule) or any(
            b >= a for a, b in zip(schedule, schedule[1:])
        ):
            raise ScenarioError("--eps must be a positive, strictly decreasing list")
        updates["eps_schedule"] = schedule
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
        if scn.fiber_rule is not None:
            updates["fiber_rule"] = dataclasses.replace(scn.fiber_rule, seed=args.seed)
    if getattr(args, "mode", None):
        updates["chern_mode"] = args.mode
    return dataclasses.replace(scn, **updates) if updates else scn


def _budget(scn: Scenario) -> BudgetClock:
    if scn.budget_minutes is not None:
        return BudgetClock(scn.budget_minutes)
    return BudgetClock.from_env()


# -- report assembly -----------------------------------------------------------------


def _segre_report(scn: Scenario, result) -> dict:
    report = {
        "scenario": scn.raw,
        "seed": scn.seed,
        "eps": result.eps,
        "requested_eps": result.requested_eps,
        "eps_floor": result.eps_floor,
        "degrees": result.degrees,
        "converged": {str(k): result.converged[k] for k in result.degrees},
        "cauchy": {str(k): result.cauchy[k] for k in result.degrees},
        "mass_tables": {str(k): result.mass_tables[k] for k in result.degrees},
        "s0_deviation": result.s0_deviation,
        "fiber_nodes": result.fiber_nodes,
        "lelong": [dataclasses.asdict(est) for est in result.lelong],
        "budget_exceeded": False,
        "_elapsed_seconds": result.elapsed_seconds,
    }
    if result.decomposition:
        report["decomposition"] = {str(k): v for k, v in result.decomposition.items()}
    return report


def _segre_csvs(scn: Scenario, result, out_dir: str) -> List[str]:
    written = []
    for k in result.degrees:
        rows = []
        for e, table in zip(result.eps, result.mass_tables[k]):
            for region in sorted(table):
                rows.append([repr(e), region, repr(table[region])])
        path = os.path.join(out_dir, f"{scn.name}_s{k}_convergence.csv")
        _write_csv(path, ["eps", "region", "mass"], rows)
        written.append(path)
    if result.lelong:
        rows = []
        for est in result.lelong:
            point = ";".join(str(complex(c)) for c in est.point)
            for r, m in zip(est.radii, est.normalized_masses):
                rows.append([est.degree, point, repr(r), repr(m)])
        path = os.path.join(out_dir, f"{scn.name}_lelong.csv")
        _write_csv(path, ["degree", "point", "radius", "normalized_mass"], rows)
        written.append(path)
    return written


def _flush_budget_stub(scn: Scenario, out_dir: str, filename: str, error: str) -> None:
    dump_json(
        os.path.join(out_dir, filename),
        {"scenario": scn.raw, "seed": scn.seed, "budget_exceeded": True, "error": error},
    )


# -- subcommands --------------------------------------------------------------------


def run_segre(scn: Scenario, out_dir: str, jobs: int = 1) -> int:
    """Segre currents for one scenario: JSON report plus convergence CSVs."""
    try:
        result = segre_current(
            scn.spec,
            scn.metric,
            degrees=scn.degrees,
            eps_schedule=scn.eps_schedule,
            fiber_rule=scn.fiber_rule,
            probe_points=scn.probe_points or None,
            budget=_budget(scn),
            jobs=jobs,
        )
    except BudgetExceeded as exc:
        _flush_budget_stub(scn, out_dir, f"{scn.name}_segre.json", str(exc))
        print(f"{scn.name}: budget exceeded, stub written", file=sys.stderr)
        return 2
    if scn.decomposition:
        decompose(result, scn.metric)
    dump_json(os.path.join(out_dir, f"{scn.name}_segre.json"), _segre_report(scn, result))
    _segre_csvs(scn, result, out_dir)
    ok = all(result.converged[k] for k in result.degrees)
    for k in result.degrees:
        tail = result.cauchy[k][-1] if result.cauchy[k] else float("nan")
        print(
            f"{scn.name} s_{k}: converged={result.converged[k]} "
            f"final_cauchy={tail:.3e} eps_final={result.eps[-1]:.3e}"
        )
    return 0 if ok else 2


def run_chern(scn: Scenario, out_dir: str, jobs: int = 1) -> int:
    """Chern currents in both modes, with a per-region difference table."""
    budget = _budget(scn)
    try:
        result = segre_current(
            scn.spec,
            scn.metric,
            degrees=scn.degrees,
            eps_schedule=scn.eps_schedule,
            fiber_rule=scn.fiber_rule,
            probe_points=scn.probe_points or None,
            budget=budget,
            jobs=jobs,
        )
        decompose(result, scn.metric)
        runs = {
            mode: chern_current(
                scn.spec,
                scn.metric,
                mode=mode,
                segre_result=result,
                probe_points=scn.probe_points or None,
                budget=budget,
                jobs=jobs,
            )
            for mode in ("series", "alternative_Z")
        }
    except BudgetExceeded as exc:
        _flush_budget_stub(scn, out_dir, f"{scn.name}_chern.json", str(exc))
        print(f"{scn.name}: budget exceeded, stub written", file=sys.stderr)
        return 2

    def mode_block(res) -> dict:
        block = {
            "mass_tables": {str(k): v for k, v in res.mass_tables.items()},
            "notes": res.notes,
            "lelong": [dataclasses.asdict(est) for est in res.lelong],
        }
        if res.exact_chern is not None:
            block["exact_chern"] = list(res.exact_chern)
        if res.exact_segre is not None:
            block["exact_segre"] = list(res.exact_segre)
        if res.masked_masses:
            block["masked_masses"] = {str(k): v for k, v in res.masked_masses.items()}
        return block

    series, alt = runs["series"], runs["alternative_Z"]
    difference: Dict[str, Dict[str, float]] = {}
    for k in series.mass_tables:
        difference[str(k)] = {
            region: series.mass_tables[k][region] - alt.mass_tables[k].get(region, 0.0)
            for region in series.mass_tables[k]
        }
    report = {
        "scenario": scn.raw,
        "seed": scn.seed,
        "primary_mode": scn.chern_mode,
        "modes": {mode: mode_block(res) for mode, res in runs.items()},
        "difference": difference,
        "segre_converged": {str(k): result.converged[k] for k in result.degrees},
    }
    dump_json(os.path.join(out_dir, f"{scn.name}_chern.json"), report)
    rows = []
    for k in sorted(series.mass_tables):
        for region in sorted(series.mass_tables[k]):
            s_val = series.mass_tables[k][region]
            a_val = alt.mass_tables[k].get(region, float("nan"))
            rows.append([k, region, repr(s_val), repr(a_val), repr(s_val - a_val)])
    _write_csv(
        os.path.join(out_dir, f"{scn.name}_chern_diff.csv"),
        ["degree", "region", "series", "alternative_Z", "difference"],
        rows,
    )
    primary = runs[scn.chern_mode]
    for k in sorted(primary.mass_tables):
        table = primary.mass_tables[k]
        shown = ", ".join(f"{name}={val:.4f}" for name, val in sorted(table.items()))
        print(f"{scn.name} c_{k} [{scn.chern_mode}]: {shown}")
    ok = all(result.converged[k] for k in result.degrees)
    return 0 if ok else 2


def run_lelong(scn: Scenario, out_dir: str, jobs: int = 1) -> int:
    """Multiplicity estimates at the scenario's probe points."""
    if not scn.probe_points:
        raise ScenarioError("lelong needs at least one probe point in the scenario")
    try:
        result = segre_current(
            scn.spec,
            scn.metric,
            degrees=scn.degrees,
            eps_schedule=scn.eps_schedule,
            fiber_rule=scn.fiber_rule,
            probe_points=scn.probe_points,
            budget=_budget(scn),
            jobs=jobs,
        )
    except BudgetExceeded as exc:
        _flush_budget_stub(scn, out_dir, f"{scn.name}_lelong.json", str(exc))
        print(f"{scn.name}: budget exceeded, stub written", file=sys.stderr)
        return 2
    report = {
        "scenario": scn.raw,
        "seed": scn.seed,
        "estimates": [dataclasses.asdict(est) for est in result.lelong],
        "converged": {str(k): result.converged[k] for k in result.degrees},
    }
    dump_json(os.path.join(out_dir, f"{scn.name}_lelong.json"), report)
    _segre_csvs(scn, result, out_dir)
    for est in result.lelong:
        point = ", ".join(str(complex(c)) for c in est.point)
        print(
            f"{scn.name} s_{est.degree} at ({point}): {est.value:.4f} "
            f"(plateau={est.plateau_found}, secondary={est.secondary})"
        )
    return 0 if all(result.converged[k] for k in result.degrees) else 2


def run_decompose(scn: Scenario, out_dir: str, jobs: int = 1) -> int:
    """Fixed cycle plus moving remainder for each computed degree."""
    try:
        result = segre_current(
            scn.spec,
            scn.metric,
            degrees=scn.degrees,
            eps_schedule=scn.eps_schedule,
            fiber_rule=scn.fiber_rule,
            probe_points=scn.probe_points or None,
            budget=_budget(scn),
            jobs=jobs,
        )
    except BudgetExceeded as exc:
        _flush_budget_stub(scn, out_dir, f"{scn.name}_decompose.json", str(exc))
        print(f"{scn.name}: budget exceeded, stub written", file=sys.stderr)
        return 2
    decompose(result, scn.metric)
    report = {
        "scenario": scn.raw,
        "seed": scn.seed,
        "decomposition": {str(k): v for k, v in result.decomposition.items()},
        "converged": {str(k): result.converged[k] for k in result.degrees},
    }
    dump_json(os.path.join(out_dir, f"{scn.name}_decompose.json"), report)
    for k, rep in sorted(result.decomposition.items()):
        fixed = [
            f"{e['multiplicity']}*[{e['cycle']}]"
            for e in rep["fixed"]
            if e["accepted"] and e["multiplicity"]
        ]
        fixed += [
            f"{e['weight']}*[point {e['point']}]"
            for e in rep["points"]
            if e["accepted"] and e["weight"]
        ]
        moving = rep["moving_mass"]
        print(
            f"{scn.name} s_{k}: fixed {' + '.join(fixed) if fixed else '0'}, "
            f"moving mass {moving:.4f}, off-locus mass {rep['mass_smooth_part']:.4f}"
        )
    return 0 if all(result.converged[k] for k in result.degrees) else 2


def run_verify(
    suites: Sequence[str], out_path: Optional[str], seed: int, jobs: int
) -> int:
    results = verify_mod.run_all(suites, seed=seed, jobs=jobs)
    n_pass = n_fail = 0
    for suite, checks in results.items():
        for c in checks:
            status = "PASS" if c["passed"] else "FAIL"
            if c["passed"]:
                n_pass += 1
            else:
                n_fail += 1
            detail = f"measured={c['measured']}"
            if c.get("tolerance") is not None:
                detail += f" target={c['target']} tol={c['tolerance']}"
            elif c["kind"] in ("exact", "le"):
                detail += f" target={c['target']}"
            print(f"{status} {suite}/{c['name']}: {detail}")
    print(f"{n_pass} passed, {n_fail} failed")
    if out_path:
        dump_json(out_path, {"suites": results, "passed": n_fail == 0})
    return 0 if n_fail == 0 else 2


# -- argument parsing ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segrelab",
        description="Segre and Chern currents of singular Hermitian metrics on a grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(sp, with_mode: bool = False):
        sp.add_argument(
            "--scenario",
            required=True,
            help="scenario JSON file, or the name of a builtin scenario",
        )
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--grid", type=int, default=None, help="override points per axis")
        sp.add_argument(
            "--eps", default=None, help="override schedule, comma separated decreasing"
        )
        sp.add_argument("--jobs", type=int, default=1, help="fiber charts in parallel")
        sp.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        if with_mode:
            sp.add_argument(
                "--mode",
                choices=("series", "alternative_Z"),
                default=None,
                help="primary mode for the console summary (both are computed)",
            )

    scenario_flags(sub.add_parser("segre", help="Segre currents with convergence tables"))
    scenario_flags(
        sub.add_parser("chern", help="Chern currents in both modes"), with_mode=True
    )
    scenario_flags(sub.add_parser("lelong", help="multiplicities at the probe points"))
    scenario_flags(sub.add_parser("decompose", help="fixed cycle plus moving remainder"))

    vp = sub.add_parser("verify", help="run the named verification suites")
    vp.add_argument(
        "--suite",
        default="all",
        help=f"comma separated suite names or 'all' (suites: {', '.join(sorted(verify_mod.SUITES))})",
    )
    vp.add_argument("--out", default=None, help="optional JSON report path")
    vp.add_argument("--jobs", type=int, default=1)
    vp.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    return parser


RUNNERS = {
    "segre": run_segre,
    "chern": run_chern,
    "lelong": run_lelong,
    "decompose": run_decompose,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            if args.suite == "all":
                suites = list(verify_mod.SUITES)
            else:
                suites = [s.strip() for s in args.suite.split(",") if s.strip()]
                unknown = [s for s in suites if s not in verify_mod.SUITES]
                if unknown:
                    raise ScenarioError(f"unknown suites: {', '.join(unknown)}")
            return run_verify(suites, args.out, args.seed, args.jobs)
        scn = _apply_overrides(_load_scenario(args.scenario), args)
        os.makedirs(args.out, exist_ok=True)
        return RUNNERS[args.command](scn, args.out, jobs=args.jobs)
    except (ScenarioError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
