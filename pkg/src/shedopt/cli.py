"""Command-line entry point.

Subcommands: voll project, validate, solve, export-mps, metrics, stabilize,
sweep.  Data goes to files under --out; messages go to stderr.  Every run
that writes outputs finishes by atomically writing manifest.json, so a
missing manifest marks an aborted run.

Exit codes: 0 success, 1 invalid input, 2 infeasible/unbounded model,
3 iteration limit, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analytics, experiments, mps, voll
from ._format import round12_tree
from .lp import build
from .model import ScenarioError, load_scenario, validate
from .simplex import (INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED,
                      SolveOptions, solve)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_ITERATION_LIMIT = 3
EXIT_IO = 4

_STATUS_EXIT = {OPTIMAL: EXIT_OK, INFEASIBLE: EXIT_INFEASIBLE,
                UNBOUNDED: EXIT_INFEASIBLE,
                ITERATION_LIMIT: EXIT_ITERATION_LIMIT}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except experiments.StabilizeInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except experiments.SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shedopt",
        description="Cost-optimal adequacy assessment of multi-region "
                    "renewable energy systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p_voll = sub.add_parser("voll", help="VoLL tooling")
    voll_sub = p_voll.add_subparsers(dest="voll_command", required=True)
    p_project = voll_sub.add_parser(
        "project", help="project country VoLLs to 2050")
    p_project.add_argument("--inputs", required=True,
                           help="voll_inputs.csv path")
    p_project.add_argument("--out", required=True, help="output directory")
    p_project.set_defaults(func=cmd_voll_project)

    p_val = sub.add_parser("validate", help="check a scenario directory")
    p_val.add_argument("--scenario", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_solve = sub.add_parser("solve", help="build and solve the LP")
    p_solve.add_argument("--scenario", required=True)
    p_solve.add_argument("--out", required=True)
    p_solve.set_defaults(func=cmd_solve)

    p_mps = sub.add_parser("export-mps", help="write the LP in MPS format")
    p_mps.add_argument("--scenario", required=True)
    p_mps.add_argument("--out", required=True)
    p_mps.set_defaults(func=cmd_export_mps)

    p_metrics = sub.add_parser(
        "metrics", help="adequacy report from solved dispatches")
    p_metrics.add_argument("--scenario", required=True)
    p_metrics.add_argument("--out", required=True)
    p_metrics.add_argument("--results",
                           help="directory with solution*.csv files")
    p_metrics.add_argument("--solution", action="append", default=[],
                           help="solution CSV (repeatable, e.g. from an "
                                "external solver)")
    p_metrics.add_argument("--event-threshold", type=float, default=None,
                           help="override the event threshold fraction")
    p_metrics.set_defaults(func=cmd_metrics)

    p_stab = sub.add_parser(
        "stabilize", help="re-optimize with per-region shed budgets")
    p_stab.add_argument("--scenario", required=True)
    p_stab.add_argument("--threshold-hours", type=float, required=True,
                        help="allowed shed budget in average-demand hours "
                             "per year (0 = zero-shed system)")
    p_stab.add_argument("--out", required=True)
    p_stab.set_defaults(func=cmd_stabilize)

    p_sweep = sub.add_parser("sweep", help="VoLL sensitivity sweep")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--factors", default=None,
                         help="comma-separated factors, default "
                              "0.001,0.01,0.1,0.5,1,2,10")
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _scenario_hash(scenario_dir: Path) -> str:
    digest = hashlib.sha256()
    for name in sorted(p.name for p in scenario_dir.iterdir() if p.is_file()):
        digest.update(name.encode("utf-8"))
        digest.update(b"\0")
        digest.update((scenario_dir / name).read_bytes())
    return digest.hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    payload = round12_tree(payload)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_manifest(out_dir: Path, command: str, scenario: Path | None,
                    started: str, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "scenario": str(scenario) if scenario else None,
        "config_hash": _scenario_hash(scenario) if scenario else None,
        "tool_version": __version__,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": sorted(outputs),
    }
    body = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(body)
        os.replace(tmp, out_dir / "manifest.json")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _solve_options(scenario) -> SolveOptions:
    return SolveOptions(feas_tol=scenario.solver.feas_tol,
                        opt_tol=scenario.solver.opt_tol,
                        max_iters=scenario.solver.max_iters)


def cmd_voll_project(args) -> int:
    started = _utc_now()
    records = voll.read_voll_inputs(args.inputs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    voll.write_voll_2050(out_dir / "voll_2050.csv",
                         voll.project_table(records))
    _write_manifest(out_dir, "voll project", None, started, ["voll_2050.csv"])
    return EXIT_OK


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    violations = validate(scenario)
    for v in violations:
        print(f"{v.severity}: {v.location}: {v.message}", file=sys.stderr)
    if any(v.severity == "error" for v in violations):
        return EXIT_INVALID
    return EXIT_OK


def cmd_solve(args) -> int:
    started = _utc_now()
    scenario_dir = Path(args.scenario)
    scenario = load_scenario(scenario_dir)
    lp = build(scenario)
    solution = solve(lp, _solve_options(scenario))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = ["solution.json"]
    _write_json(out_dir / "solution.json", {
        "status": solution.status,
        "objective": solution.objective,
        "c_system": solution.c_system,
        "c_lol": solution.c_lol,
        "iterations": solution.iterations,
    })
    if solution.x is not None:
        mps.write_solution_csv(out_dir / "solution.csv", lp.catalog,
                               solution.x)
        outputs.append("solution.csv")
    _write_manifest(out_dir, "solve", scenario_dir, started, outputs)
    if solution.status != OPTIMAL:
        print(f"solve finished with status {solution.status}",
              file=sys.stderr)
    return _STATUS_EXIT[solution.status]


def cmd_export_mps(args) -> int:
    started = _utc_now()
    scenario_dir = Path(args.scenario)
    scenario = load_scenario(scenario_dir)
    lp = build(scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    mps.export_mps(lp, out_dir / "model.mps")
    _write_manifest(out_dir, "export-mps", scenario_dir, started,
                    ["model.mps"])
    return EXIT_OK


def cmd_metrics(args) -> int:
    started = _utc_now()
    scenario_dir = Path(args.scenario)
    scenario = load_scenario(scenario_dir)
    if args.event_threshold is not None:
        from dataclasses import replace
        if not 0.0 <= args.event_threshold < 1.0:
            raise ValueError("--event-threshold must be in [0, 1)")
        scenario = replace(scenario,
                           event_threshold_fraction=args.event_threshold)
    lp = build(scenario)

    solution_files = [Path(p) for p in args.solution]
    if args.results:
        results = Path(args.results)
        if not results.is_dir():
            raise ValueError(f"--results {results} is not a directory")
        solution_files.extend(sorted(results.glob("solution*.csv")))
    if not solution_files:
        raise ValueError("no solution files: pass --results and/or --solution")

    dispatches = []
    for path in solution_files:
        if not path.exists():
            raise ValueError(f"missing solution file {path}")
        x = mps.read_solution_csv(path, lp.catalog)
        dispatches.append(
            analytics.DispatchResult.from_solution(scenario, lp, x))
    report = analytics.build_report(dispatches)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = analytics.write_report_files(report, out_dir)
    _write_manifest(out_dir, "metrics", scenario_dir, started, outputs)
    return EXIT_OK


def cmd_stabilize(args) -> int:
    started = _utc_now()
    scenario_dir = Path(args.scenario)
    scenario = load_scenario(scenario_dir)
    threshold = args.threshold_hours
    if threshold < 0:
        raise ValueError("--threshold-hours must be >= 0")
    solution, report = experiments.stabilize(scenario, threshold,
                                             _solve_options(scenario))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    experiments.write_stabilization_json(report,
                                         out_dir / "stabilization.json")
    outputs = ["stabilization.json", "solution.json"]
    _write_json(out_dir / "solution.json", {
        "status": solution.status,
        "objective": solution.objective,
        "c_system": solution.c_system,
        "c_lol": solution.c_lol,
        "iterations": solution.iterations,
    })
    if solution.x is not None:
        lp = build(scenario)
        mps.write_solution_csv(out_dir / "solution.csv", lp.catalog,
                               solution.x)
        outputs.append("solution.csv")
    _write_manifest(out_dir, "stabilize", scenario_dir, started, outputs)
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = _utc_now()
    scenario_dir = Path(args.scenario)
    scenario = load_scenario(scenario_dir)
    if args.factors:
        try:
            factors = [float(f) for f in args.factors.split(",") if f.strip()]
        except ValueError:
            raise ValueError(f"--factors: malformed list {args.factors!r}") \
                from None
    else:
        factors = list(experiments.DEFAULT_SWEEP_FACTORS)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        records = experiments.voll_sweep(scenario, factors,
                                         _solve_options(scenario))
    except experiments.SweepError as exc:
        # Flag the partial results, then report the failure.
        experiments.write_sweep_csv(exc.partial, out_dir / "sweep.partial.csv")
        raise
    experiments.write_sweep_csv(records, out_dir / "sweep.csv")
    _write_manifest(out_dir, "sweep", scenario_dir, started, ["sweep.csv"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
