"""Command-line behavior: exit codes, outputs, manifests, determinism."""
import json

import pytest

from shedopt.cli import main
from shedopt.lp import build
from shedopt.mps import read_mps, read_solution_csv
from shedopt.model import load_scenario, save_scenario
from shedopt.simplex import solve
from conftest import (export_scenario, stabilize_scenario, sweep_scenario,
                      write_minimal_scenario_dir)


@pytest.fixture
def minimal_dir(tmp_path):
    path = tmp_path / "scenario"
    write_minimal_scenario_dir(path)
    return path


@pytest.fixture
def export_dir(tmp_path):
    path = tmp_path / "export_scn"
    save_scenario(export_scenario(), path)
    return path


class TestValidateCommand:
    def test_valid_scenario(self, minimal_dir, capsys):
        assert main(["validate", "--scenario", str(minimal_dir)]) == 0
        assert capsys.readouterr().err == ""

    def test_violations_exit_one(self, minimal_dir, capsys):
        path = minimal_dir / "technologies.csv"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write("conv,converter,electricity,hydrogen,1.2,10,0,,,,\n")
        assert main(["validate", "--scenario", str(minimal_dir)]) == 1
        assert "efficiency" in capsys.readouterr().err

    def test_broken_directory_exit_one(self, tmp_path, capsys):
        empty = tmp_path / "nothing"
        empty.mkdir()
        assert main(["validate", "--scenario", str(empty)]) == 1
        assert "missing" in capsys.readouterr().err


class TestSolveCommand:
    def test_solve_writes_solution_and_manifest(self, minimal_dir, tmp_path):
        out = tmp_path / "out"
        assert main(["solve", "--scenario", str(minimal_dir),
                     "--out", str(out)]) == 0
        payload = json.loads((out / "solution.json").read_text())
        assert payload["status"] == "optimal"
        assert payload["objective"] > 0
        assert (out / "solution.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "solve"
        assert sorted(manifest["outputs"]) == ["solution.csv",
                                               "solution.json"]
        assert manifest["config_hash"]
        assert manifest["tool_version"]

    def test_reruns_are_byte_identical(self, export_dir, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["solve", "--scenario", str(export_dir),
                     "--out", str(out1)]) == 0
        assert main(["solve", "--scenario", str(export_dir),
                     "--out", str(out2)]) == 0
        for name in ("solution.csv", "solution.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        h1 = json.loads((out1 / "manifest.json").read_text())["config_hash"]
        h2 = json.loads((out2 / "manifest.json").read_text())["config_hash"]
        assert h1 == h2

    def test_iteration_limit_exit_three(self, export_dir, tmp_path):
        config = json.loads((export_dir / "config.json").read_text())
        config["solver"]["max_iters"] = 2
        (export_dir / "config.json").write_text(json.dumps(config))
        code = main(["solve", "--scenario", str(export_dir),
                     "--out", str(tmp_path / "out")])
        assert code == 3
        payload = json.loads((tmp_path / "out" / "solution.json").read_text())
        assert payload["status"] == "iteration_limit"

    def test_invalid_scenario_exit_one(self, minimal_dir, tmp_path, capsys):
        (minimal_dir / "config.json").unlink()
        assert main(["solve", "--scenario", str(minimal_dir),
                     "--out", str(tmp_path / "out")]) == 1
        assert "config.json" in capsys.readouterr().err


class TestExportMps:
    def test_export(self, minimal_dir, tmp_path):
        out = tmp_path / "out"
        assert main(["export-mps", "--scenario", str(minimal_dir),
                     "--out", str(out)]) == 0
        problem = read_mps(out / "model.mps")
        lp = build(load_scenario(minimal_dir))
        assert problem.col_names == list(lp.catalog.names)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["outputs"] == ["model.mps"]


class TestMetricsCommand:
    def test_zero_shed_report(self, minimal_dir, tmp_path):
        results = tmp_path / "results"
        assert main(["solve", "--scenario", str(minimal_dir),
                     "--out", str(results)]) == 0
        out = tmp_path / "report"
        assert main(["metrics", "--scenario", str(minimal_dir),
                     "--results", str(results), "--out", str(out)]) == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["n_dispatches"] == 1
        assert payload["regions"]["r1"]["loss_share_percent"] == 0.0
        events = (out / "events.csv").read_text().splitlines()
        assert len(events) == 1      # header only

    def test_multi_year_averaging(self, export_dir, tmp_path):
        results = tmp_path / "results"
        assert main(["solve", "--scenario", str(export_dir),
                     "--out", str(results)]) == 0
        base = (results / "solution.csv").read_bytes()
        (results / "solution_y2.csv").write_bytes(base)
        out = tmp_path / "report"
        assert main(["metrics", "--scenario", str(export_dir),
                     "--results", str(results), "--out", str(out)]) == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["n_dispatches"] == 2
        # identical years: the average equals the single-year figure
        single = tmp_path / "single"
        assert main(["metrics", "--scenario", str(export_dir),
                     "--results", str(results), "--solution",
                     str(results / "solution.csv"), "--out",
                     str(single)]) == 0

    def test_events_csv_matches_detect_events(self, export_dir, tmp_path):
        from shedopt.analytics import DispatchResult, detect_events
        results = tmp_path / "results"
        assert main(["solve", "--scenario", str(export_dir),
                     "--out", str(results)]) == 0
        out = tmp_path / "report"
        assert main(["metrics", "--scenario", str(export_dir),
                     "--results", str(results), "--out", str(out)]) == 0
        scenario = load_scenario(export_dir)
        lp = build(scenario)
        x = read_solution_csv(results / "solution.csv", lp.catalog)
        dispatch = DispatchResult.from_solution(scenario, lp, x)
        expected = detect_events(dispatch, "rb")
        lines = (out / "events.csv").read_text().splitlines()[1:]
        got = [line.split(",") for line in lines if line.startswith("rb")]
        assert len(got) == len(expected)
        for row, ev in zip(got, expected):
            assert int(row[1]) == ev.start
            assert int(row[2]) == ev.duration
            assert float(row[3]) == pytest.approx(ev.energy_mwh, rel=1e-9)

    def test_external_solution_import(self, export_dir, tmp_path):
        # feed a solution produced by an external solver (HiGHS) through
        # the name,value interface
        from scipy.optimize import linprog
        from test_mps import mps_to_scipy
        from shedopt.mps import export_mps
        scenario = load_scenario(export_dir)
        lp = build(scenario)
        export_mps(lp, tmp_path / "model.mps")
        ref = linprog(**mps_to_scipy(read_mps(tmp_path / "model.mps")),
                      method="highs")
        assert ref.status == 0
        ext = tmp_path / "external.csv"
        with open(ext, "w", encoding="utf-8") as fh:
            fh.write("name,value\n")
            for name, value in zip(lp.catalog.names, ref.x):
                fh.write(f"{name},{float(value)!r}\n")
        out = tmp_path / "report"
        assert main(["metrics", "--scenario", str(export_dir),
                     "--solution", str(ext), "--out", str(out)]) == 0
        payload = json.loads((out / "report.json").read_text())
        mine = solve(lp)
        from shedopt.analytics import DispatchResult, loss_share
        d = DispatchResult.from_solution(scenario, lp, mine.x)
        assert payload["regions"]["rb"]["loss_share_percent"] \
            == pytest.approx(loss_share(d, "rb"), rel=1e-6)

    def test_requires_some_solution(self, export_dir, tmp_path, capsys):
        assert main(["metrics", "--scenario", str(export_dir),
                     "--out", str(tmp_path / "x")]) == 1
        assert "solution" in capsys.readouterr().err

    def test_event_threshold_flag_validated(self, export_dir, tmp_path,
                                            capsys):
        assert main(["metrics", "--scenario", str(export_dir),
                     "--results", str(tmp_path),
                     "--event-threshold", "1.5",
                     "--out", str(tmp_path / "x")]) == 1


class TestStabilizeCommand:
    def test_writes_stabilization_json(self, tmp_path):
        scn_dir = tmp_path / "scn"
        save_scenario(stabilize_scenario(), scn_dir)
        out = tmp_path / "out"
        assert main(["stabilize", "--scenario", str(scn_dir),
                     "--threshold-hours", "1.0", "--out", str(out)]) == 0
        payload = json.loads((out / "stabilization.json").read_text())
        assert payload["cost_delta_percent"] > 0
        assert payload["residual_lole"]["t1"] <= 1.0 + 1e-9
        assert (out / "solution.csv").exists()

    def test_infeasible_exit_two(self, export_dir, tmp_path, capsys):
        assert main(["stabilize", "--scenario", str(export_dir),
                     "--threshold-hours", "0", "--out",
                     str(tmp_path / "out")]) == 2
        assert "CAP_rb_backup" in capsys.readouterr().err


class TestSweepCommand:
    def test_sweep_csv_written(self, tmp_path):
        scn_dir = tmp_path / "scn"
        save_scenario(sweep_scenario(), scn_dir)
        out = tmp_path / "out"
        assert main(["sweep", "--scenario", str(scn_dir),
                     "--factors", "0.001,10", "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].endswith("I")
        assert lines[2].endswith("V")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["outputs"] == ["sweep.csv"]

    def test_bad_factor_list(self, tmp_path, capsys):
        scn_dir = tmp_path / "scn"
        save_scenario(sweep_scenario(), scn_dir)
        assert main(["sweep", "--scenario", str(scn_dir),
                     "--factors", "a,b", "--out", str(tmp_path / "out")]) == 1


class TestVollProjectCommand:
    def test_projection_outputs(self, tmp_path):
        inputs = tmp_path / "voll_inputs.csv"
        inputs.write_text(
            "country,voll_2020_eur_per_kwh,gva_eur,gdp_2020_eur,"
            "gdp_2050_eur,e_el_2020_mwh,e_el_2050_mwh\n"
            "PT,3.65,,2.0e12,2.4e12,1.0e8,1.2e8\n"
            "GB,13.27,,3.0e12,3.3e12,4.0e8,4.4e8\n",
            encoding="utf-8")
        out = tmp_path / "out"
        assert main(["voll", "project", "--inputs", str(inputs),
                     "--out", str(out)]) == 0
        lines = (out / "voll_2050.csv").read_text().splitlines()
        assert lines[0] == "country,voll_2050_eur_per_kwh"
        # both countries have GDP and demand growing in lockstep
        assert lines[1] == "PT,3.65"
        assert lines[2] == "GB,13.27"
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["scenario"] is None

    def test_missing_inputs_exit_io(self, tmp_path, capsys):
        assert main(["voll", "project", "--inputs",
                     str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "out")]) == 4
