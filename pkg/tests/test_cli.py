"""Command-line interface tests: exit codes, file schemas, determinism."""

import json
import math
import subprocess
import sys

import pytest

from memsim.cli import (build_sim_config, main, parse_config, preset_config,
                        serialize_config)


def run_cli(args, outdir):
    return main(args + ["--outdir", str(outdir)])


class TestConfig:
    def test_round_trip(self):
        cfg = preset_config("1d-unit")
        text = serialize_config(cfg)
        assert parse_config(text) == cfg

    def test_round_trip_all_presets(self):
        for name in ("1d-unit", "disk-radial", "disk-cartesian", "square-unit"):
            cfg = preset_config(name)
            assert parse_config(serialize_config(cfg)) == cfg

    def test_build_matches_preset(self):
        from memsim import make_preset
        sim = build_sim_config(preset_config("square-unit"))
        ref = make_preset("square-unit")
        assert sim.grid.shape == ref.grid.shape
        assert sim.params == ref.params
        assert sim.t_max == ref.t_max
        assert sim.probe_index == ref.probe_index

    def test_unknown_key_rejected(self):
        from memsim.cli import ConfigError
        with pytest.raises(ConfigError):
            parse_config("[domain]\nwarp = 9\n")


class TestRunCommand:
    def test_convergent_run_exit_zero(self, tmp_path):
        code = run_cli(["run", "--preset", "1d-unit", "--lambda", "8.0",
                        "--n", "101"], tmp_path)
        assert code == 0
        traj = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert traj[0] == "t,max_u,energy,l2_ut,nonlocal_I,dt"
        assert len(traj) > 2
        # shortest round-trip floats parse back exactly
        first = traj[1].split(",")
        assert float(first[0]) == 0.0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["command"] == "run"
        assert summary["result"]["verdict"] == "converged"
        for name in summary["artifacts"]:
            assert (tmp_path / name).exists()

    def test_quench_exit_two(self, tmp_path):
        code = run_cli(["run", "--preset", "1d-unit", "--lambda", "9.5",
                        "--n", "101"], tmp_path)
        assert code == 2
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["result"]["verdict"] == "quenched"
        assert summary["result"]["t_quench"] > 0

    def test_invalid_lambda_exit_one(self, tmp_path):
        assert run_cli(["run", "--preset", "1d-unit", "--lambda", "-1"],
                       tmp_path) == 1

    def test_missing_scenario_exit_one(self, tmp_path):
        assert run_cli(["run"], tmp_path) == 1

    def test_snapshot_files(self, tmp_path):
        code = run_cli(["run", "--preset", "1d-unit", "--lambda", "6.0",
                        "--n", "51", "--snapshot-times", "0.5,1.0",
                        "--t-max", "2.0"], tmp_path)
        assert code == 0
        snap = (tmp_path / "snapshot_t0.5.csv").read_text().splitlines()
        assert snap[0] == "x,u"
        assert len(snap) == 52

    def test_2d_snapshot_schema(self, tmp_path):
        code = run_cli(["run", "--preset", "square-unit", "--lambda", "5.0",
                        "--n", "21", "--t-max", "1.0"], tmp_path)
        assert code == 0
        final = (tmp_path / "final.csv").read_text().splitlines()
        assert final[0] == "x,y,u"
        assert len(final) == 1 + 21 * 21

    def test_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run_cli(["run", "--preset", "1d-unit", "--lambda", "8.0",
                            "--n", "101"], out) == 0
        assert (a / "trajectory.csv").read_bytes() == \
            (b / "trajectory.csv").read_bytes()

    def test_config_file_and_set_overrides(self, tmp_path):
        cfg_text = serialize_config(preset_config("1d-unit"))
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(cfg_text)
        code = main(["run", "--config", str(cfg_file), "--lambda", "7.0",
                     "--n", "51", "--set", "time.t_max=1.0",
                     "--outdir", str(tmp_path / "out")])
        assert code == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["config"]["equation"]["lambda"] == "7.0"
        assert summary["config"]["time"]["t_max"] == "1.0"

    def test_bad_set_key(self, tmp_path):
        assert run_cli(["run", "--preset", "1d-unit",
                        "--set", "time.warp=1"], tmp_path) == 1


class TestOtherCommands:
    def test_sweep(self, tmp_path):
        code = run_cli(["sweep", "--preset", "1d-unit", "--n", "51",
                        "--lambdas", "2.0,4.0", "--samples", "11",
                        "--t-max", "1.0"], tmp_path)
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "lambda,t,probe_value"
        lams = {line.split(",")[0] for line in lines[1:]}
        assert lams == {"2.0", "4.0"}
        assert len(lines) == 1 + 2 * 11

    def test_sweep_parallel_matches_serial(self, tmp_path):
        a, b = tmp_path / "ser", tmp_path / "par"
        base = ["sweep", "--preset", "1d-unit", "--n", "51",
                "--lambdas", "3.0,5.0,7.0", "--samples", "9", "--t-max", "1.0"]
        assert run_cli(base, a) == 0
        assert run_cli(base + ["--jobs", "3"], b) == 0
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()

    def test_bisect(self, tmp_path):
        code = run_cli(["bisect", "--preset", "1d-unit", "--n", "101",
                        "--lo", "8.0", "--hi", "9.0", "--tol", "0.25"],
                       tmp_path)
        assert code == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["result"]["hi"] - summary["result"]["lo"] <= 0.25
        lines = (tmp_path / "bisect.csv").read_text().splitlines()
        assert lines[0] == "iter,lo,hi,mid,verdict"
        assert len(lines) >= 2

    def test_bisect_invalid_bracket(self, tmp_path):
        assert run_cli(["bisect", "--preset", "1d-unit", "--n", "51",
                        "--lo", "0.5", "--hi", "1.0", "--tol", "0.25",
                        "--t-max", "2.0"], tmp_path) == 1

    def test_steady_zero_voltage(self, tmp_path):
        code = run_cli(["steady", "--preset", "1d-unit", "--n", "51",
                        "--lambda", "0"], tmp_path)
        assert code == 0
        prof = (tmp_path / "steady_lambda0.0.csv").read_text().splitlines()
        assert prof[0] == "x,u"
        assert all(float(line.split(",")[1]) == 0.0 for line in prof[1:])

    def test_steady_branch(self, tmp_path):
        code = run_cli(["steady", "--preset", "1d-unit", "--n", "101",
                        "--lambdas", "2.0,4.0,6.0"], tmp_path)
        assert code == 0
        branch = (tmp_path / "branch.csv").read_text().splitlines()
        assert branch[0] == "lambda,max_phi,newton_iters,residual_norm"
        maxes = [float(line.split(",")[1]) for line in branch[1:]]
        assert maxes == sorted(maxes)

    def test_steady_past_fold(self, tmp_path):
        assert run_cli(["steady", "--preset", "1d-unit", "--n", "101",
                        "--lambdas", "8.0,9.5"], tmp_path) == 1

    def test_rate(self, tmp_path):
        code = run_cli(["rate", "--preset", "1d-unit", "--lambda", "8.0",
                        "--n", "101", "--t-max", "20", "--samples", "81",
                        "--fit-window", "4,20"], tmp_path)
        assert code == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["result"]["model"] == "exponential"
        assert summary["result"]["r_squared"] > 0.99
        lines = (tmp_path / "decay.csv").read_text().splitlines()
        assert lines[0] == "t,distance"

    def test_bound_disk(self, capsys):
        assert main(["bound", "--domain", "disk", "--radius", "1"]) == 0
        out = capsys.readouterr().out.strip()
        assert float(out) == pytest.approx(
            4.0 * (1.0 + math.pi) ** 4 / (2.0 * math.pi), rel=1e-12)

    def test_bound_rectangle(self, capsys):
        assert main(["bound", "--domain", "rectangle", "--lx", "1",
                     "--ly", "1", "--beta", "0.25"]) == 0
        assert float(capsys.readouterr().out.strip()) == pytest.approx(64.0)

    def test_presets_listing(self, capsys):
        assert main(["presets"]) == 0
        out = capsys.readouterr().out
        for name in ("1d-unit", "disk-radial", "disk-cartesian", "square-unit"):
            assert name in out

    def test_outdir_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("MEMSIM_OUTDIR", str(tmp_path / "envdir"))
        assert main(["run", "--preset", "1d-unit", "--lambda", "5.0",
                     "--n", "51", "--t-max", "1.0"]) == 0
        assert (tmp_path / "envdir" / "trajectory.csv").exists()


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "memsim.cli", "presets"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "1d-unit" in proc.stdout
