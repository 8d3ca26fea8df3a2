import csv
import json
import subprocess
import sys

from blimpswarm.cli import main
from blimpswarm.scenario import bundled_scenario_path


def run_cli(*argv):
    return main(list(argv))


class TestSimulate:
    def test_completed_run_exit_zero(self, tmp_path, capsys):
        rc = run_cli(
            "simulate", "--scenario", "default", "--seed", "0", "--policy", "switch",
            "--out", str(tmp_path / "run"),
        )
        out = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert out["completed"] is True
        assert (tmp_path / "run" / "run.csv").exists()
        assert (tmp_path / "run" / "events.json").exists()

    def test_failed_run_exit_two(self, tmp_path, capsys):
        rc = run_cli(
            "simulate", "--scenario", "default", "--seed", "0", "--policy", "no-switch",
            "--out", str(tmp_path / "run"),
        )
        out = json.loads(capsys.readouterr().out)
        assert rc == 2
        assert out["completed"] is False

    def test_config_error_exit_one(self, tmp_path, capsys):
        src = bundled_scenario_path("default").read_text()
        p = tmp_path / "broken.ini"
        p.write_text(src.replace("mass = 0.35", ""))
        rc = run_cli("simulate", "--scenario", str(p), "--out", str(tmp_path / "x"))
        assert rc == 1
        assert "mass" in capsys.readouterr().err

    def test_missing_scenario_exit_one(self, tmp_path):
        assert run_cli("simulate", "--scenario", str(tmp_path / "nope.ini"), "--out", str(tmp_path)) == 1


class TestMetricsCommand:
    def test_recomputes_from_export(self, tmp_path, capsys):
        rc = run_cli(
            "simulate", "--scenario", "default", "--seed", "1", "--duration", "8",
            "--out", str(tmp_path / "run"),
        )
        first = json.loads(capsys.readouterr().out)
        assert rc in (0, 2)
        rc = run_cli("metrics", "--runlog", str(tmp_path / "run"))
        again = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert again["average_area"] == first["average_area"]
        assert again["area_rmse"] == first["area_rmse"]

    def test_truncated_log_exit_three(self, tmp_path, capsys):
        run_cli(
            "simulate", "--scenario", "default", "--duration", "4", "--out", str(tmp_path / "run")
        )
        capsys.readouterr()
        csv_path = tmp_path / "run" / "run.csv"
        lines = csv_path.read_text().splitlines()
        csv_path.write_text("\n".join(lines[:-1]) + "\n")
        rc = run_cli("metrics", "--runlog", str(tmp_path / "run"))
        assert rc == 3
        assert "truncated" in capsys.readouterr().err

    def test_missing_dir_exit_three(self, tmp_path):
        assert run_cli("metrics", "--runlog", str(tmp_path / "void")) == 3


class TestBatch:
    def test_summary_table(self, tmp_path, capsys):
        summary = tmp_path / "summary.csv"
        rc = run_cli(
            "batch", "--scenario", "default", "--seeds", "0..2", "--policy", "both",
            "--summary", str(summary), "--duration", "60",
        )
        assert rc == 0
        rows = list(csv.DictReader(summary.open()))
        assert len(rows) == 6
        assert {r["policy"] for r in rows} == {"switch", "no-switch"}
        assert {r["seed"] for r in rows} == {"0", "1", "2"}

    def test_bad_seed_range_exit_one(self, tmp_path):
        rc = run_cli(
            "batch", "--scenario", "default", "--seeds", "5..1",
            "--summary", str(tmp_path / "s.csv"),
        )
        assert rc == 1

    def test_determinism_byte_identical_summaries(self, tmp_path):
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (pa, pb):
            rc = run_cli(
                "batch", "--scenario", "default", "--seeds", "0,1", "--policy", "switch",
                "--summary", str(p), "--duration", "30",
            )
            assert rc == 0
        assert pa.read_bytes() == pb.read_bytes()


class TestEntrypoint:
    def test_module_invocation(self, tmp_path):
        r = subprocess.run(
            [sys.executable, "-m", "blimpswarm.cli", "simulate", "--scenario", "default",
             "--duration", "2", "--out", str(tmp_path / "r")],
            capture_output=True,
            text=True,
        )
        assert r.returncode == 2  # too short to reach the goal
        assert json.loads(r.stdout)["completed"] is False
