import json

import pytest

from vecgp import bench
from vecgp.cli import main

FAST = ["--set", "generations=2", "--set", "pop_size=10", "--set", "max_init_depth=3",
        "--set", "max_depth=5"]


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--side", "16", "--out", str(out), "--workers", "1"] + FAST) == 0
    assert {p.name for p in out.iterdir()} == {"run.json", "best.pop", "trajectory.csv"}
    data = json.loads((out / "run.json").read_text())
    assert len(data["best_per_generation"]) == 3
    assert data["points"] == 256
    assert "best RMSE" in capsys.readouterr().out


def test_run_exports_buffers(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--side", "8", "--out", str(out), "--set", "export_buffers=true"] + FAST) == 0
    assert (out / "target.f64").stat().st_size == 64 * 8
    assert (out / "best.f64.hdr").exists()


def test_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("side = 8\ngenerations = 1\npop_size = 6\nmax_init_depth = 2\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("argv", [
    ["run", "--set", "elite_size=50"],
    ["run", "--set", "nonsense"],
    ["run", "--config", "/nonexistent.cfg"],
    ["bench", "--backend", "iterative,gpu"],
])
def test_bad_config_exit_1(tmp_path, capsys, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 1
    assert capsys.readouterr().err.startswith("vecgp: ")


def test_capacity_breach_exit_2(tmp_path, capsys):
    code = main(["run", "--out", str(tmp_path), "--set", "mem_budget_bytes=1000"] + FAST)
    assert code == 2
    assert "memory budget" in capsys.readouterr().err


def test_bench_and_report(tmp_path):
    out = tmp_path / "b"
    argv = ["bench", "--out", str(out), "--runs", "2", "--workers", "1", "--backend",
            "iterative,vectorized_cse", "--set", "min_side=8", "--set", "max_side=16"] + FAST
    assert main(argv) == 0
    names = {p.name for p in out.iterdir()}
    assert {"raw.csv", "aggregate.csv", "trajectories.csv", "table.csv", "report.json",
            "scaling.svg", "fitness.svg"} <= names
    assert len(bench.read_csv(out / "raw.csv")) == 8
    assert len(bench.read_csv(out / "aggregate.csv")) == 4

    rep = tmp_path / "r"
    assert main(["report", str(out / "report.json"), "--out", str(rep)]) == 0
    speed = bench.read_csv(rep / "speedup.csv")
    assert [row["backend"] for row in speed if row["backend"] == "iterative"] == ["iterative"] * 2
    assert all(float(row["speedup"]) == 1.0 for row in speed if row["backend"] == "iterative")


def test_all_dnf_bench_succeeds(tmp_path):
    out = tmp_path / "b"
    argv = ["bench", "--out", str(out), "--runs", "1", "--set", "min_side=8", "--set", "max_side=16",
            "--set", "time_budget_s=1e-9", "--set", "charts=false"] + FAST
    assert main(argv) == 0
    agg = bench.read_csv(out / "aggregate.csv")
    assert len(agg) == 4 and all(row["dnf"] == "time" for row in agg)
    assert bench.read_csv(out / "raw.csv") == []


def test_report_rejects_garbage(tmp_path):
    bad = tmp_path / "x.json"
    bad.write_text("{}")
    assert main(["report", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["report", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1


def test_env_worker_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("VECGP_WORKERS", "2")
    out = tmp_path / "run"
    assert main(["run", "--side", "8", "--out", str(out)] + FAST) == 0
    monkeypatch.setenv("VECGP_WORKERS", "two")
    assert main(["run", "--side", "8", "--out", str(out)] + FAST) == 1
