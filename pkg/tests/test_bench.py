import csv

import pytest

from vecgp import bench
from vecgp.errors import InvalidParameterError
from vecgp.evolution import RunParams

TINY = RunParams(runs=2, generations=2, pop_size=10, max_init_depth=3, max_depth=5)
BOTH = ("iterative", "vectorized_cse")


@pytest.fixture(scope="module")
def report():
    return bench.run_benchmark(TINY, bench.test_ladder(8, 16), BOTH, workers=1)


def test_reference_ladder():
    ladder = bench.test_ladder(64, 4096)
    assert [t.side for t in ladder] == [64, 128, 256, 512, 1024, 2048, 4096]
    assert ladder[0].point_count == 4096
    assert ladder[-1].point_count == 16_777_216
    assert ladder[2].label == "256^2"


def test_single_step_ladder():
    assert [t.side for t in bench.test_ladder(64, 64)] == [64]


@pytest.mark.parametrize("lo, hi", [(64, 96), (128, 64), (0, 64), (1, 4)])
def test_bad_ladder(lo, hi):
    with pytest.raises(InvalidParameterError):
        bench.test_ladder(lo, hi)


def test_counts(report):
    assert len(report.records) == 8
    assert len(report.entries) == 4
    assert all(e.n_runs == 2 and e.dnf_reason is None for e in report.entries)


def test_same_seeds_across_backends(report):
    seeds = {}
    for r in report.records:
        seeds.setdefault((r.test_side, r.backend), []).append(r.seed)
    assert len(seeds) == 4
    assert all(v == [0, 1] for v in seeds.values())


def test_trajectories_identical_across_backends(report):
    tr = report.fitness_trajectories
    for side in (8, 16):
        for run_id in range(2):
            assert tr[(side, "iterative", run_id)] == tr[(side, "vectorized_cse", run_id)]
            assert len(tr[(side, "iterative", run_id)]) == TINY.generations + 1


def test_single_run_std_zero():
    rep = bench.run_benchmark(RunParams(runs=1, generations=1, pop_size=6, max_init_depth=2, max_depth=3),
                              bench.test_ladder(8, 8), ("vectorized",), workers=1)
    e = rep.entries[0]
    assert e.n_runs == 1 and e.std_total_s == 0.0


def test_memory_dnf_for_large_sets():
    # 16^2 coordinates need 4 KiB; 64^2 need 64 KiB
    rep = bench.run_benchmark(TINY, bench.test_ladder(16, 64), ("vectorized",), workers=1,
                              mem_budget_bytes=40_000)
    reasons = [e.dnf_reason for e in rep.entries]
    assert reasons[0] is None
    assert reasons[-1] == "memory"


def test_time_dnf_propagates_up_the_ladder():
    rep = bench.run_benchmark(TINY, bench.test_ladder(8, 32), ("iterative",), workers=1,
                              time_budget_s=1e-9)
    assert [e.dnf_reason for e in rep.entries] == ["time"] * 3
    assert rep.records == []


def test_speedup_examples():
    entries = [bench.BenchEntry(64, 4096, "iterative", 1, 100.0, 0.0),
               bench.BenchEntry(64, 4096, "vectorized", 1, 4.0, 0.0),
               bench.BenchEntry(128, 16384, "iterative", dnf_reason="time"),
               bench.BenchEntry(128, 16384, "vectorized", 1, 8.0, 0.0)]
    rep = bench.BenchReport(entries, [], {})
    assert bench.speedup_table(rep, "iterative") == [("64^2", "iterative", 1.0), ("64^2", "vectorized", 25.0)]
    with pytest.raises(InvalidParameterError):
        bench.speedup_table(rep, "nope")


def test_report_json_round_trip(tmp_path, report):
    path = tmp_path / "r.json"
    report.save(path)
    back = bench.BenchReport.load(path)
    assert back.entries == report.entries
    assert back.records == report.records
    assert back.environment["workers"] == 1


def test_csv_outputs(tmp_path, report):
    bench.write_raw_csv(tmp_path / "raw.csv", report)
    bench.write_aggregate_csv(tmp_path / "agg.csv", report)
    bench.write_trajectory_csv(tmp_path / "traj.csv", report)
    bench.write_table_csv(tmp_path / "table.csv", report)
    raw = bench.read_csv(tmp_path / "raw.csv")
    assert list(raw[0]) == bench.RAW_COLUMNS and len(raw) == 8
    agg = bench.read_csv(tmp_path / "agg.csv")
    assert list(agg[0]) == bench.AGGREGATE_COLUMNS and len(agg) == 4
    assert len(bench.read_csv(tmp_path / "traj.csv")) == 8 * (TINY.generations + 1)
    with open(tmp_path / "table.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["test_set", "points", "stat", "iterative", "vectorized_cse"]
    assert [r[2] for r in rows[1:]] == ["AVG", "STD", "AVG", "STD"]
    assert [r[0] for r in rows[1:]] == ["8^2", "8^2", "16^2", "16^2"]


def test_table_marks_dnf(tmp_path):
    rep = bench.BenchReport([bench.BenchEntry(64, 4096, "iterative", dnf_reason="time")], [], {})
    bench.write_table_csv(tmp_path / "t.csv", rep)
    rows = list(csv.reader(open(tmp_path / "t.csv", newline="")))
    assert rows[1][3] == "DNF" and rows[2][3] == "DNF"


def test_non_timing_rows_drop_timings(tmp_path, report):
    bench.write_raw_csv(tmp_path / "raw.csv", report)
    rows = bench.non_timing_rows(tmp_path / "raw.csv")
    assert len(rows[0]) == len(bench.RAW_COLUMNS) - len(bench.TIMING_COLUMNS)
