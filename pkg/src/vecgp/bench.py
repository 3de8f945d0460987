"""Scaling benchmark: seeded runs per (grid size, backend) with phase timings.

Every backend of a test set replays the same seeds.  Because the backends
produce bit-identical fitness values the evolutionary paths coincide, so the
timings compare identical workloads.
"""

import csv
import json
import logging
import os
import platform
import statistics
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence

from .errors import CapacityError, InvalidParameterError, TimeLimitExceeded
from .evaluation import Problem, default_workers, pagie_target, square_grid
from .evolution import RunParams, run
from .expr import PrimitiveSet, pagie_primitives

log = logging.getLogger(__name__)

DEFAULT_TIME_BUDGET_S = 3600.0

RAW_COLUMNS = ["test_side", "points", "backend", "run_id", "seed", "total_s", "init_s",
               "eval_s", "breed_s", "best_rmse_final"]
AGGREGATE_COLUMNS = ["test_side", "points", "backend", "n_runs", "avg_total_s", "std_total_s",
                     "avg_eval_s", "avg_breed_s", "dnf"]
TRAJECTORY_COLUMNS = ["test_side", "backend", "run_id", "generation", "best_rmse"]
TIMING_COLUMNS = ("total_s", "init_s", "eval_s", "breed_s")


@dataclass(frozen=True)
class TestSet:
    __test__ = False  # not a pytest class

    side: int

    @property
    def point_count(self) -> int:
        return self.side * self.side

    @property
    def label(self) -> str:
        return f"{self.side}^2"


def test_ladder(min_side: int, max_side: int) -> List[TestSet]:
    """Square grids whose side doubles from ``min_side`` to ``max_side``."""

    def pow2(v):
        return isinstance(v, int) and v >= 2 and v & (v - 1) == 0

    if not (pow2(min_side) and pow2(max_side)) or min_side > max_side:
        raise InvalidParameterError(
            f"ladder bounds must be powers of two with min <= max, got ({min_side}, {max_side})"
        )
    sides = []
    s = min_side
    while s <= max_side:
        sides.append(TestSet(s))
        s *= 2
    return sides


test_ladder.__test__ = False


@dataclass
class RunRecord:
    test_side: int
    points: int
    backend: str
    run_id: int
    seed: int
    total_s: float
    init_s: float
    eval_s: float
    breed_s: float
    best_rmse_final: float
    trajectory: List[float] = field(default_factory=list, repr=False)


@dataclass
class BenchEntry:
    test_side: int
    points: int
    backend: str
    n_runs: int = 0
    avg_total_s: Optional[float] = None
    std_total_s: Optional[float] = None
    avg_eval_s: Optional[float] = None
    avg_breed_s: Optional[float] = None
    dnf_reason: Optional[str] = None

    @property
    def label(self) -> str:
        return f"{self.test_side}^2"


@dataclass
class BenchReport:
    entries: List[BenchEntry]
    records: List[RunRecord]
    environment: Dict[str, object]
    params: Dict[str, object] = field(default_factory=dict)

    def entry(self, side: int, backend: str) -> BenchEntry:
        for e in self.entries:
            if e.test_side == side and e.backend == backend:
                return e
        raise KeyError((side, backend))

    @property
    def fitness_trajectories(self) -> Dict[tuple, List[float]]:
        """Best RMSE per generation keyed by ``(test_side, backend, run_id)``."""
        return {(r.test_side, r.backend, r.run_id): r.trajectory for r in self.records}

    def to_dict(self) -> dict:
        return {
            "environment": self.environment,
            "params": self.params,
            "entries": [asdict(e) for e in self.entries],
            "records": [asdict(r) for r in self.records],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchReport":
        return cls(
            entries=[BenchEntry(**e) for e in data["entries"]],
            records=[RunRecord(**r) for r in data["records"]],
            environment=dict(data.get("environment", {})),
            params=dict(data.get("params", {})),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "BenchReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def cpu_model() -> str:
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("model name"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return platform.processor() or platform.machine()


def _finish_entry(entry: BenchEntry, records: List[RunRecord]) -> None:
    totals = [r.total_s for r in records]
    entry.n_runs = len(records)
    entry.avg_total_s = statistics.fmean(totals)
    entry.std_total_s = statistics.pstdev(totals)
    entry.avg_eval_s = statistics.fmean(r.eval_s for r in records)
    entry.avg_breed_s = statistics.fmean(r.breed_s for r in records)


def run_benchmark(
    params: RunParams,
    ladder: Sequence[TestSet],
    backends: Sequence[str],
    time_budget_s: float = DEFAULT_TIME_BUDGET_S,
    mem_budget_bytes: int = None,
    ps: PrimitiveSet = None,
    domain_range=(-5.0, 5.0),
    workers: int = None,
    chunk_size: int = None,
    cache: bool = True,
) -> BenchReport:
    """Run ``params.runs`` seeded runs for every (test set, backend) pair.

    Run ``i`` uses seed ``params.seed + i``.  A cell is marked DNF "time"
    once the average over all runs is bound to exceed ``time_budget_s``
    (and every larger test set for that backend follows suit without being
    run), or DNF "memory" when the grid or an evaluation hits the memory
    budget.  Runs execute strictly one after another.
    """
    params.validate()
    ps = ps or pagie_primitives()
    workers = default_workers() if workers is None else workers
    entries, records = [], []
    timed_out = set()
    lo, hi = domain_range
    for ts in ladder:
        try:
            domain = square_grid(ts.side, lo, hi, mem_budget=mem_budget_bytes)
            target = pagie_target(domain)
        except CapacityError as exc:
            log.info("%s: grid exceeds memory budget (%s)", ts.label, exc)
            entries.extend(BenchEntry(ts.side, ts.point_count, b, dnf_reason="memory") for b in backends)
            continue
        for backend in backends:
            entry = BenchEntry(ts.side, ts.point_count, backend)
            entries.append(entry)
            if backend in timed_out:
                entry.dnf_reason = "time"
                continue
            cell = []
            spent = 0.0
            for run_id in range(params.runs):
                problem = Problem(domain, target, backend, cache=cache, workers=workers,
                                  chunk_size=chunk_size, mem_budget=mem_budget_bytes)
                run_params = replace(params, seed=params.seed + run_id)
                # whatever is left of runs * budget; overrunning it guarantees DNF
                limit = time_budget_s * params.runs - spent
                try:
                    result = run(run_params, problem, ps, time_limit_s=limit)
                except TimeLimitExceeded:
                    entry.dnf_reason = "time"
                    break
                except CapacityError:
                    entry.dnf_reason = "memory"
                    break
                t = result.timings
                spent += t.total_s
                cell.append(RunRecord(
                    ts.side, ts.point_count, backend, run_id, run_params.seed,
                    t.total_s, t.init_s, t.eval_s, t.breed_s, result.best_rmse,
                    [f for _, f, _ in result.best_per_generation],
                ))
                log.info("%s %s run %d: %.3f s, best %.6g", ts.label, backend, run_id,
                         t.total_s, result.best_rmse)
                if spent / len(cell) > time_budget_s:
                    entry.dnf_reason = "time"
                    break
            if entry.dnf_reason is None:
                _finish_entry(entry, cell)
                records.extend(cell)
            elif entry.dnf_reason == "time":
                timed_out.add(backend)
    env = {
        "cpu_model": cpu_model(),
        "cpu_count": os.cpu_count(),
        "workers": workers,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return BenchReport(entries, records, env, params.to_dict())


def speedup_table(report: BenchReport, baseline: str):
    """``(test_set_label, backend, baseline_avg / backend_avg)`` per completed cell."""
    base = {e.test_side: e for e in report.entries if e.backend == baseline}
    if not base:
        raise InvalidParameterError(f"baseline backend {baseline!r} not in report")
    rows = []
    for e in report.entries:
        b = base.get(e.test_side)
        if b is None or b.dnf_reason or e.dnf_reason:
            continue
        rows.append((e.label, e.backend, b.avg_total_s / e.avg_total_s))
    return rows


# --- CSV output -----------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_raw_csv(path, report: BenchReport) -> None:
    write_csv(path, RAW_COLUMNS, ([getattr(r, c) for c in RAW_COLUMNS] for r in report.records))


def write_aggregate_csv(path, report: BenchReport) -> None:
    rows = []
    for e in report.entries:
        rows.append([e.test_side, e.points, e.backend, e.n_runs, e.avg_total_s, e.std_total_s,
                     e.avg_eval_s, e.avg_breed_s, e.dnf_reason or ""])
    write_csv(path, AGGREGATE_COLUMNS, rows)


def write_trajectory_csv(path, report: BenchReport) -> None:
    rows = (
        [r.test_side, r.backend, r.run_id, g, f]
        for r in report.records
        for g, f in enumerate(r.trajectory)
    )
    write_csv(path, TRAJECTORY_COLUMNS, rows)


def write_table_csv(path, report: BenchReport) -> None:
    """Wide AVG/STD table: two rows per test set, one column per backend."""
    backends = list(dict.fromkeys(e.backend for e in report.entries))
    sides = list(dict.fromkeys(e.test_side for e in report.entries))
    rows = []
    for side in sides:
        for stat, attr in (("AVG", "avg_total_s"), ("STD", "std_total_s")):
            row = [f"{side}^2", side * side, stat]
            for b in backends:
                try:
                    e = report.entry(side, b)
                except KeyError:
                    row.append("")
                    continue
                row.append("DNF" if e.dnf_reason else f"{getattr(e, attr):.2f}")
            rows.append(row)
    write_csv(path, ["test_set", "points", "stat"] + backends, rows)


def read_csv(path) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def non_timing_rows(path) -> List[tuple]:
    """Raw CSV rows with timing columns dropped, for determinism comparisons."""
    return [
        tuple(v for k, v in row.items() if k not in TIMING_COLUMNS)
        for row in read_csv(path)
    ]
