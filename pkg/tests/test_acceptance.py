"""End-to-end acceptance checks.

Run alone with ``pytest tests/test_acceptance.py -s``; a summary with one
PASS/FAIL line per criterion is printed at the end of the session.  The
scaling benchmark behind criteria 3 and 4 takes roughly an hour on a
single core.
"""

import math
import os
import random
import time

import mpmath
import numpy as np
import pytest

from conftest import random_trees
from vecgp import bench
from vecgp.cli import main
from vecgp.evaluation import (
    Problem,
    eval_domain_iterative,
    eval_domain_vectorized,
    make_grid,
    pagie_target,
    square_grid,
    to_dag,
)
from vecgp.evolution import RunParams, run, tournament_select
from vecgp.expr import Function, Individual, Variable, pagie_primitives
from vecgp.generate import TraceEntry, ramped_half_and_half

pytestmark = pytest.mark.acceptance

SCALING_RUNS = 5
SCALING_BACKENDS = ("iterative", "vectorized_cse")


def note(request, text):
    request.node.user_properties.append(("detail", text))
    print(f"\n{request.node.name}: {text}")


@pytest.fixture(scope="module")
def scaling_report(tmp_path_factory):
    params = RunParams(runs=SCALING_RUNS)
    report = bench.run_benchmark(params, bench.test_ladder(64, 1024), SCALING_BACKENDS)
    out = tmp_path_factory.mktemp("scaling")
    report.save(out / "report.json")
    bench.write_table_csv(out / "table.csv", report)
    print("\n" + (out / "table.csv").read_text())
    return report


def _avg(report, side, backend):
    e = report.entry(side, backend)
    assert e.dnf_reason is None, f"{e.label} {backend} did not finish ({e.dnf_reason})"
    return e.avg_total_s


@pytest.mark.criterion(1)
def test_backend_equivalence(request):
    d = square_grid(64)
    trees = random_trees(1000, seed=2024)
    t0 = time.perf_counter()
    mismatches = 0
    for e in trees:
        ref = eval_domain_iterative(e, d).view(np.uint64)
        dag = to_dag(e)
        for source in (e, dag):
            for workers in (1, 8):
                out = eval_domain_vectorized(source, d, workers=workers)
                mismatches += not np.array_equal(ref, out.view(np.uint64))
    elapsed = time.perf_counter() - t0
    note(request, f"{len(trees)} trees x 4 configurations, {mismatches} mismatches, {elapsed:.1f} s")
    assert mismatches == 0
    assert elapsed < 120


@pytest.mark.criterion(2)
def test_pagie_values(request):
    d = make_grid([(0.0, 5.0, 6), (0.0, 5.0, 6)])
    t = pagie_target(d)
    at = {d.point(j): float(t[j]) for j in range(d.point_count)}
    mpmath.mp.dps = 60
    oracle = float(2 * mpmath.mpf(5) ** 4 / (mpmath.mpf(5) ** 4 + 1))
    ulps = abs(at[(5.0, 5.0)] - oracle) / math.ulp(oracle)
    note(request, f"f(1,1)={at[(1.0, 1.0)]!r} f(0,0)={at[(0.0, 0.0)]!r} f(5,5) off by {ulps:g} ulp")
    assert at[(1.0, 1.0)] == 1.0
    assert at[(0.0, 0.0)] == 0.0
    assert ulps <= 1


@pytest.mark.criterion(3)
def test_scaling_shape(request, scaling_report):
    it = {s: _avg(scaling_report, s, "iterative") for s in (64, 128, 256, 512, 1024)}
    vec = {s: _avg(scaling_report, s, "vectorized_cse") for s in (64, 1024)}
    growth = [it[512] / it[256], it[1024] / it[512]]
    it_ratio = it[1024] / it[64]
    vec_ratio = vec[1024] / vec[64]
    note(request, f"iterative step growth {growth[0]:.2f}x, {growth[1]:.2f}x; "
                  f"1024^2/64^2 ratio iterative {it_ratio:.1f} vs vectorized {vec_ratio:.1f}")
    assert min(growth) >= 3.0
    assert vec_ratio <= it_ratio


@pytest.mark.criterion(4)
def test_desk_scale_speedup(request, scaling_report):
    it = _avg(scaling_report, 1024, "iterative")
    vec = _avg(scaling_report, 1024, "vectorized_cse")
    cores = os.cpu_count()
    note(request, f"1024^2 iterative {it:.1f} s vs vectorized {vec:.1f} s: "
                  f"{it / vec:.1f}x on {cores} logical core(s)")
    assert vec <= it / 10


@pytest.mark.criterion(5)
def test_elitism_monotonicity(request):
    d = square_grid(64)
    target = pagie_target(d)
    ps = pagie_primitives()
    first, last, violations = [], [], 0
    for seed in range(30):
        res = run(RunParams(runs=1, seed=seed), Problem(d, target), ps)
        traj = [f for _, f, _ in res.best_per_generation]
        violations += any(b > a for a, b in zip(traj, traj[1:]))
        first.append(traj[0])
        last.append(traj[-1])
    m0, m1 = sum(first) / 30, sum(last) / 30
    note(request, f"30 runs, {violations} non-monotone, mean best RMSE {m0:.4f} -> {m1:.4f}")
    assert violations == 0
    assert m1 < m0


@pytest.mark.criterion(6)
def test_rhh_composition(request):
    trace = []
    ramped_half_and_half(50, 1, 10, pagie_primitives(), random.Random(0), trace=trace)
    expected = []
    for d in range(1, 11):
        expected += [TraceEntry(d, "full")] * 2 + [TraceEntry(d, "grow")] * 3
    note(request, f"{len(trace)} trace entries, blocks of 5 (2 full + 3 grow) at depths 1..10")
    assert trace == expected


@pytest.mark.criterion(7)
def test_bench_determinism(request, tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("runs = 3\ngenerations = 10\nmin_side = 64\nmax_side = 128\n"
                   "backends = iterative,vectorized,vectorized_cse\nseed = 17\ncharts = false\n")
    outs = []
    for name in ("a", "b"):
        assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
        outs.append(tmp_path / name)
    raw = [bench.non_timing_rows(o / "raw.csv") for o in outs]
    traj = [(o / "trajectories.csv").read_bytes() for o in outs]
    note(request, f"{len(raw[0])} raw rows compared, trajectories identical: {traj[0] == traj[1]}")
    assert raw[0] == raw[1] and len(raw[0]) == 18
    assert traj[0] == traj[1]


@pytest.mark.criterion(8)
def test_tournament_probability(request):
    pop = [Individual(Variable(0), f) for f in (1.0, 2.0, 3.0)]
    rng = random.Random(8)
    trials = 100_000
    wins = sum(tournament_select(pop, 3, rng) is pop[0] for _ in range(trials))
    exact = 1 - (2 / 3) ** 3
    note(request, f"win rate {wins / trials:.4f} vs exact {exact:.4f}")
    assert abs(wins / trials - exact) <= 0.01


@pytest.mark.criterion(9)
def test_cse_collapses_shared_square(request):
    x = Variable(0)
    e = Function("add", (Function("mul", (x, x)), Function("mul", (x, x))))
    dag = to_dag(e)
    d = square_grid(64)
    same = np.array_equal(eval_domain_vectorized(dag, d).view(np.uint64),
                          eval_domain_iterative(e, d).view(np.uint64))
    note(request, f"{len(dag)} DAG nodes, output unchanged: {same}")
    assert len(dag) == 3 and same
