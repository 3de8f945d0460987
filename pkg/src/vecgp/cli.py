"""Command-line front end: ``vecgp run | bench | report``.

Exit codes: 0 success, 1 configuration or input error, 2 memory budget
exceeded.
"""

import argparse
import json
import logging
import os
import sys

from . import bench, plotting
from .config import ConfigError, parse_config, serialize_config
from .errors import CapacityError, InvalidParameterError
from .evaluation import Problem, pagie_target, square_grid, write_buffer
from .evolution import run
from .expr import parse, write_population

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CAPACITY = 2

log = logging.getLogger("vecgp")


def _overrides(args):
    pairs = []
    backend_key = "backends" if args.command == "bench" else "backend"
    for flag, key in (("backend", backend_key), ("side", "side"), ("runs", "runs"),
                      ("seed", "seed"), ("out", "out"), ("workers", "workers")):
        value = getattr(args, flag, None)
        if value is not None:
            pairs.append((key, value))
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        pairs.append((key, value))
    return pairs


def _load_config(args):
    cfg = parse_config(args.config, _overrides(args))
    if not cfg.workers and os.environ.get("VECGP_WORKERS"):
        try:
            cfg.workers = int(os.environ["VECGP_WORKERS"])
        except ValueError:
            raise ConfigError("VECGP_WORKERS must be an integer") from None
    return cfg


def cmd_run(cfg) -> int:
    """One evolutionary run; writes run.json, best.pop and trajectory.csv."""
    os.makedirs(cfg.out, exist_ok=True)
    ps = cfg.primitive_set()
    domain = square_grid(cfg.side, cfg.domain_lo, cfg.domain_hi, mem_budget=cfg.mem_budget)
    target = pagie_target(domain)
    problem = Problem(domain, target, cfg.backend, cache=cfg.cache, workers=cfg.worker_count,
                      chunk_size=cfg.chunk_size or None, mem_budget=cfg.mem_budget)
    params = cfg.run_params()
    result = run(params, problem, ps)
    payload = {
        "config": serialize_config(cfg),
        "params": params.to_dict(),
        "side": cfg.side,
        "points": domain.point_count,
        "backend": cfg.backend,
        "cache_hits": problem.cache.hits if problem.cache is not None else 0,
        "backend_calls": problem.backend_calls,
        **result.to_dict(),
    }
    with open(os.path.join(cfg.out, "run.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
    best = parse(result.best_text, ps)
    write_population(os.path.join(cfg.out, "best.pop"), [best])
    bench.write_csv(
        os.path.join(cfg.out, "trajectory.csv"),
        bench.TRAJECTORY_COLUMNS,
        ([cfg.side, cfg.backend, 0, g, f] for g, f, _ in result.best_per_generation),
    )
    if cfg.export_buffers:
        write_buffer(os.path.join(cfg.out, "target.f64"), target, domain)
        write_buffer(os.path.join(cfg.out, "best.f64"), problem.predict(best), domain)
    print(f"best RMSE {result.best_rmse:.6g} after {len(result.best_per_generation) - 1} "
          f"generations in {result.timings.total_s:.2f} s")
    return EXIT_OK


def write_bench_outputs(report, out_dir, charts=True):
    os.makedirs(out_dir, exist_ok=True)
    bench.write_raw_csv(os.path.join(out_dir, "raw.csv"), report)
    bench.write_aggregate_csv(os.path.join(out_dir, "aggregate.csv"), report)
    bench.write_trajectory_csv(os.path.join(out_dir, "trajectories.csv"), report)
    bench.write_table_csv(os.path.join(out_dir, "table.csv"), report)
    report.save(os.path.join(out_dir, "report.json"))
    if charts:
        plotting.render_report(report, out_dir)


def cmd_bench(cfg) -> int:
    report = bench.run_benchmark(
        cfg.run_params(),
        bench.test_ladder(cfg.min_side, cfg.max_side),
        cfg.backend_list(),
        time_budget_s=cfg.time_budget_s,
        mem_budget_bytes=cfg.mem_budget,
        ps=cfg.primitive_set(),
        domain_range=(cfg.domain_lo, cfg.domain_hi),
        workers=cfg.worker_count,
        chunk_size=cfg.chunk_size or None,
        cache=cfg.cache,
    )
    write_bench_outputs(report, cfg.out, cfg.charts)
    for e in report.entries:
        stats = f"dnf={e.dnf_reason}" if e.dnf_reason else (
            f"avg={e.avg_total_s:.3f}s std={e.std_total_s:.3f}s n={e.n_runs}")
        print(f"{e.label:>8} {e.backend:<15} {stats}")
    return EXIT_OK


def merge_reports(paths):
    merged = None
    for p in paths:
        try:
            rep = bench.BenchReport.load(p)
        except OSError as exc:
            raise InvalidParameterError(f"{p}: {exc.strerror}") from None
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidParameterError(f"{p}: not a benchmark report ({exc})") from None
        if merged is None:
            merged = rep
        else:
            merged.entries += rep.entries
            merged.records += rep.records
    return merged


def cmd_report(paths, out_dir, baseline=None) -> int:
    """Render charts and a speedup table from saved ``report.json`` files."""
    report = merge_reports(paths)
    os.makedirs(out_dir, exist_ok=True)
    written = plotting.render_report(report, out_dir)
    backends = list(dict.fromkeys(e.backend for e in report.entries))
    baseline = baseline or ("iterative" if "iterative" in backends else backends[0])
    rows = bench.speedup_table(report, baseline)
    path = os.path.join(out_dir, "speedup.csv")
    bench.write_csv(path, ["test_set", "backend", "speedup"], rows)
    for p in written + [path]:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vecgp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--backend", help="evaluation backend (bench: comma-separated list)")
        sp.add_argument("--side", type=int, help="grid side length for run")
        sp.add_argument("--runs", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any configuration key (repeatable)")

    common(sub.add_parser("run", help="single evolutionary run"))
    common(sub.add_parser("bench", help="scaling benchmark over the grid ladder"))
    rp = sub.add_parser("report", help="render charts from benchmark reports")
    rp.add_argument("reports", nargs="+", help="report.json files")
    rp.add_argument("--out", default=".", help="output directory")
    rp.add_argument("--baseline", help="backend used as the speedup baseline")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            return cmd_report(args.reports, args.out, args.baseline)
        cfg = _load_config(args)
        return cmd_run(cfg) if args.command == "run" else cmd_bench(cfg)
    except CapacityError as exc:
        print(f"vecgp: memory budget exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InvalidParameterError as exc:
        print(f"vecgp: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
