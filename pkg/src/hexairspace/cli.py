"""Command-line entry point: ``hexairspace run|sweep|demo|entropy``.

Exit status is 0 on success, 1 for a bad configuration or input file, and 2
when a run finished with stragglers or out-of-grid events.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional

from . import demos
from .entropy_metrics import grid_entropy
from .hexgrid import GridSpec
from .output import TraceWriter, read_traffic, write_results, write_summary
from .scenario import ConfigError, ScenarioConfig, SweepConfig, load_config, run_sweep, summarize

EXIT_OK, EXIT_CONFIG, EXIT_ANOMALY = 0, 1, 2
FULL_SEEDS = 100


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _load(path: Optional[str]) -> tuple[ScenarioConfig, Optional[SweepConfig]]:
    if path is None:
        return ScenarioConfig(), None
    try:
        return load_config(path)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None


def _print_metrics(cfg: ScenarioConfig, m, out=None) -> None:
    out = out or sys.stdout
    ent = m.final_entropy
    print(f"k_t                  {cfg.k_t:g}", file=out)
    print(f"n_aircraft           {cfg.n_aircraft}", file=out)
    print(f"seed                 {cfg.seed}", file=out)
    print(f"epsilon_clamp        {cfg.epsilon_clamp:g}", file=out)
    print(f"arrived              {len(m.travel_times)}", file=out)
    print(f"mean_travel_time_s   {m.mean_travel_time:.6g}", file=out)
    print(f"grid_entropy_nats    {ent.value:.6g}", file=out)
    print(f"active_cells         {ent.cells_counted}", file=out)
    print(f"min_separation_mi    {m.min_separation:.6g}", file=out)
    print(f"stragglers           {len(m.stragglers)}", file=out)
    print(f"out_of_grid_events   {m.anomalies}", file=out)


def _status(*metrics) -> int:
    bad = any(m.stragglers or m.anomalies for m in metrics)
    return EXIT_ANOMALY if bad else EXIT_OK


def cmd_run(args) -> int:
    cfg, _ = _load(args.config)
    changes = {k: v for k, v in (("k_t", args.k_t), ("n_aircraft", args.n), ("seed", args.seed)) if v is not None}
    cfg = cfg.replace(**changes)
    from .scenario import run_scenario

    if args.trace:
        with open(args.trace, "w") as fh:
            _, m = run_scenario(cfg, trace=TraceWriter(fh))
    else:
        _, m = run_scenario(cfg)
    _print_metrics(cfg, m)
    return _status(m)


def cmd_sweep(args) -> int:
    base, sweep = _load(args.config)
    sweep = sweep or SweepConfig(base=base)
    if args.k_t is not None:
        sweep = SweepConfig(sweep.base, args.k_t, sweep.n_values, sweep.seeds)
    if args.n is not None:
        sweep = SweepConfig(sweep.base, sweep.k_t_values, args.n, sweep.seeds)
    if args.full:
        sweep = SweepConfig(sweep.base, sweep.k_t_values, sweep.n_values, tuple(range(FULL_SEEDS)))
    elif args.seeds is not None:
        sweep = SweepConfig(sweep.base, sweep.k_t_values, sweep.n_values, tuple(range(args.seeds)))
    rows = run_sweep(sweep, parallelism=args.parallelism)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_results(rows, out)
    summary_path = Path(args.summary) if args.summary else out.with_name(out.stem + "_summary.csv")
    write_summary(summarize(rows), summary_path)
    failed = sum(r.error is not None for r in rows)
    print(f"{len(rows)} runs ({failed} failed) -> {out}, {summary_path}")
    return EXIT_ANOMALY if failed or any(r.stragglers for r in rows) else EXIT_OK


def cmd_demo(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.name == "convoy":
        results = []
        for k_t in (0.0, 3.0):
            path = out_dir / f"convoy_kt{k_t:g}.trace"
            with open(path, "w") as fh:
                res = demos.run_convoy(k_t, trace=TraceWriter(fh))
            results.append(res)
            print(f"k_t={k_t:g}: ownship overlaps {len(res.overlap)}/{len(res.corridor_interior)} "
                  f"corridor interior cells -> {path}")
        return _status(*(r.metrics for r in results))
    path = out_dir / "headon.trace"
    with open(path, "w") as fh:
        _, m = demos.run_headon(trace=TraceWriter(fh))
    print(f"both arrived: {len(m.travel_times) == 2}; min separation {m.min_separation:.6g} mi -> {path}")
    return _status(m)


def cmd_entropy(args) -> int:
    if args.config:
        grid = _load(args.config)[0].grid
    else:
        grid = GridSpec(args.width, args.height)
    try:
        tmap = read_traffic(args.file, grid)
    except FileNotFoundError:
        raise ConfigError(f"file not found: {args.file}") from None
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{args.file}: {exc}") from None
    ent = grid_entropy(tmap)
    mean = ent.mean_per_active_cell
    print(f"grid_entropy_nats       {ent.value:.6g}")
    print(f"active_cells            {ent.cells_counted}")
    print(f"mean_cell_entropy_nats  {mean:.6g}" if math.isfinite(mean) else "mean_cell_entropy_nats  nan")
    print(f"traversals              {tmap.total()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hexairspace", description="Hex-grid airspace traffic simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario and print its metrics")
    r.add_argument("--config", help="TOML scenario file")
    r.add_argument("--k-t", type=float, dest="k_t")
    r.add_argument("--n", type=int, help="number of aircraft")
    r.add_argument("--seed", type=int)
    r.add_argument("--trace", help="write a trajectory trace to this path")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="seeded sweep over k_t x N")
    s.add_argument("--config", help="TOML file with an optional [sweep] table")
    s.add_argument("--k-t", type=_csv_floats, dest="k_t", help="comma-separated k_t values")
    s.add_argument("--n", type=_csv_ints, help="comma-separated aircraft counts")
    s.add_argument("--seeds", type=int, help="use seeds 0..SEEDS-1")
    s.add_argument("--full", action="store_true", help=f"use {FULL_SEEDS} seeds per point")
    s.add_argument("--parallelism", "-j", type=int, default=1)
    s.add_argument("--out", default="results.csv")
    s.add_argument("--summary", help="summary CSV path (default: <out>_summary.csv)")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("demo", help="scripted scenarios written as trace files")
    d.add_argument("name", choices=("convoy", "headon"))
    d.add_argument("--out-dir", default=".")
    d.set_defaults(func=cmd_demo)

    e = sub.add_parser("entropy", help="entropy of the traffic records in a trace or dump file")
    e.add_argument("file")
    e.add_argument("--config", help="take the grid from this TOML file")
    e.add_argument("--width", type=int, default=12)
    e.add_argument("--height", type=int, default=12)
    e.set_defaults(func=cmd_entropy)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
