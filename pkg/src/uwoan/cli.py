"""Command-line front end: single runs, turbidity sweeps, topology export.

Exit codes: 0 on success, 1 on usage errors, 2 on configuration or input
validation errors.  All outputs are canonical, so rerunning a command
with the same config and seed produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .engine import simulate
from .report import (
    CSV_COLUMNS,
    ReportError,
    aggregate,
    csv_row,
    export_topology,
    report_from_json,
    report_to_json,
    summary_csv_rows,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; remap to this tool's contract
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="uwoan",
                     description="Simulate initialization of a hybrid "
                                 "underwater optical-acoustic network")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one run and write artifacts")
    p_run.add_argument("--config", required=True, help="config file path")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--out", required=True, help="output directory")

    p_sweep = sub.add_parser("sweep",
                             help="run a seed sweep per attenuation value")
    p_sweep.add_argument("--config", required=True, help="config file path")
    p_sweep.add_argument("--c-list", required=True,
                         help="comma-separated attenuation coefficients")
    p_sweep.add_argument("--seeds", type=int, required=True,
                         help="number of seeds per coefficient (0..N-1)")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="parallel worker processes")

    p_topo = sub.add_parser("topo", help="export topology from a report file")
    p_topo.add_argument("--report", required=True, help="report JSON path")
    p_topo.add_argument("--format", default="json", choices=("json", "dot"))
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    result = simulate(config, seed=args.seed, collect_trace=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_to_json(result.report))
    (out / "trace.log").write_text("\n".join(result.trace_lines) + "\n")
    (out / "topology.json").write_text(export_topology(result.report, "json"))
    (out / "topology.dot").write_text(export_topology(result.report, "dot"))
    r = result.report
    print(f"seed {r.seed} c0 {r.c0}: access {r.access_rate:.4f}, "
          f"dual-hop {r.dual_hop_rate:.4f}, "
          f"{r.n_failed} failed, {r.n_unresolved} unresolved -> {out}")
    return 0


def _sweep_one(task):
    config, c0, seed = task
    report = simulate(replace(config, c0=c0, seed=seed)).report
    return c0, seed, csv_row(report), report


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    try:
        c_values = [float(tok) for tok in args.c_list.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--c-list is not a list of numbers: '{args.c_list}'")
    if not c_values:
        raise ConfigError("--c-list is empty")
    if args.seeds <= 0:
        raise ConfigError(f"--seeds must be positive, got {args.seeds}")
    for c0 in c_values:
        replace(config, c0=c0)  # validate every coefficient up front
    tasks = [(config, c0, seed) for c0 in c_values for seed in range(args.seeds)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_one, tasks, chunksize=16))
    else:
        results = [_sweep_one(task) for task in tasks]
    results.sort(key=lambda item: (item[0], item[1]))
    summaries = aggregate([item[3] for item in results])

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for _, _, row, _ in results:
        writer.writerow(row)
    for row in summary_csv_rows(summaries):
        writer.writerow(row)
    Path(args.out).write_text(buffer.getvalue())
    for s in summaries:
        print(f"c0 {s['c0']}: mean access {s['mean_access_rate']:.4f} "
              f"(sigma {s['std_access_rate']:.4f}), "
              f"mean dual-hop {s['mean_dual_hop_rate']:.4f} "
              f"over {s['n_runs']} runs")
    return 0


def _cmd_topo(args) -> int:
    path = Path(args.report)
    if not path.is_file():
        raise ConfigError(f"report file not found: {path}")
    try:
        report = report_from_json(path.read_text())
    except ReportError as exc:
        raise ConfigError(str(exc))
    sys.stdout.write(export_topology(report, args.format))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_topo(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
