#!/usr/bin/env python3
"""
Command-line entry point for the B92 simulator

Usage:
    python src/cli.py run --config CONFIG [--seed N] [--out CSV] [--records CSV] [--db PATH]
    python src/cli.py sweep --config CONFIG --axis AXIS --values V1,V2,... [--trials N] [--workers N]
    python src/cli.py table1
    python src/cli.py history [--db PATH] [--run ID [--records CSV | --show-config]] [--purge KEEP]

Exit codes:
    0  success
    1  invalid configuration or arguments
    2  I/O error (missing config, unwritable output, database)
    3  Table 1 replay does not reproduce the published key
"""

import asyncio
import argparse
import json
import logging
import sqlite3
import sys
from pathlib import Path
from typing import List, Optional, Sequence

# Add parent directory to path to enable imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src import __version__
from src.config import SessionConfig, ConfigError, resolve_seed, validate
from src.database import ResultsStore
from src.harness import (
    AXES, build_row, sweep, report, records_csv, summary, run_table1, format_table1
)
from src.models import PulseRecord, SweepRow
from src.protocol import run_session


logger = logging.getLogger("qkd_sim")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_FIXTURE_MISMATCH = 3

DEFAULT_DB_PATH = "data/qkd_sim.db"


def configure_logging(verbose: bool = False, log_file: Optional[str] = None):
    """
    Log to stderr and, optionally, append to a file

    Args:
        verbose: DEBUG level instead of INFO
        log_file: Extra file handler target
    """
    formatter = logging.Formatter("[%(asctime)s] %(levelname)s %(name)s: %(message)s")
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, mode="a"))

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _parse_values(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"--values must be comma-separated numbers, got {text!r}")
    if not values:
        raise ValueError("--values needs at least one number")
    return values


def _write_output(text: str, path: Optional[str]):
    """Write to a file, or stdout when no path is given"""
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)
    logger.info("Wrote %s", path)


async def _archive(db_path: str, label: str, cfg: SessionConfig, rows: Sequence[SweepRow],
                   records: Optional[Sequence[PulseRecord]] = None, axis: Optional[str] = None) -> int:
    store = ResultsStore(db_path)
    await store.initialize()
    run_id = await store.save_run(label, cfg, rows, records=records, axis=axis)
    logger.info("Archived %s as run %d in %s", label, run_id, db_path)
    return run_id


def _load_config(path: str, cli_seed: Optional[int]) -> SessionConfig:
    cfg = resolve_seed(SessionConfig.load(path), cli_seed)
    return validate(cfg)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args.seed)
    result = run_session(cfg)
    row = build_row(cfg, result)

    _write_output(report([row]), args.out)
    if args.records:
        _write_output(records_csv(result.records), args.records)
    if args.db:
        asyncio.run(_archive(args.db, "run", cfg, [row], records=result.records))

    # stdout carries the CSV when no --out is given
    print(summary([row]), file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config, args.seed)
    values = _parse_values(args.values)
    rows = sweep(cfg, args.axis, values, trials=args.trials, workers=args.workers)

    _write_output(report(rows), args.out)
    if args.db:
        asyncio.run(_archive(args.db, f"sweep {args.axis}", cfg, rows, axis=args.axis))

    print(summary(rows), file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_table1(args: argparse.Namespace) -> int:
    replay = run_table1()
    print(format_table1(replay))
    print()
    if replay.matches:
        print(f"✅ Sifted key {replay.key} at positions {replay.positions}")
        return EXIT_OK

    print(f"❌ Sifted key {replay.key} at positions {replay.positions} "
          f"does not match the published table")
    return EXIT_FIXTURE_MISMATCH


async def _history(args: argparse.Namespace) -> int:
    store = ResultsStore(args.db)
    await store.initialize()

    if args.purge is not None:
        if args.purge < 0:
            raise ValueError(f"--purge must be >= 0, got {args.purge}")
        deleted = await store.purge_runs(args.purge)
        print(f"✅ Purged {deleted} run(s), kept the newest {args.purge}")
        return EXIT_OK

    if args.run is None:
        if args.records or args.show_config:
            raise ValueError("--records and --show-config need --run ID")
        runs = await store.get_runs(args.limit)
        if not runs:
            print("No archived runs")
            return EXIT_OK
        for run in runs:
            axis = f" [{run['axis']}]" if run['axis'] else ""
            print(f"#{run['id']:<5} {run['created_at']}  {run['label']}{axis}  ({run['row_count']} rows)")
        return EXIT_OK

    rows = await store.get_run_rows(args.run)
    if not rows:
        print(f"❌ No run with id {args.run}")
        return EXIT_INVALID

    if args.show_config:
        cfg = await store.get_run_config(args.run)
        print(json.dumps(cfg.to_dict(), indent=2))
        return EXIT_OK

    if args.records:
        records = await store.get_run_records(args.run)
        if records is None:
            print(f"❌ Run {args.run} has no pulse ledger (sweeps store stats only)")
            return EXIT_INVALID
        _write_output(records_csv(records), args.records)
        return EXIT_OK

    sys.stdout.write(report(rows))
    return EXIT_OK


def cmd_history(args: argparse.Namespace) -> int:
    return asyncio.run(_history(args))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkd-sim",
        description="Monte-Carlo simulator for phase-encoded B92 key distribution"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--log-file", help="Also append log lines to this file")

    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one session and print its stats CSV")
    run.add_argument("--config", required=True, help="Session config (JSON or YAML)")
    run.add_argument("--seed", type=int, help="Override the config seed")
    run.add_argument("--out", help="Stats CSV path (default: stdout)")
    run.add_argument("--records", help="Also write the per-pulse ledger CSV here")
    run.add_argument("--db", help="Archive the run in this results database")
    run.set_defaults(handler=cmd_run)

    sw = sub.add_parser("sweep", help="Sweep one parameter and print the stats CSV")
    sw.add_argument("--config", required=True, help="Base session config (JSON or YAML)")
    sw.add_argument("--axis", required=True, choices=AXES, help="Parameter to sweep")
    sw.add_argument("--values", required=True, help="Comma-separated axis values")
    sw.add_argument("--trials", type=int, default=1, help="Trials per value (default: 1)")
    sw.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1)")
    sw.add_argument("--seed", type=int, help="Override the base seed")
    sw.add_argument("--out", help="Stats CSV path (default: stdout)")
    sw.add_argument("--db", help="Archive the sweep in this results database")
    sw.set_defaults(handler=cmd_sweep)

    t1 = sub.add_parser("table1", help="Replay the published 8-pulse example")
    t1.set_defaults(handler=cmd_table1)

    hist = sub.add_parser("history", help="List, export or purge archived runs")
    hist.add_argument("--db", default=DEFAULT_DB_PATH, help=f"Results database (default: {DEFAULT_DB_PATH})")
    hist.add_argument("--run", type=int, help="Print this run's stats CSV")
    hist.add_argument("--limit", type=int, default=20, help="Runs to list (default: 20)")
    hist.add_argument("--records", help="With --run: write the stored pulse ledger CSV here")
    hist.add_argument("--show-config", action="store_true", help="With --run: print the stored session config")
    hist.add_argument("--purge", type=int, metavar="KEEP", help="Delete all but the newest KEEP runs")
    hist.set_defaults(handler=cmd_history)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.log_file)

    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, sqlite3.Error) as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
