"""Command line interface.

    spectile <subcommand> --config <path> [--out <path>] [--csv <path>] [--threads N]

Exit codes: 0 = pass, 1 = certified failure, 2 = input/validation error.
The default thread count comes from SPECTILE_THREADS (1 when unset).
"""

from __future__ import annotations

import argparse
import sys

from . import parallel, runner
from .config import parse_config
from .errors import (
    BoundaryCollisionError,
    ConfigError,
    InvalidLatticeError,
    WindowTooSmallError,
)
from .report import emit

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectile",
        description="Multi-tiling exponential basis certificates and "
        "shift-preserving operator decompositions",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in runner.SUBCOMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", required=True, help="path to the JSON config")
        sub.add_argument("--out", default=None, help="write the JSON report here "
                         "(default: stdout)")
        sub.add_argument("--csv", default=None, help="also write the per-item CSV table")
        sub.add_argument("--threads", type=int, default=None,
                         help="worker threads (default: SPECTILE_THREADS or 1)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    threads = args.threads if args.threads is not None else parallel.default_threads()
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"spectile: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        cfg = parse_config(text)
        report = runner.run(args.subcommand, cfg, threads=threads)
    except (ConfigError, BoundaryCollisionError, InvalidLatticeError,
            WindowTooSmallError) as exc:
        print(f"spectile: {exc}", file=sys.stderr)
        return EXIT_INPUT

    emit(report, "json", args.out)
    if args.csv is not None:
        emit(report, "csv", args.csv)
    print(
        f"spectile: {args.subcommand} "
        f"{'pass' if report.passed else 'FAIL'} "
        f"in {report.wall_time_s:.3f}s",
        file=sys.stderr,
    )
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
