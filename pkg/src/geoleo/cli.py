"""Command-line entry point: ``geoleo {analytic,montecarlo,validate,sweep}``.

Exit status: 0 on success, 1 when ``validate`` finds a z-score above the
threshold, 2 for usage or configuration errors, 3 when any grid point failed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ASSOCIATION_MODES, ConfigError, RunConfig, default_run_config, dump_config, parse_config
from .sweep import run_sweep, to_csv, write_outputs

EXIT_OK = 0
EXIT_GATE = 1
EXIT_USAGE = 2
EXIT_POINT_FAILED = 3

_U64_MAX = 2**64 - 1


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= _U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64 - 1], got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoleo",
        description="Coverage analysis and simulation for hybrid GEO/LEO satellite downlinks.",
    )
    parser.add_argument("--version", action="version", version=f"geoleo {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value config file (defaults to the built-in scenario)")
    common.add_argument("--seed", type=_u64, default=0, help="Monte Carlo seed (default 0)")
    common.add_argument("--trials", type=_positive_int, default=100_000, help="Monte Carlo snapshots per point (default 100000)")
    common.add_argument("--out", type=Path, help="CSV path; the .dat plot data and .manifest.json are written next to it. Default: CSV on stdout")
    common.add_argument("--workers", type=_positive_int, default=1, help="worker processes (default 1)")
    common.add_argument("--association", choices=ASSOCIATION_MODES, help="override analysis.association")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("analytic", parents=[common], help="evaluate the closed-form expressions over the sweep grid")
    sub.add_parser("montecarlo", parents=[common], help="simulate the sweep grid")
    sub.add_parser("validate", parents=[common], help="analytic and Monte Carlo side by side with a z-score gate")
    sub.add_parser("sweep", parents=[common], help="run the mode named by sweep.mode in the config")
    dump = sub.add_parser("dump-config", help="print a config in canonical keys")
    dump.add_argument("--config", type=Path)
    return parser


def _command_line(argv) -> str:
    words = list(argv) if argv is not None else sys.argv[1:]
    return " ".join(["geoleo"] + [str(w) for w in words])


def _load(args) -> RunConfig:
    run = parse_config(args.config) if args.config is not None else default_run_config()
    if getattr(args, "association", None):
        run = replace(run, settings=replace(run.settings, association=args.association))
    return run


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _load(args)
    except ConfigError as exc:
        print(f"geoleo: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "dump-config":
        sys.stdout.write(dump_config(run))
        return EXIT_OK

    mode = run.sweep.mode if args.command == "sweep" else args.command
    result = run_sweep(run, mode, seed=args.seed, trials=args.trials, workers=args.workers)
    mc_used = mode != "analytic"
    seed = args.seed if mc_used else None
    trials = args.trials if mc_used else None

    if args.out is None:
        sys.stdout.write(to_csv(result))
    else:
        try:
            paths = write_outputs(result, run, args.out, seed=seed, trials=trials, command=_command_line(argv))
        except OSError as exc:
            print(f"geoleo: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print("wrote " + ", ".join(str(p) for p in paths), file=sys.stderr)

    for row in result.rows:
        if row.get("error"):
            print(f"geoleo: {result.variable}={row[result.variable]}: {row['error']}", file=sys.stderr)
    if mode == "validate":
        z = result.z_max
        threshold = run.settings.z_threshold
        verdict = "FAIL" if z > threshold else "ok"
        print(f"geoleo: validate max |z| = {z:.3f} (threshold {threshold:g}) {verdict}", file=sys.stderr)
        if z > threshold:
            return EXIT_GATE
    if result.failed_points:
        return EXIT_POINT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
