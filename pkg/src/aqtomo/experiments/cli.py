"""Command-line interface.

Subcommands:

* ``run``      execute a scaling experiment described by a config file
* ``targets``  list the built-in benchmark targets
* ``fit``      fit a log-log slope to an existing result CSV
* ``selftest`` run a quick invariant suite and report pass/fail
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .harness import VERSION, fit_loglog_slope, run_scaling
from .io import emit_results, read_result_csv
from .selftest import run_selftest
from .targets import BUILTIN_TARGET_NAMES, builtin_target, expected_task


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqtomo",
        description="Adaptive quantum tomography simulations and scaling runs",
    )
    parser.add_argument("--version", action="version", version=f"aqtomo {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scaling experiment from a config file")
    run_p.add_argument("--config", required=True, help="path to a key-value config file")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    run_p.add_argument("--out", default=None, help="output path (default: stdout CSV)")
    run_p.add_argument("--format", choices=("csv", "json", "both"), default="csv")

    sub.add_parser("targets", help="list built-in target names")

    fit_p = sub.add_parser("fit", help="fit a log-log slope to an existing CSV")
    fit_p.add_argument("csv", help="result CSV written by the run subcommand")

    sub.add_parser("selftest", help="run the quick invariant suite")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = type(config)(**{**config.to_dict(), "seed": args.seed})
    result = run_scaling(config, workers=args.workers)
    print(
        f"# slope={result.slope:.4f} intercept={result.intercept:.4f} "
        f"r2={result.r2:.4f}",
        file=sys.stderr,
    )
    if args.out is None:
        from .io import CSV_FIELDS, _csv_rows

        print(",".join(CSV_FIELDS))
        for row in _csv_rows(result):
            print(",".join(row))
    else:
        for path in emit_results(result, args.out, args.format):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_targets() -> int:
    for name in BUILTIN_TARGET_NAMES:
        target = builtin_target(name)
        print(f"{name}\t{expected_task(target)}\td={target.dim}")
    return 0


def _cmd_fit(args) -> int:
    rows = read_result_csv(args.csv)
    slope, intercept, r2 = fit_loglog_slope(
        (row["N"], row["mean_infidelity"]) for row in rows
    )
    print(f"slope={slope:.6f} intercept={intercept:.6f} r2={r2:.6f}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "targets":
        return _cmd_targets()
    if args.command == "fit":
        return _cmd_fit(args)
    if args.command == "selftest":
        return run_selftest()
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
