"""Command line interface.

Three verbs:

* ``network``       -- export an Apollonian network as a CSV edge list or DOT.
* ``run``           -- compute the passage-time matrix and degree tables for
  one experiment/view/initial combination.
* ``distribution``  -- emit the unmonitored per-step detection table.

Exit codes: 0 on success, 2 for configuration errors (unknown keys, bad
paths), 3 for numeric failures (a grid or state failing validation).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    ConfigError,
    ExperimentConfig,
    INITIAL_KEYS,
    VIEW_KEYS,
    emit_distribution,
    export_network,
    run_experiment,
)
from .tom import InvalidTomError
from .walks import WALK_LABELS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--experiment", required=True, choices=WALK_LABELS,
                   help="walk family to run")
    p.add_argument("--generation", type=int, default=None,
                   help="Apollonian generation (where the family allows it)")
    p.add_argument("--view", default="identity", metavar="KEY",
                   help=f"view operator key, one of {', '.join(VIEW_KEYS)}")
    p.add_argument("--initial", default="default", metavar="KEY",
                   help=f"initial internal state, one of {', '.join(INITIAL_KEYS)}")
    p.add_argument("--threshold", type=float, default=1e-6,
                   help="undetected-residual threshold ending a finite run")
    p.add_argument("--t-max", type=int, default=10**6, dest="t_max",
                   help="hard step limit per monitored run")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="delimited output format")
    p.add_argument("--out", required=True, type=Path,
                   help="output directory for tables and figures")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes for the passage grid (default: all cores)")
    p.add_argument("--no-plot", action="store_true",
                   help="skip rendering the companion figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomwalk",
        description="Open quantum walks on Apollonian networks: passage-time experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_net = sub.add_parser("network", help="export an Apollonian network")
    p_net.add_argument("--generation", type=int, required=True)
    p_net.add_argument("--format", choices=("csv", "dot"), default="csv")
    p_net.add_argument("--out", required=True, type=Path, help="output file path")

    p_run = sub.add_parser("run", help="passage-time matrix and degree tables")
    _add_experiment_flags(p_run)

    p_dist = sub.add_parser("distribution", help="unmonitored evolution table")
    _add_experiment_flags(p_dist)
    p_dist.add_argument("--steps", type=int, default=20,
                        help="number of evolution steps to tabulate")
    p_dist.add_argument("--source", type=int, default=None,
                        help="starting vertex (default: highest degree)")

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=args.experiment,
        generation=args.generation,
        view=args.view,
        initial=args.initial,
        threshold=args.threshold,
        t_max=args.t_max,
        fmt=args.format,
        out=args.out,
        jobs=args.jobs,
        plot=not args.no_plot,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "network":
            written = [export_network(args.generation, args.format, args.out)]
        elif args.command == "run":
            written = run_experiment(_config_from_args(args))
        else:
            written = emit_distribution(_config_from_args(args), args.steps, args.source)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidTomError, ValueError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
