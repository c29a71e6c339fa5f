"""Batch command-line interface.

Every subcommand maps to one harness experiment; all runs require an
explicit seed and write their artifacts plus a manifest into the output
directory (flag --out, else $KPZLAB_OUT, else ./kpzlab_out).
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import EXPERIMENTS, ConfigError, RunConfig, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpzlab",
        description="simulation lab for exclusion, six-vertex and "
                    "Hall-Littlewood line-ensemble experiments",
    )
    sub = parser.add_subparsers(dest="experiment", metavar="experiment")
    for name in sorted(EXPERIMENTS):
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--seed", type=int, required=True,
                        help="master seed (required; no wall-clock default)")
        sp.add_argument("--replicas", type=int, default=1)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", default="", help="output directory")
        sp.add_argument("--config", default=None,
                        help="JSON file with experiment parameters")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.experiment is None:
        parser.print_usage(sys.stderr)
        return 2
    params = {}
    if args.config:
        with open(args.config) as f:
            params = json.load(f)
    try:
        cfg = RunConfig(experiment=args.experiment, seed=args.seed,
                        replicas=args.replicas, workers=args.workers,
                        out_dir=args.out, params=params)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
