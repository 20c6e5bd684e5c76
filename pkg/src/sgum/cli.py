"""Command line entry point: ``sgum <subcommand> [--config FILE] [--seed N] ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig, load_config, run_experiment

# subcommand -> (default kind, kinds it accepts)
SUBCOMMANDS = {
    "spectrum": ("spectrum-chain", {"spectrum-chain", "spectrum-theta-tradeoff"}),
    "power": ("power-sweep", {"power-sweep"}),
    "random-access": ("random-access-sweep", {"random-access-sweep"}),
    "stationary": ("stationary-analysis", {"stationary-analysis"}),
    "sweep": ("spectrum-sweep-PL", None),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (default, _) in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run an experiment (default kind: {default})")
        p.add_argument("--config", type=Path, help="JSON config or a run manifest")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--replications", type=int, help="replication count (overrides the config)")
        p.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory")
    return parser


def resolve_config(command: str, args) -> ExperimentConfig:
    default, accepted = SUBCOMMANDS[command]
    cfg = load_config(args.config) if args.config else ExperimentConfig(kind=default)
    if accepted is not None and cfg.kind not in accepted:
        raise ConfigError(f"'{command}' cannot run experiment kind {cfg.kind!r}")
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.replications is not None:
        changes["replications"] = args.replications
    # replace() re-runs validation on the overridden values
    return dataclasses.replace(cfg, **changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        result = run_experiment(cfg, args.out_dir)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(json.dumps({"out_dir": str(args.out_dir), "files": sorted(result.tables)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
