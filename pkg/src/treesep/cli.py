"""Command-line front end: one subcommand per experiment.

Flags override the config file through the same validation path, so
``treesep speed --config base.cfg --rho 0.2`` behaves exactly like editing
``rho`` in the file.  Exit codes: 0 all gates pass, 1 a gate fails,
2 invalid configuration or truncation breach, 3 IO failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import EXPERIMENTS, ConfigError, parse_config
from .experiments import EXIT_IO, run_experiment

_HELP = {
    "simulate": "sample tagged-particle trajectories on a time grid (no gate)",
    "speed": "long-run speed estimate against the reference drift",
    "clt": "studentized normality and variance-growth diagnostics",
    "martingale": "zero-mean gate for the compensated horodistance",
    "stationarity": "occupancy frequencies of the environment around the tag",
    "oracle": "exact generator residuals (invariance, detailed balance) on small balls",
}

# (argparse attribute, config key); values pass through parse_config untouched
_FLAG_KEYS = (
    "d",
    "rho",
    "kernel",
    "t",
    "replicas",
    "seed",
    "ball_radius",
    "strict_boundary",
    "workers",
    "plots",
    "out_dir",
)


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key-value config file; flags below override it")
    sub.add_argument("--d", help="tree degree (required here or in the file)")
    sub.add_argument("--rho", help="particle density in [0, 1] (default 0.5)")
    sub.add_argument("--kernel", help="'sep' or a [(length, rate), ...] literal")
    sub.add_argument("--t", help="comma-separated strictly increasing sample times")
    sub.add_argument("--replicas", help="number of independent replicas (default 1000)")
    sub.add_argument("--seed", help="64-bit master seed (default 0)")
    sub.add_argument("--ball-radius", dest="ball_radius", help="truncation radius, or 'auto'")
    sub.add_argument("--strict-boundary", dest="strict_boundary", help="on|off (default on)")
    sub.add_argument("--workers", help="worker process count (default 1)")
    sub.add_argument("--plots", help="on|off: emit SVG plots (default off)")
    sub.add_argument("--out-dir", dest="out_dir", help="artifact directory (default: results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesep",
        description="Monte Carlo and exact-generator experiments for exclusion "
        "processes with a tagged particle on regular trees.",
    )
    subs = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sub = subs.add_parser(name, help=_HELP[name])
        _add_common_flags(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return EXIT_IO
    overrides = {"experiment": args.experiment}
    for key in _FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    try:
        config = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if config.out_dir is None:
        config = dataclasses.replace(config, out_dir="results")

    result = run_experiment(config)
    summary = result.summary
    clt = summary.get("clt") or {}
    if clt.get("warning"):
        print(f"warning: {clt['warning']}", file=sys.stderr)
    if "error" in summary:
        print(f"error: {summary['error']}", file=sys.stderr)
    verdict = "pass" if summary.get("pass") else "FAIL"
    print(f"[{config.experiment}] {verdict} (exit {result.exit_code})")
    for path in result.artifacts:
        print(f"  wrote {path}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
