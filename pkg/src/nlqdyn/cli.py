"""Command line entry point.

    nlqdyn run CONFIG.json [--out DIR] [--seed N]
    nlqdyn --list-scenarios

Exit status: 0 when every check passes, 1 when any check fails, 2 for a bad
configuration, 3 for an integration failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import SCENARIOS, ConfigError, load_config
from .dynamics import IntegrationError
from .scenarios import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlqdyn", description="Nonlinear density-matrix dynamics scenarios.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--list-scenarios", action="store_true", help="list scenario names and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run the scenario described by a JSON config")
    p_run.add_argument("config", help="path to the JSON config")
    p_run.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    p_run.add_argument("--seed", type=int, default=0, help="seed for randomized scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.list_scenarios:
        for name, desc in SCENARIOS.items():
            print(f"{name:16s} {desc}")
        return 0
    if args.command != "run":
        parser.print_help()
        return 2

    try:
        cfg = load_config(args.config)
        report = run(cfg, args.out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"integration error in {cfg.scenario}: {exc}", file=sys.stderr)
        return 3

    print(f"scenario {report.scenario} (config {report.config_sha256[:12]})")
    for check in report.checks:
        print(check.line())
    print("PASSED" if report.passed else "FAILED")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
