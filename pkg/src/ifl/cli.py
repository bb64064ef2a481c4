"""Command-line entry point.

    ifl <subcommand> [--config <path>] [--seed <u64>] [--out <dir>]
                     [--replicas <n>] [--force]

Subcommands: simulate, pde, hydro, fluct, comb-verify, oracle-report,
sample-check, martingale-report.  Configuration files use a flat
``section.key = value`` format (see harness.parse_config_text); the
environment variable IFL_SEED overrides any configured or flagged seed.

Exit codes: 0 success, 1 verification failures recorded, 2 usage or
hypothesis-gate errors.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (ExperimentConfig, HypothesisError, UsageError,
                      parse_config_text, run_hydro, run_fluct, run_comb_verify,
                      run_oracle_report, run_sample_check,
                      run_martingale_report, run_pde, run_simulate)

_COMMANDS = {
    "simulate": ("sim", run_simulate),
    "pde": ("pde", run_pde),
    "hydro": ("hydro", run_hydro),
    "fluct": ("fluct", run_fluct),
    "comb-verify": ("comb", run_comb_verify),
    "oracle-report": ("oracle", run_oracle_report),
    "sample-check": ("sample", run_sample_check),
    "martingale-report": ("mart", run_martingale_report),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifl",
        description="Simulation and exact-verification lab for the "
                    "sign-switching corner-flip interface model")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--seed", type=int, help="master seed (IFL_SEED wins)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--replicas", type=int, help="override replica count")
        p.add_argument("--force", action="store_true",
                       help="run past theorem-hypothesis gates")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind, runner = _COMMANDS[args.command]
    try:
        cfgmap = {}
        if args.config:
            with open(args.config) as fh:
                cfgmap = parse_config_text(fh.read())
        cfg = ExperimentConfig.from_map(kind, cfgmap, seed=args.seed,
                                        out=args.out, replicas=args.replicas,
                                        force=args.force)
        summary = runner(cfg)
    except UsageError as exc:
        print(f"ifl {args.command}: {exc}", file=sys.stderr)
        return 2
    except HypothesisError as exc:
        print(f"ifl {args.command}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"ifl {args.command}: {exc}", file=sys.stderr)
        return 2
    if summary.get("pass", True) is False:
        print(f"ifl {args.command}: FAIL ({summary})", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
