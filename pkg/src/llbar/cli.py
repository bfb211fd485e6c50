"""Command-line experiment runner.

Exit codes: 0 success, 2 configuration error, 3 blow-up,
4 acceptance-threshold failure (with --assert), 5 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checkpoint import CheckpointError
from .config import load_config_file
from .experiments import AcceptanceFailure, run
from .grid import ConfigurationError
from .stepper import BlowUpError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_ASSERT = 4
EXIT_IO = 5

_COMMANDS = {
    "simulate": "simulate",
    "compare": "compare",
    "sweep-eps": "sweep_eps",
    "steady": "steady",
    "oracle-check": "oracle_check",
    "audit": "audit",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llbar",
        description=(
            "Pseudospectral experiments for the fourth-order magnetisation / "
            "phase-field evolution family: simulations, trajectory pairs, "
            "damping-parameter sweeps, steady-state relaxation, Galerkin "
            "oracle checks, and identity audits."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", required=True, help="YAML experiment config")
        sp.add_argument("--out", default=None, help="output directory (default: config 'output')")
        sp.add_argument(
            "--assert",
            dest="assert_mode",
            action="store_true",
            help="turn stated thresholds into failures (exit code 4)",
        )
        sp.add_argument("--seed", type=int, default=None, help="override the run seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    experiment = _COMMANDS[args.command]
    try:
        cfg = load_config_file(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.raw["experiment"] != experiment:
        # the subcommand is authoritative; a config declaring a different
        # (non-default) experiment is a mistake
        if cfg.raw["experiment"] != "simulate":
            print(
                f"config error: config declares experiment {cfg.raw['experiment']!r} "
                f"but the {args.command} subcommand was invoked",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        import json

        from .config import parse_config

        raw = dict(cfg.raw)
        raw["experiment"] = experiment
        cfg = parse_config(json.dumps(raw))

    outdir = args.out or cfg.output
    if outdir is None:
        print("config error: no output directory (use --out or the config 'output' key)",
              file=sys.stderr)
        return EXIT_CONFIG

    try:
        summary = run(cfg, Path(outdir), assert_mode=args.assert_mode, seed_override=args.seed)
    except AcceptanceFailure as exc:
        print(f"acceptance failure: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, CheckpointError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    failures = summary.get("failures") if isinstance(summary, dict) else None
    if failures:
        for name, detail in failures.items():
            print(f"warning: {name}: {detail}", file=sys.stderr)
    print(f"ok: wrote results to {outdir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
