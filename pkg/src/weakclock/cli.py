"""Batch command-line front end.

`weakclock run <config>` executes a configured experiment and writes the
record files; `weakclock validate <config>` stops after validation. Exit
codes: 0 success, 2 configuration error, 3 numeric failure, 4 size-guard
refusal.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .config import parse_config
from .errors import ConfigError, NumericError, SizeGuardError
from .experiments import execute_run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_GUARD = 4

WORKERS_ENV = "WEAKCLOCK_WORKERS"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakclock",
        description="Simulate weak-measurement Ramsey experiments from a config file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a configured experiment")
    run.add_argument("config", help="path to a YAML run configuration")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument(
        "--workers",
        type=int,
        default=None,
        help=f"worker process count (default: ${WORKERS_ENV} or serial)",
    )
    run.add_argument("--out", default=None, help="override the output path")
    run.add_argument(
        "--plot", action="store_true", help="also render a quick-look PNG next to the records"
    )

    validate = sub.add_parser("validate", help="check a configuration without running it")
    validate.add_argument("config", help="path to a YAML run configuration")
    return parser


def _resolve_workers(flag: Optional[int]) -> Optional[int]:
    if flag is not None:
        if flag < 1:
            raise ConfigError(f"workers must be positive, got {flag}")
        return flag
    env = os.environ.get(WORKERS_ENV)
    if not env:
        return None
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"${WORKERS_ENV} must be an integer, got {env!r}")
    if value < 1:
        raise ConfigError(f"${WORKERS_ENV} must be positive, got {value}")
    return value


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg = parse_config(text)

        if args.command == "validate":
            print(f"ok: {cfg.experiment} with {len(cfg.points())} point(s) -> {cfg.out}")
            return EXIT_OK

        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be non-negative", key="seed")
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        workers = _resolve_workers(args.workers)

        artifacts = execute_run(cfg, workers=workers, plot=args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeGuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (NumericError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    written = [artifacts.csv_path, artifacts.json_path]
    if artifacts.png_path is not None:
        written.append(artifacts.png_path)
    print("wrote " + ", ".join(written))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
