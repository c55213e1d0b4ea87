"""Command-line entry point.

Subcommands
-----------
simulate   integrate one complex-time ray and write trace/monitor artifacts
verify     run one randomised or exhaustive inequality check
radius     integrate a ray and fit the analyticity radius along the way
sweep      integrate several rays and map the validated region

Every run is pinned by (config, seed); artifacts are byte-stable across
repeats.  Exit codes: 0 success, 1 run failure (blow-up, or a monitor
violation under --strict), 2 configuration or usage error.

Set TQG_LOG=debug|info|warning to see progress on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .config import ExperimentConfig, LemmaConfig, parse_config, run_experiment
from .errors import ConfigError, TqgError
from .lemmas import LEMMA_NAMES

log = logging.getLogger("tqg.cli")


def _setup_logging() -> None:
    level_name = os.environ.get("TQG_LOG", "").strip().lower()
    if not level_name:
        return
    level = {"debug": logging.DEBUG, "info": logging.INFO, "warning": logging.WARNING}.get(level_name)
    if level is None:
        return
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tqg",
        description="Spectral toolkit for thermal quasi-geostrophic flow in complex time.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", type=Path, help="output directory (default: config 'out' or '.')")
        p.add_argument("--threads", type=int, default=1, help="parallel rays in a sweep (outputs unchanged)")
        p.add_argument("--strict", action="store_true", help="monitor violations fail the run")

    p_sim = sub.add_parser("simulate", help="integrate one ray and track the radius")
    add_common(p_sim)

    p_ver = sub.add_parser("verify", help="check one inequality on random or exhaustive inputs")
    add_common(p_ver)
    p_ver.add_argument(
        "--lemma",
        choices=list(LEMMA_NAMES),
        help="which inequality to check (overrides the config)",
    )
    p_ver.add_argument("--trials", type=int, help="number of random trials")

    p_rad = sub.add_parser("radius", help="integrate a ray and fit the analyticity radius")
    add_common(p_rad)

    p_swp = sub.add_parser("sweep", help="integrate several rays and map the validated region")
    add_common(p_swp)

    return parser


def _config_for(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        cfg = parse_config(args.config)
        if cfg.mode != args.command:
            raise ConfigError(
                f"config mode '{cfg.mode}' does not match subcommand '{args.command}'"
            )
    elif args.command == "verify" and getattr(args, "lemma", None):
        cfg = ExperimentConfig(
            mode="verify",
            n=64,
            seed=0,
            phi0=0.25,
            ray_theta=0.0,
            ray_s_max=0.0,
            ray_ds=1e-3,
            stride=10,
            data={},
            lemma=LemmaConfig(name=args.lemma),
        )
    else:
        raise ConfigError(f"subcommand '{args.command}' requires --config")

    if getattr(args, "lemma", None) and cfg.lemma is not None and cfg.lemma.name != args.lemma:
        cfg = dataclasses.replace(cfg, lemma=dataclasses.replace(cfg.lemma, name=args.lemma))
    if getattr(args, "trials", None):
        if cfg.lemma is None:
            raise ConfigError("--trials requires a lemma")
        if args.trials < 1:
            raise ConfigError(f"--trials must be a positive integer, got {args.trials}")
        cfg = dataclasses.replace(cfg, lemma=dataclasses.replace(cfg.lemma, trials=args.trials))
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.threads < 1:
            raise ConfigError(f"--threads must be a positive integer, got {args.threads}")
        cfg = _config_for(args)
        out = args.out or (Path(cfg.out) if cfg.out else Path("."))
        return run_experiment(cfg, out, threads=args.threads, strict=args.strict)
    except ConfigError as err:
        print(f"tqg: error: {err}", file=sys.stderr)
        return 2
    except TqgError as err:
        print(f"tqg: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
