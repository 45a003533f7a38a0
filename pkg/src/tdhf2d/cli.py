"""Command-line interface: validate configurations, run scenarios, read runs.

Exit codes: 0 success, 2 configuration or usage problem, 3 numerical
failure during propagation, 4 I/O or container problem.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    load_preset,
    parse_config,
    preset_dict,
    preset_names,
)
from .container import ContainerError
from .scenario import ScenarioError, describe, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdhf2d",
        description=(
            "Two interacting free-electron wavepackets in two dimensions: "
            "configured mean-field runs archived as plain-file containers."
        ),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_config_source(p: argparse.ArgumentParser) -> None:
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--config", metavar="FILE", help="JSON configuration file")
        source.add_argument("--preset", metavar="NAME", help="shipped preset name")
        p.add_argument(
            "--override",
            metavar="KEY.PATH=VALUE",
            action="append",
            default=[],
            help="override one configuration entry (repeatable; JSON-typed values)",
        )

    p_run = sub.add_parser("run", help="propagate a scenario and archive the results")
    add_config_source(p_run)
    p_run.add_argument("--output", metavar="DIR", help="directory to archive the run into")

    p_validate = sub.add_parser("validate", help="check a configuration and report")
    add_config_source(p_validate)

    p_describe = sub.add_parser("describe", help="integrity-check and summarize a run")
    p_describe.add_argument("directory", metavar="DIR", help="archived run directory")

    sub.add_parser("presets", help="list the shipped presets")
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    if args.preset is not None:
        if args.override:
            data = apply_overrides(preset_dict(args.preset), args.override)
            return parse_config(data, name=f"preset {args.preset}")
        return load_preset(args.preset)
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    import json

    try:
        data = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if args.override:
        data = apply_overrides(data, args.override)
    return parse_config(data, name=str(path))


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    output = args.output or cfg.output_dir
    if not output:
        print(
            "error: no output directory (pass --output or set output_dir)",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    result = run_scenario(cfg, output)
    summary = result.summary
    print(f"archived run: {result.directory}")
    print(
        f"steps: {summary['steps']}  snapshots: {summary['snapshots']}  "
        f"wall: {result.wall_seconds:.1f} s"
    )
    norms = ", ".join(f"{n:.9f}" for n in summary["final_norms"])
    print(f"final norms: {norms}")
    if summary.get("visibility") is not None:
        print(
            f"fringe visibility: {summary['visibility']:.4f}  "
            f"comb spacing: {summary.get('comb_spacing_ev') or float('nan'):.4f} eV"
        )
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    beams = " + ".join(f"{e.kinetic_energy_ev:g} eV" for e in cfg.electrons)
    print(f"configuration OK: {cfg.title or 'untitled'}")
    print(
        f"grid {cfg.grid.nx} x {cfg.grid.ny}, {cfg.spin_mode} pair ({beams}), "
        f"field {cfg.field}, t_end {cfg.propagation.t_end_fs:g} fs"
    )
    return EXIT_OK


def _cmd_describe(args: argparse.Namespace) -> int:
    print(describe(args.directory))
    return EXIT_OK


def _cmd_presets(args: argparse.Namespace) -> int:
    for name in preset_names():
        title = preset_dict(name).get("title", "")
        print(f"{name:24s} {title}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "describe": _cmd_describe,
        "presets": _cmd_presets,
    }
    try:
        return handlers[args.verb](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ContainerError, ScenarioError) as exc:
        print(f"container error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
