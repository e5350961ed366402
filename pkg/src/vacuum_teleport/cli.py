"""Command-line front end.

Subcommands: ``fringe``, ``visibility-sweep``, ``bell-stats``,
``simulate-counts`` and ``fit``. Exit status is 0 on success, 1 for usage or
configuration errors and 2 for failures while running.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections.abc import Sequence
from typing import Any, TextIO

import numpy as np

from .fitting import FitError, fit_visibility
from .fock import FockError
from .measurement import DetectorModel
from .montecarlo import config_to_dict, record_to_dict, simulate_counts
from .optics import DEFAULT_WAVELENGTH_UM
from .protocol import (
    PAIRS,
    ExperimentConfig,
    PhaseSweep,
    bell_branch_probabilities,
    fringe_sweep,
    pair_label,
    parse_pair,
    visibility_sweep,
)
from .reporting import (
    plot_fringes_svg,
    plot_visibility_svg,
    read_fringe_csv,
    write_fringe_csv,
    write_visibility_csv,
)

OUTPUT_DIR_ENV = "VACUUM_TELEPORT_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

_CONFIG_KEYS = {
    "alpha_sq",
    "bsb_r_sq",
    "phase",
    "mirror",
    "eta",
    "variant",
    "shots",
    "seed",
    "normalization",
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: error: {message}")


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from the JSON config schema."""
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "phase" in data and "mirror" in data:
        raise ConfigError("config may hold 'phase' or 'mirror', not both")
    try:
        if "mirror" in data:
            m = dict(data["mirror"])
            sweep = PhaseSweep(
                start=float(m.get("start_um", 0.0)),
                stop=float(m.get("stop_um", 2.0**-0.5 * m.get("lambda_um", DEFAULT_WAVELENGTH_UM))),
                steps=int(m.get("steps", 64)),
                mirror=True,
                wavelength_um=float(m.get("lambda_um", DEFAULT_WAVELENGTH_UM)),
            )
        else:
            p = dict(data.get("phase", {}))
            sweep = PhaseSweep(
                start=float(p.get("start", 0.0)),
                stop=float(p.get("stop", 2.0 * math.pi)),
                steps=int(p.get("steps", 64)),
            )
        return ExperimentConfig(
            alpha_sq=float(data.get("alpha_sq", 0.5)),
            bsb_r_sq=None if data.get("bsb_r_sq") is None else float(data["bsb_r_sq"]),
            sweep=sweep,
            detector=DetectorModel(eta=float(data.get("eta", 1.0))),
            variant=str(data.get("variant", "passive")),
            shots=int(data.get("shots", 0)),
            seed=int(data.get("seed", 0)),
            normalization=str(data.get("normalization", "conditional")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("experiment")
    g.add_argument("--config", help="JSON config file; flags override its values")
    g.add_argument("--alpha-sq", type=float, help="input splitting alpha^2 = |r_S|^2")
    g.add_argument("--bsb-r-sq", type=float, help="BS_B reflectance (default: matched to BS_S)")
    g.add_argument("--eta", type=float, help="detector efficiency")
    g.add_argument("--variant", choices=("passive", "active"))
    g.add_argument("--shots", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--normalization", choices=("joint", "conditional"))
    g.add_argument("--phase-start", type=float)
    g.add_argument("--phase-stop", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--mirror-start-um", type=float)
    g.add_argument("--mirror-stop-um", type=float)
    g.add_argument("--lambda-um", type=float)
    o = common.add_argument_group("output")
    o.add_argument("--out", help=f"output file (relative paths resolve against ${OUTPUT_DIR_ENV})")
    o.add_argument("--svg", help="also write an SVG plot")
    o.add_argument("--json", action="store_true", help="print a machine-readable report on stdout")
    o.add_argument("--workers", type=int, default=None)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="vacuum-teleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("fringe", parents=[common], help="analytic coincidence fringes")
    vis = sub.add_parser("visibility-sweep", parents=[common], help="visibility versus alpha^2")
    vis.add_argument("--grid", type=int, default=41)
    vis.add_argument("--alpha-min", type=float, default=0.02)
    vis.add_argument("--alpha-max", type=float, default=0.98)
    vis.add_argument("--pair", action="append", help="detector pair such as D1-D1* (repeatable)")
    sub.add_parser("bell-stats", parents=[common], help="Bell-class probabilities")
    sub.add_parser("simulate-counts", parents=[common], help="Monte Carlo coincidence counts")
    fit = sub.add_parser("fit", parents=[common], help="fit fringes in a CSV file")
    fit.add_argument("--input", required=True, help="CSV in the fringe schema")
    fit.add_argument("--column", choices=("counts", "p_conditional", "p_joint"))
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for flag, key in (
        ("alpha_sq", "alpha_sq"),
        ("bsb_r_sq", "bsb_r_sq"),
        ("eta", "eta"),
        ("variant", "variant"),
        ("shots", "shots"),
        ("seed", "seed"),
        ("normalization", "normalization"),
    ):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    mirror_flags = (args.mirror_start_um, args.mirror_stop_um, args.lambda_um)
    if any(v is not None for v in mirror_flags) or "mirror" in data:
        m = dict(data.pop("mirror", {}))
        data.pop("phase", None)
        for key, value in zip(("start_um", "stop_um", "lambda_um"), mirror_flags):
            if value is not None:
                m[key] = value
        if args.steps is not None:
            m["steps"] = args.steps
        data["mirror"] = m
    else:
        p = dict(data.get("phase", {}))
        for key, value in (("start", args.phase_start), ("stop", args.phase_stop), ("steps", args.steps)):
            if value is not None:
                p[key] = value
        data["phase"] = p
    return config_from_dict(data)


def _out_path(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _emit(args: argparse.Namespace, write, stdout: TextIO) -> None:
    """Send tabular output to ``--out``, or to stdout unless ``--json`` owns it."""
    if args.out:
        with open(_out_path(args.out), "w", encoding="utf-8", newline="") as fh:
            write(fh)
    elif not args.json:
        write(stdout)


def _dump(obj: Any, stdout: TextIO) -> None:
    stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _cmd_fringe(args, stdout) -> None:
    config = resolve_config(args)
    records = fringe_sweep(config, args.workers)
    _emit(args, lambda fh: write_fringe_csv(records, fh), stdout)
    if args.svg:
        plot_fringes_svg(records, _out_path(args.svg), config.normalization)
    if args.json:
        _dump({"config": config_to_dict(config), "records": [record_to_dict(r) for r in records]}, stdout)


def _cmd_visibility(args, stdout) -> None:
    config = resolve_config(args)
    if args.grid < 2:
        raise ConfigError("--grid must be at least 2")
    if not 0.0 <= args.alpha_min < args.alpha_max <= 1.0:
        raise ConfigError("need 0 <= --alpha-min < --alpha-max <= 1")
    pairs = [parse_pair(p) for p in args.pair] if args.pair else list(PAIRS)
    grid = [float(a) for a in np.linspace(args.alpha_min, args.alpha_max, args.grid)]
    curves = [(pair, visibility_sweep(config, grid, pair, args.workers)) for pair in pairs]
    _emit(args, lambda fh: write_visibility_csv(curves, fh), stdout)
    if args.svg:
        plot_visibility_svg(curves, _out_path(args.svg))
    if args.json:
        _dump(
            {
                "config": config_to_dict(config),
                "curves": {
                    pair_label(pair): [
                        {"alpha_sq": p.alpha_sq, "visibility": p.visibility, "degenerate": p.degenerate}
                        for p in points
                    ]
                    for pair, points in curves
                },
            },
            stdout,
        )


def _cmd_bell(args, stdout) -> None:
    config = resolve_config(args)
    probs = bell_branch_probabilities(config.input)
    # 15 significant digits strip float dust such as 0.1499999999999999
    out = {o.value: float(f"{p:.15g}") for o, p in probs.items()}
    text = json.dumps(out, sort_keys=True) + "\n"
    if args.out:
        with open(_out_path(args.out), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _cmd_simulate(args, stdout) -> None:
    config = resolve_config(args)
    if config.shots <= 0:
        raise ConfigError("simulate-counts needs --shots > 0")
    report = simulate_counts(config, args.workers)
    _emit(args, lambda fh: write_fringe_csv(report.records, fh), stdout)
    if args.svg:
        plot_fringes_svg(report.records, _out_path(args.svg))
    if args.json:
        stdout.write(report.to_json())


def _cmd_fit(args, stdout) -> None:
    try:
        with open(args.input, encoding="utf-8", newline="") as fh:
            records = read_fringe_csv(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    column = args.column or ("counts" if all(r.counts is not None for r in records) else "p_conditional")
    phases = [r.phi for r in records]
    fits = {}
    for pair in PAIRS:
        if column == "counts":
            ys = [r.counts[pair] for r in records]
        elif column == "p_joint":
            ys = [r.joint[pair] for r in records]
        else:
            ys = [r.conditional[pair] for r in records]
        try:
            fits[pair_label(pair)] = fit_visibility(phases, ys).as_dict()
        except FitError as exc:
            fits[pair_label(pair)] = {"error": str(exc)}
    text = json.dumps({"column": column, "fits": fits}, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(_out_path(args.out), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


_COMMANDS = {
    "fringe": _cmd_fringe,
    "visibility-sweep": _cmd_visibility,
    "bell-stats": _cmd_bell,
    "simulate-counts": _cmd_simulate,
    "fit": _cmd_fit,
}


def run_cli(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args, stdout)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except BrokenPipeError:
        raise
    except (ConfigError, FockError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every runtime failure maps to one exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    try:
        code = run_cli()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
