"""Command-line entry point: one subcommand per sweep mode, plus check.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import sys

from .runners import run_config
from .sweepcfg import MODES, ConfigError, apply_overrides, load_file, resolve

_MODE_HELP = {
    "simulate": "single mean-field trajectory with steady-state measurements",
    "flowfield": "vector field of a chosen flow component on the Bloch sphere",
    "stability": "fixed point, eigenvalues, boundary and cycle parameters",
    "phase_diagram": "order parameter over a (V, gamma ratio) grid",
    "freq_shift": "measured vs analytic synchronization frequency shift",
    "two_group": "coupled pair trajectory, spectra, and classification",
    "arnold": "frequency-locking map over (detuning, inter-group coupling)",
    "phase_tuning": "locking windows while scanning the group-A phase",
    "oracle": "exact finite-N dynamics compared against the mean field",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlsync",
        description="Simulation and analysis of synchronization in "
                    "dissipative two-level-system ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode.replace("_", "-"), help=_MODE_HELP[mode])
        _add_common(sp)
    chk = sub.add_parser("check", help="validate a config file without running")
    _add_common(chk)
    return parser


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("config", help="TOML configuration file")
    sp.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE",
                    help="override a config value (dotted path, repeatable)")
    sp.add_argument("--check", action="store_true",
                    help="validate the configuration and exit")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command.replace("-", "_")
    mode = None if command == "check" else command
    try:
        raw = load_file(args.config)
        raw = apply_overrides(raw, args.overrides)
        rc = resolve(raw, mode)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if command == "check" or args.check:
        print(f"config ok: mode={rc.mode}, csv={rc.output.csv}")
        return 0
    try:
        run_config(rc)
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
