"""Command-line interface: constants, spectrum, converge, oracle.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure (quadrature, solvers, grids), 4 oracle tolerance failure. The
output directory resolves as --out flag > STARCOUPLING_OUT environment
variable > config "output.dir" > ./results.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .config import load_config
from .errors import (
    AtPole,
    ConfigError,
    DegenerateTheta,
    FredholmSingular,
    GridTooCoarse,
    MeanViolation,
    MultipleSignChanges,
    QuadratureNotConverged,
    ResonantWithZeroA,
    SingularSystem,
    SupportViolation,
    ZeroB,
)
from .experiments import cmd_constants, cmd_converge, cmd_oracle, cmd_spectrum, write_report

ENV_OUT = "STARCOUPLING_OUT"

_CONFIG_ERRORS = (
    ConfigError,
    MeanViolation,
    SupportViolation,
    DegenerateTheta,
    ResonantWithZeroA,
)
_NUMERICAL_ERRORS = (
    QuadratureNotConverged,
    FredholmSingular,
    SingularSystem,
    AtPole,
    GridTooCoarse,
    MultipleSignChanges,
    ZeroB,
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="starcoupling",
        description="Vertex-coupling approximation experiments on star graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("constants", "derived coupling constants and boundary matrices"),
        ("spectrum", "limit eigenvalue and per-eps pole locations"),
        ("converge", "resolvent and S-matrix convergence rates"),
        ("oracle", "finite-difference cross-validation"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument(
            "--quad-order", type=int, default=None, help="override quadrature order"
        )
        cmd.add_argument(
            "--parallel", type=int, default=1, help="worker processes for sweeps"
        )
    return parser


def _resolve_out(args, config):
    if args.out:
        return args.out
    env = os.environ.get(ENV_OUT)
    if env:
        return env
    return config.output_dir


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.quad_order is not None:
            config = dataclasses.replace(config, quad_order=args.quad_order)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "constants":
            report = cmd_constants(config)
        elif args.command == "spectrum":
            report = cmd_spectrum(config, parallel=args.parallel)
        elif args.command == "converge":
            report = cmd_converge(config, parallel=args.parallel)
        else:
            report = cmd_oracle(config)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    out_dir = _resolve_out(args, config)
    csv_path, json_path = write_report(report, out_dir)
    print(f"wrote {csv_path} and {json_path}")
    for row in report.rows:
        cells = ", ".join(
            f"{key}={row[key]}" for key in ("epsilon", "k", "kappa") if row[key] is not None
        )
        print(f"{row['quantity']}: value={row['value']}" + (f" ({cells})" if cells else ""))
    if args.command == "oracle" and not report.passed:
        print("oracle tolerances violated", file=sys.stderr)
        return 4
    return 0


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
