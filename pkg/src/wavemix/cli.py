"""Command-line entry point: ``wavemix {propagate,spectrum,validate,sweep}``."""

from __future__ import annotations

import argparse
import sys

from .config import FORMATS, WORKFLOWS, ConfigError, parse_config
from .model import SingularParameterError
from .oracle import NoUniqueSteadyStateError
from .propagation import NumericalDivergenceError
from .workflows import EmitError, emit, run_workflow

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_HELP = {
    "propagate": "integrate the coupled field equations along Z",
    "spectrum": "probe absorption versus detuning",
    "validate": "compare the master-equation steady state with the perturbative coherences",
    "sweep": "peak efficiencies across a grid of one system parameter",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", help="output path (overrides output.path)")
    common.add_argument("--format", choices=FORMATS, help="overrides output.format")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")

    parser = argparse.ArgumentParser(prog="wavemix", description=__doc__)
    sub = parser.add_subparsers(dest="workflow", required=True)
    for name in WORKFLOWS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(text, args.workflow)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or config.output.path
    fmt = args.format or config.output.format
    if out is None:
        print("config error: output.path: no output path (use --out)", file=sys.stderr)
        return EXIT_CONFIG

    try:
        bundle = run_workflow(config)
    except (SingularParameterError, NumericalDivergenceError, NoUniqueSteadyStateError) as exc:
        print(f"numeric failure in {args.workflow}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        written = emit(bundle, out, fmt)
    except EmitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(f"{args.workflow}: {len(bundle.payload.rows)} rows -> {', '.join(written)}")
    return EXIT_OK
