"""Command-line entry point: ``lamespec <subcommand> CONFIG [-o DIR]``.

Exit codes: 0 success, 1 configuration/input error, 2 numerical failure,
3 spectrum certification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import load_config
from .errors import BesselRangeError, ConfigError, IncompleteSpectrumError, LameSpecError, MeshError, NumericsError, RangeError

COMMANDS = {
    "spectrum": pipeline.run_spectrum,
    "kernel": pipeline.run_kernel,
    "symbol": pipeline.run_symbol,
    "verify": pipeline.run_verify,
    "plotdata": pipeline.run_plotdata,
    "report": pipeline.run_report,
}

EXIT_CONFIG, EXIT_NUMERICS, EXIT_CERTIFICATION = 1, 2, 3

log = logging.getLogger("lamespec")


def exit_code(exc: Exception) -> int:
    if isinstance(exc, IncompleteSpectrumError):
        return EXIT_CERTIFICATION
    if isinstance(exc, (ConfigError, MeshError, RangeError, BesselRangeError)):
        return EXIT_CONFIG
    if isinstance(exc, NumericsError):
        return EXIT_NUMERICS
    return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamespec", description="Elastic spectral-asymptotics laboratory")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", help="key = value experiment file")
    p.add_argument("-o", "--output", help="output directory (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output = args.output
        written = COMMANDS[args.command](cfg)
    except LameSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
