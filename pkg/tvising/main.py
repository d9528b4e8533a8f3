"""
tvising: time-varying Ising structure learning

Slim entry point: builds the argument parser, configures logging and
dispatches to the subcommand modules under commands/. Each subcommand
returns its exit code; library errors map to theirs (1 validation,
2 solver, 3 I/O).
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from .config import LOG_LEVEL
from .errors import InvalidInputError, TvisingError
from .commands import (
    register_generate,
    register_fit,
    register_select,
    register_evaluate,
    register_experiment,
    register_ingest,
)

logger = logging.getLogger("tvising")


class _Parser(argparse.ArgumentParser):
    """Usage errors become InvalidInputError so they share exit code 1."""

    def error(self, message):
        raise InvalidInputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tvising", description="Change-point detection in time-varying Ising models.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # ── Register subcommands ─────────────────────────────
    register_generate(subparsers)
    register_fit(subparsers)
    register_select(subparsers)
    register_evaluate(subparsers)
    register_experiment(subparsers)
    register_ingest(subparsers)
    return parser


def _configure_logging(verbose: int):
    level = {0: LOG_LEVEL, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        return args.handler(args)
    except TvisingError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InvalidInputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
