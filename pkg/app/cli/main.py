"""
Command-line entry point: synth, check, run and fixtures.
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli import commands
from app.core.config import settings
from app.core.exceptions import (
    InputError, ParseError, SynthesisFailed, TransformError, ValidationFailed,
)
from app.core.logging import setup_logging

logger = logging.getLogger(__name__)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=settings.SEED, help="master seed")
    parser.add_argument("-o", "--output", help="report file, standard output when omitted")
    parser.add_argument("--iterations", type=int, help="swarm iterations")
    parser.add_argument("--particles", type=int, help="swarm size")
    parser.add_argument("--query-count", type=int, help="query answers per counterexample")
    level = parser.add_mutually_exclusive_group()
    level.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    level.add_argument("--quiet", action="store_true", help="warnings and errors only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.PROJECT_NAME, description="Synthesize differentially private mechanisms.")
    parser.add_argument("--version", action="version", version=settings.VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a mechanism from a source program")
    synth.add_argument("file")
    _common(synth)
    synth.add_argument("--emit-dsl", help="write the mechanism as DSL text")
    synth.add_argument("--no-round", action="store_true", help="keep unrounded scale coefficients")
    synth.add_argument("--utility", choices=("default", "custom"), default="default")
    synth.add_argument("--sample-input", help="custom utility sample input (JSON)")
    synth.add_argument("--jobs", type=int, help="worker processes")
    synth.set_defaults(handler=commands.synth)

    check = sub.add_parser("check", help="refute a candidate by search and paired trials")
    check.add_argument("mechanism", help="source .dp or pre-transformed .json")
    check.add_argument("proof", nargs="?", help="candidate JSON")
    _common(check)
    check.add_argument("--rounds", type=int, help="refutation searches")
    check.add_argument("--trials", type=int, help="paired trials")
    check.set_defaults(handler=commands.check)

    run = sub.add_parser("run", help="run a finalized mechanism")
    run.add_argument("mechanism")
    run.add_argument("input", help="input JSON with publicInputs and privateInputs")
    run.add_argument("--seed", type=int, default=settings.SEED)
    run.add_argument("--eps", type=float, help="numeric privacy budget")
    run.add_argument("--reps", type=int, default=1)
    run.add_argument("--stats", action="store_true", help="print the mean accuracy utility")
    run.add_argument("--source", help="source program giving the noise-free truth")
    run.add_argument("-v", "--verbose", action="store_true")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(handler=commands.run)

    corpus = sub.add_parser("fixtures", help="list and validate the fixture corpus")
    corpus.add_argument("directory", nargs="?", default="fixtures")
    corpus.add_argument("-v", "--verbose", action="store_true")
    corpus.add_argument("--quiet", action="store_true")
    corpus.set_defaults(handler=commands.fixtures)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and map errors to exit codes.

    Returns:
        int: 0 ok, 1 input error, 2 synthesis failed, 3 refuted
    """
    args = build_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else "WARNING" if args.quiet else None)
    if getattr(args, "reps", 0) < 0:
        print("error: --reps must be non-negative", file=sys.stderr)
        return commands.EXIT_INPUT
    try:
        return args.handler(args)
    except SynthesisFailed as exc:
        print(f"error: {exc} (best candidate violates {exc.violations} assertions)", file=sys.stderr)
        return commands.EXIT_FAILED
    except (ParseError, ValidationFailed, InputError, TransformError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return commands.EXIT_INPUT
