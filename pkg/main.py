# main.py - Command-line entry point: degree of separability, factored filtering, experiments

import argparse
import logging
import sys
from typing import List, Optional

from analysis.bounds import TYPO_READINGS
from cli.commands import (
    FILTER_MODES,
    FILTER_TASKS,
    cmd_analyze,
    cmd_experiment,
    cmd_export,
    cmd_factorize,
    cmd_filter,
    parse_alpha_grid,
    positive_int,
)
from cli.sources import BUILTIN_USAGE
from config import Output
from experiments import EXPERIMENTS
from probability.errors import SeparabilityError
from separability.factorization import LEVELS
from separability.methods import METHODS

logger = logging.getLogger("dbnsep")

# Diagnostics for bad input; anything else is a bug
EXIT_USAGE = 2
EXIT_FAILURE = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbnsep",
        description="Degree of separability and factored filtering for dynamic Bayesian networks",
        epilog=f"Model sources: a model file, a CPD table document, or {BUILTIN_USAGE}",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="degree of separability of a CPD")
    analyze.add_argument("source", help="CPD table document or model")
    analyze.add_argument("--grouping", help='parent groups, e.g. "X-,W-|Y-,Z-"')
    analyze.add_argument("--child", help="transition CPD of a model to analyze (default: all)")
    analyze.add_argument("--method", choices=METHODS, default="auto")
    analyze.add_argument("--verify", action="store_true", help="cross-check against the LP")
    analyze.add_argument("--format", choices=("text", "csv"), default="text")
    analyze.set_defaults(handler=cmd_analyze)

    filt = sub.add_parser("filter", help="run the exact and/or factored filter")
    filt.add_argument("source", help="model")
    observed = filt.add_mutually_exclusive_group(required=True)
    observed.add_argument("--obs", help="observation CSV (header of observation variables)")
    observed.add_argument("--sample", type=positive_int, metavar="T", help="sample T steps from the model")
    filt.add_argument("--seed", type=int, default=0, help="sampling seed")
    filt.add_argument("--mode", choices=FILTER_MODES, default="both")
    filt.add_argument("--task", choices=tuple(FILTER_TASKS), default="monitor")
    filt.add_argument("--factorization", help='factors for the factored filter, e.g. "U,V|W,X|Y,Z"')
    filt.set_defaults(handler=cmd_filter)

    factorize = sub.add_parser("factorize", help="rank factorizations by degree of separability")
    factorize.add_argument("source", help="model")
    factorize.add_argument("--max-factor-size", type=positive_int, default=3)
    factorize.add_argument("--level", choices=LEVELS, default="variable")
    factorize.add_argument("--top", type=positive_int, default=10, help="rows shown in the text table")
    factorize.add_argument("--format", choices=("text", "csv"), default="text")
    factorize.set_defaults(handler=cmd_factorize)

    experiment = sub.add_parser("experiment", help="reproduce an experiment and write CSV results")
    experiment.add_argument("names", nargs="+", choices=tuple(EXPERIMENTS) + ("all",))
    experiment.add_argument("--runs", type=positive_int)
    experiment.add_argument("--steps", type=positive_int)
    experiment.add_argument("--seed", type=int, help="master seed")
    experiment.add_argument("--jobs", type=positive_int, help="worker threads")
    experiment.add_argument("--alpha-grid", type=parse_alpha_grid, help='e.g. "0,0.5,1"')
    experiment.add_argument("--sequences", type=positive_int, help="observation sequences per two-chain system")
    experiment.add_argument("--typo-reading", choices=TYPO_READINGS)
    experiment.add_argument("--emit-steps", action="store_true", help="also write per-step rows")
    experiment.add_argument("--settings", help="settings file (default: settings.json)")
    experiment.add_argument("--out", help=f"output directory (default: ${Output.ENV_VAR} or {Output.DEFAULT_DIR})")
    experiment.set_defaults(handler=cmd_experiment)

    export = sub.add_parser("export", help="write a built-in or file model as JSON")
    export.add_argument("source")
    export.add_argument("--out", help="output file (default: stdout)")
    export.set_defaults(handler=cmd_export)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit status"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except SeparabilityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
