"""CLI entry point: gthyp <command> [options].

Usage:
    gthyp gen --N 10 --t 15 --w 2 --seed 42 --out design.txt
    gthyp eval --matrix design.txt --s 2 --rule WDR --T 2
    gthyp exponents --s-min 2 --s-max 6
    gthyp simulate --config configs/table2_s2.cfg
    gthyp bound --N 10 --t 1000 --s 2
    gthyp check-disjunctive --matrix design.txt --s 2
    gthyp ensemble --N 10 --s 2 --w 1 --T 2
"""

import argparse
import dataclasses
import logging
import sys

from gthyp.errors import DomainError, GroupTestingError, InputError

from .command_logger import AutoLoggingCLI
from .commands import bound, disjunct, ensemble, evaluate, exponents, gen, simulate
from .config import load_settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gthyp",
        description="Group-testing hypothesis tests: designs, error evaluation and exponents",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level, logs go to stderr (default: WARNING)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Worker threads; output is identical for any value (default: $GTHYP_THREADS or 1)",
    )
    parser.add_argument(
        "--cap",
        type=int,
        default=None,
        help="Max subset evaluations in exact mode (default: $GTHYP_ENUMERATION_CAP or 10^8)",
    )

    cli = AutoLoggingCLI(parser.add_subparsers(dest="command", required=True, metavar="command"))
    gen.register(cli)
    evaluate.register(cli)
    exponents.register(cli)
    simulate.register(cli)
    bound.register(cli)
    disjunct.register(cli)
    ensemble.register(cli)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        settings = load_settings()
        if args.threads is not None:
            settings = dataclasses.replace(settings, threads=max(1, args.threads))
        if args.cap is not None:
            settings = dataclasses.replace(settings, enumeration_cap=args.cap)
        return args.handler(args, settings) or 0
    except (InputError, DomainError) as e:
        print(f"error[{e.kind}]: {e}", file=sys.stderr)
        return 2
    except GroupTestingError as e:
        print(f"error[{e.kind}]: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
