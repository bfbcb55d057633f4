"""Evaluate a decision rule on a design file."""

import sys

from gthyp.core import CompRule, WeightRule
from gthyp.errors import InputError
from gthyp.evaluator import RECORD_FIELDS, evaluate, evaluation_record

from ..store import read_matrix, write_csv


def register(cli):
    parser = cli.add_command(
        "eval", help="Print err_h0,err_h1,eps of a rule at the worst size distribution",
    )
    parser.add_argument("--matrix", required=True, help="Matrix file")
    parser.add_argument("--s", type=int, required=True)
    parser.add_argument("--rule", choices=["WDR", "COMP"], default="WDR")
    parser.add_argument("--T", type=int, default=None, help="WDR threshold")
    parser.add_argument("--tau", type=float, default=None, help="WDR threshold as floor(tau N)")
    parser.add_argument("--method", choices=["exact", "monte-carlo"], default="exact")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--record", action="store_true", help="Print the full record with a header")

    @cli.handler(parser)
    def eval_(args, settings):
        matrix = read_matrix(args.matrix)
        if args.rule == "COMP":
            rule = CompRule(args.s)
        elif args.T is not None:
            rule = WeightRule(args.T)
        elif args.tau is not None:
            rule = WeightRule.from_tau(args.tau, matrix.n_tests)
        else:
            raise InputError("WDR needs --T or --tau")

        errors = evaluate(
            matrix, rule, args.s,
            method=args.method,
            trials=args.trials,
            seed=args.seed,
            cap=settings.enumeration_cap,
            threads=settings.threads,
        )
        if args.record:
            record = evaluation_record(matrix, rule, args.s, errors, args.method, args.trials, args.seed)
            write_csv(sys.stdout, RECORD_FIELDS, [record.as_row()])
        else:
            print(f"{errors.err_h0:.10g},{errors.err_h1:.10g},{errors.eps:.10g}")
