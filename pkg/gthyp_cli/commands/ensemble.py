"""Ensemble-average error probabilities of the weight rule."""

import sys

from gthyp.ensemble import best_ensemble_design, ensemble_wdr_error

from ..store import write_csv

FIELDS = ("N", "s", "w", "T", "p_h0", "p_h1", "lower", "upper")


def register(cli):
    parser = cli.add_command(
        "ensemble", help="Exact ensemble error of the weight rule; best (w, T) when both are omitted",
    )
    parser.add_argument("--N", type=int, required=True)
    parser.add_argument("--s", type=int, required=True)
    parser.add_argument("--w", type=int, default=None, help="Column weight")
    parser.add_argument("--T", type=int, default=None, help="Threshold")

    @cli.handler(parser)
    def ensemble(args, settings):
        if args.w is None and args.T is None:
            result = best_ensemble_design(args.N, args.s)
        elif args.w is None or args.T is None:
            parser.error("--w and --T go together")
        else:
            result = ensemble_wdr_error(args.N, args.s, args.T, args.w)
        write_csv(sys.stdout, FIELDS, [[
            result.n_tests, result.s, result.column_weight, result.threshold,
            float(result.p_h0), float(result.p_h1), result.lower, result.upper,
        ]])
