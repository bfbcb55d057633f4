"""Table of analytic error exponents."""

import sys

from gthyp.harness import TABLE1_FIELDS, table1

from ..store import ResultStore, write_csv


def register(cli):
    parser = cli.add_command("exponents", help="Exponent table for s = s-min..s-max as CSV")
    parser.add_argument("--s-min", type=int, default=2)
    parser.add_argument("--s-max", type=int, default=None, help="Default: s-min")
    parser.add_argument("--out", default=None, help="CSV file to append to (default: stdout)")

    @cli.handler(parser)
    def exponents(args, settings):
        s_max = args.s_min if args.s_max is None else args.s_max
        if s_max < args.s_min:
            parser.error("--s-max must be >= --s-min")
        rows = table1(list(range(args.s_min, s_max + 1)), threads=settings.threads)
        if args.out is None:
            write_csv(sys.stdout, TABLE1_FIELDS, [row.as_row() for row in rows])
        else:
            store = ResultStore(settings.output_dir)
            print(store.append_rows(args.out, TABLE1_FIELDS, [row.as_row() for row in rows]))
