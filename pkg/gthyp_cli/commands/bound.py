"""Converse lower bound on the universal error of any design."""

from gthyp.exponent import lower_bound_error


def register(cli):
    parser = cli.add_command("bound", help="Lower bound on the error of any N x t design")
    parser.add_argument("--N", type=int, required=True)
    parser.add_argument("--t", type=int, required=True)
    parser.add_argument("--s", type=int, required=True)

    @cli.handler(parser)
    def bound(args, settings):
        print(f"{lower_bound_error(args.N, args.t, args.s):.10g}")
