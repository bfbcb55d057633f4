"""Sample a constant-column-weight design and write it as a matrix file."""

from gthyp.ensemble import EnsembleSpec, sample_matrix

from ..store import write_matrix


def register(cli):
    parser = cli.add_command("gen", help="Sample a design with t columns of weight w")
    parser.add_argument("--N", type=int, required=True, help="Number of tests (rows)")
    parser.add_argument("--t", type=int, required=True, help="Number of items (columns)")
    parser.add_argument("--w", type=int, required=True, help="Column weight, 1 <= w <= N")
    parser.add_argument("--seed", type=int, required=True, help="64-bit seed")
    parser.add_argument("--out", required=True, help="Output matrix file")

    @cli.handler(parser)
    def gen(args, settings):
        spec = EnsembleSpec(n_tests=args.N, n_items=args.t, column_weight=args.w)
        write_matrix(args.out, sample_matrix(spec, args.seed))
