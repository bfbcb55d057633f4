"""Check whether a design is a disjunctive s-code."""

from gthyp.core import find_disjunct_violation

from ..store import read_matrix


def register(cli):
    parser = cli.add_command(
        "check-disjunctive", help="Print 'true', or 'false,<S>,<j>' with a violating set S and column j",
    )
    parser.add_argument("--matrix", required=True, help="Matrix file")
    parser.add_argument("--s", type=int, required=True)

    @cli.handler(parser)
    def check_disjunctive(args, settings):
        matrix = read_matrix(args.matrix)
        violation = find_disjunct_violation(matrix, args.s, settings.enumeration_cap)
        if violation is None:
            print("true")
            return
        subset, column = violation
        print(f"false,{' '.join(str(label) for label in subset.labels())},{column + 1}")
