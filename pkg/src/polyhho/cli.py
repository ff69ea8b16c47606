"""Command line entry point: `polyhho solve ...`, `polyhho check`, `polyhho mesh ...`."""

import argparse
import logging
import sys

from .checks import run_checks
from .mesh import FAMILIES, generate_mesh, write_mesh
from .problems import PROBLEMS
from .study import StudyConfig, emit_csv, emit_plotdata, run_study

EXIT_OK, EXIT_ERROR, EXIT_TOLERANCE = 0, 1, 2


def parse_levels(text):
    """'A..B' (inclusive) or a comma-separated list."""
    if ".." in text:
        a, b = text.split("..", 1)
        return tuple(range(int(a), int(b) + 1))
    return tuple(int(t) for t in text.split(","))


def parse_degrees(text):
    return tuple(int(t) for t in text.split(","))


class _Parser(argparse.ArgumentParser):
    """Usage errors are errors (exit 1); exit 2 is reserved for tolerance failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="polyhho", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a convergence study and write a rate table")
    s.add_argument("--problem", choices=PROBLEMS, default="quasilinear")
    s.add_argument("--family", choices=FAMILIES, default="cartesian")
    s.add_argument("--degree", type=parse_degrees, default=(0,), help="K or a list K1,K2,...")
    s.add_argument("--levels", type=parse_levels, default=(0, 1, 2, 3), help="A..B")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--mesh", default=None, help="solve on a mesh file instead of a family")
    s.add_argument("--plotdata", default=None, help="optional JSON plot-data output path")
    s.add_argument("--max-iter", type=int, default=25)
    s.add_argument("--weights", choices=("iterate", "bound"), default="iterate")

    c = sub.add_parser("check", help="run the property suites")
    c.add_argument("--seed", type=int, default=0)

    m = sub.add_parser("mesh", help="write a generated mesh in the text format")
    m.add_argument("--family", choices=FAMILIES, required=True)
    m.add_argument("--level", type=int, default=0)
    m.add_argument("--out", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "solve":
            config = StudyConfig(
                problem=args.problem,
                family=args.family,
                degrees=args.degree,
                levels=args.levels,
                tol=args.tol,
                out=args.out,
                max_iter=args.max_iter,
                weight_mode=args.weights,
                mesh_file=args.mesh,
            )
            table = run_study(config)
            emit_csv(table, args.out)
            if args.plotdata:
                emit_plotdata(table, args.plotdata)
            for r in table.rows:
                rate = "" if r.rate is None else f"{r.rate:6.3f}"
                its = "" if r.iterations is None else f" iters={r.iterations}"
                print(f"{r.family:10s} k={r.k} level={r.level} h={r.h:.4e} ndof={r.ndof:7d} "
                      f"error={r.error:.4e} rate={rate}{its}")
            if not table.all_converged:
                print("nonlinear iteration did not reach the tolerance", file=sys.stderr)
                return EXIT_TOLERANCE
            return EXIT_OK
        if args.command == "check":
            results = run_checks(seed=args.seed)
            for r in results:
                print(r.line())
            return EXIT_OK if all(r.passed for r in results) else EXIT_TOLERANCE
        if args.command == "mesh":
            write_mesh(generate_mesh(args.family, args.level), args.out)
            return EXIT_OK
    except Exception as exc:  # reported, not re-raised: the exit code carries the outcome
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
