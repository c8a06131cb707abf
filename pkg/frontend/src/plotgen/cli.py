"""plotgen: render periodic-pitman CSV files into figures.

File in, file out. Exit codes: 0 ok, 1 i/o error, 2 usage error,
3 schema mismatch, 4 empty input.
"""

import argparse
import os
import sys

from . import figures

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_EMPTY = 4


def parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="plotgen",
        description="Render periodic-pitman CSV output into figures. "
                    "All values come from the CSV; nothing is computed here.",
    )
    parser.add_argument("--kind", required=True, choices=sorted(figures.SCHEMAS),
                        help="figure kind; fixes the expected CSV columns")
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input table(s); beta-panels "
                        "accepts several, the rest exactly one")
    parser.add_argument("--out", required=True, metavar="IMAGE",
                        help="output image path (.png, .svg, .pdf)")
    parser.add_argument("--title", default="")
    parser.add_argument("--labels", default="",
                        help="comma-separated panel labels for beta-panels "
                             "(default: input file stems)")
    parser.add_argument("--xlabel", default="")
    parser.add_argument("--ylabel", default="")
    ns = parser.parse_args(argv)
    if ns.kind != "beta-panels" and len(ns.inputs) != 1:
        parser.error(f"--kind {ns.kind} takes exactly one input CSV")
    return ns


def main(argv=None) -> int:
    ns = parse_args(sys.argv[1:] if argv is None else list(argv))

    if ns.labels:
        labels = ns.labels.split(",")
        if len(labels) != len(ns.inputs):
            print(f"plotgen: error: {len(ns.inputs)} inputs but "
                  f"{len(labels)} labels", file=sys.stderr)
            return EXIT_USAGE
    else:
        labels = [os.path.splitext(os.path.basename(p))[0] for p in ns.inputs]

    try:
        tables = [figures.read_table(path, ns.kind) for path in ns.inputs]
    except figures.SchemaError as exc:
        print(f"plotgen: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except figures.EmptyInputError as exc:
        print(f"plotgen: empty input: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except OSError as exc:
        print(f"plotgen: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    fig = figures.build_figure(ns.kind, tables, labels, title=ns.title,
                               xlabel=ns.xlabel, ylabel=ns.ylabel)
    try:
        figures.save_figure(fig, ns.out)
    except OSError as exc:
        print(f"plotgen: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
