"""Value against uniform edge failure probability on C4 and K4, with and
without recourse.  Writes one sweep CSV covering both graphs."""
import argparse
import sys

from recourse_match import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p-grid", default="0:1:0.05")
    ap.add_argument("--budgets", default="0,1,inf")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    grid = bench.parse_grid(args.p_grid)
    budgets = bench.parse_budgets(args.budgets)
    rows = bench.sweep("cycle", 4, grid, budgets) + bench.sweep("complete", 4, grid, budgets)
    if args.out == "-":
        bench.write_sweep(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            bench.write_sweep(rows, fh)


if __name__ == "__main__":
    main()
