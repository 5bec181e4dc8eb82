"""Solve time against edge count over every graph on at most six vertices
(no isolated vertices), all edges at the same failure probability.

Prints the fitted slope of log(time) on edge count to stderr."""
import argparse
import csv
import math
import sys

import numpy as np

from recourse_match.bench import small_graphs
from recourse_match.solver import SolveTimeout, solve

SCHEMA = "recourse-match/cpu-vs-edges/1"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--budget", default="inf")
    ap.add_argument("--max-vertices", type=int, default=6)
    ap.add_argument("--repeats", type=int, default=3, help="keep the fastest of this many runs")
    ap.add_argument("--timeout", type=float, default=60.0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rows = []
    for g in small_graphs(args.max_vertices, 15):
        g = g.with_probabilities([args.p] * g.edge_count)
        best = math.inf
        try:
            for _ in range(args.repeats):
                res = solve(g, budget=args.budget, timeout=args.timeout)
                best = min(best, res.stats.elapsed)
        except SolveTimeout:
            best = math.nan
        rows.append({"vertices": g.vertex_count, "edges": g.edge_count, "elapsed_s": best,
                     "evaluate_calls": res.stats.evaluate_calls if best == best else ""})

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    out.write(f"# schema: {SCHEMA}\n")
    writer = csv.DictWriter(out, ["vertices", "edges", "elapsed_s", "evaluate_calls"])
    writer.writeheader()
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()

    done = [r for r in rows if r["elapsed_s"] == r["elapsed_s"]]
    slope = np.polyfit([r["edges"] for r in done], np.log([r["elapsed_s"] for r in done]), 1)[0]
    print(f"{len(done)}/{len(rows)} graphs solved; log-time slope per edge {slope:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
