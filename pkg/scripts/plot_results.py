"""Plot CSVs written by sweep_c4_k4.py and cpu_vs_edges.py.  Needs matplotlib."""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def plot_sweep(path, out):
    curves = defaultdict(list)
    for r in read(path):
        curves[r["topology"], r["budget"]].append((float(r["p"]), float(r["value"])))
    fig, ax = plt.subplots(figsize=(5, 4))
    for (topo, budget), pts in sorted(curves.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=f"{topo} N={budget}")
    ax.set_xlabel("edge failure probability")
    ax.set_ylabel("expected served weight")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)


def plot_cpu(path, out):
    rows = [r for r in read(path) if r["elapsed_s"] not in ("", "nan")]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter([int(r["edges"]) for r in rows], [float(r["elapsed_s"]) for r in rows], s=8)
    ax.set_yscale("log")
    ax.set_xlabel("edges")
    ax.set_ylabel("solve time (s)")
    fig.tight_layout()
    fig.savefig(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sweep")
    ap.add_argument("--cpu")
    ap.add_argument("--prefix", default="fig")
    args = ap.parse_args()
    if args.sweep:
        plot_sweep(args.sweep, f"{args.prefix}_sweep.png")
    if args.cpu:
        plot_cpu(args.cpu, f"{args.prefix}_cpu.png")


if __name__ == "__main__":
    main()
