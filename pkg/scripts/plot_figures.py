#!/usr/bin/env python3
"""Plot the CSV output of a sip-dyn run directory.

    python scripts/plot_figures.py <out_dir> [--save fig.png]

Picks the plot type from the files present: trajectory.csv (time series),
branches.csv (bifurcation diagram), curve.csv (two-parameter loci),
grid.csv (region diagram), percapita.csv (growth-rate curves),
threshold.csv (infection growth rate vs aggregation).
"""

import argparse
import csv
import sys
from pathlib import Path

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required for plotting: pip install matplotlib")


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def plot_trajectory(path, ax):
    _, rows = read_csv(path)
    data = [[float(v) for v in row] for row in rows]
    t = [row[0] for row in data]
    for idx, (label, color) in enumerate([("S", "tab:green"), ("I", "tab:red"), ("P", "tab:blue")], start=1):
        ax.plot(t, [row[idx] for row in data], label=label, color=color)
    ax.set_xlabel("t")
    ax.set_ylabel("density")
    ax.legend()


def plot_branches(path, ax):
    header, rows = read_csv(path)
    by_branch = {}
    for row in rows:
        by_branch.setdefault(row[5], []).append(row)
    for rows_b in by_branch.values():
        for stable, style in (("1", "-"), ("0", "--")):
            seg = [(float(r[0]), float(r[1])) for r in rows_b if r[4] == stable]
            if seg:
                ax.plot(*zip(*seg), style, color="tab:blue", lw=1)
    ax.set_xlabel(header[0])
    ax.set_ylabel("S")


def plot_curve(path, ax):
    header, rows = read_csv(path)
    for branch, color in (("interior", "tab:blue"), ("predator_free", "tab:orange")):
        pts = [(float(r[0]), float(r[1])) for r in rows if r[5] == branch]
        if pts:
            ax.plot(*zip(*pts), ".", ms=2, color=color, label=branch)
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    ax.legend()


def plot_grid(path, ax):
    _, rows = read_csv(path)
    colors = {"coexistence": "tab:green", "infection_free": "gold",
              "collapse": "tab:orange", "undecided": "lightgray"}
    for label, color in colors.items():
        pts = [(float(r[0]), float(r[1])) for r in rows if r[2] == label]
        if pts:
            ax.scatter(*zip(*pts), c=color, s=14, marker="s", label=label)
    ax.set_xlabel("L")
    ax.set_ylabel("r")
    ax.legend(loc="upper left", fontsize=8)


def plot_columns(path, ax, xlabel):
    header, rows = read_csv(path)
    data = [[float(v) for v in row] for row in rows]
    x = [row[0] for row in data]
    for idx in range(1, len(header)):
        ax.plot(x, [row[idx] for row in data], label=header[idx])
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel(xlabel)
    ax.legend()


PLOTTERS = [
    ("trajectory.csv", plot_trajectory),
    ("branches.csv", plot_branches),
    ("curve.csv", plot_curve),
    ("grid.csv", plot_grid),
    ("percapita.csv", lambda p, ax: plot_columns(p, ax, "S")),
    ("threshold.csv", lambda p, ax: plot_columns(p, ax, "r")),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", help="directory written by a sip-dyn command")
    ap.add_argument("--save", help="write the figure to this file instead of showing it")
    args = ap.parse_args()

    out = Path(args.out_dir)
    for name, plotter in PLOTTERS:
        path = out / name
        if path.exists():
            fig, ax = plt.subplots(figsize=(7, 5))
            plotter(path, ax)
            ax.set_title(name)
            if args.save:
                fig.savefig(args.save, dpi=150, bbox_inches="tight")
                print(f"wrote {args.save}")
            else:
                plt.show()
            return
    sys.exit(f"no plottable CSV found in {out}")


if __name__ == "__main__":
    main()
