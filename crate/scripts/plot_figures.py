#!/usr/bin/env python3
"""Plot the CSV files written by `berry-echo`.

Usage:
    plot_figures.py DATA_DIR [OUT_DIR]

Looks for fig1.csv, fig2.csv, fig3.csv, fig4.csv and fig6.csv in DATA_DIR and
writes a PNG next to each one found (or into OUT_DIR). Missing files are
skipped. Needs matplotlib.
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_table(path):
    with path.open(newline="") as f:
        rows = csv.DictReader(line for line in f if not line.startswith("#"))
        return [{k: float(v) for k, v in row.items()} for row in rows]


def grouped(rows, *keys):
    groups = defaultdict(list)
    for row in rows:
        groups[tuple(row[k] for k in keys)].append(row)
    return sorted(groups.items())


def fig1(rows, ax):
    for (cutoff, theta), curve in grouped(rows, "cutoff", "theta"):
        ax.plot([r["t"] for r in curve], [r["F"] for r in curve], label=f"Ω={cutoff:g}, θ={theta:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("F(t)")


def fig2(rows, ax):
    for (cutoff, temp), curve in grouped(rows, "cutoff", "temperature"):
        ax.plot([r["T0"] for r in curve], [r["F_2T0"] for r in curve], label=f"Ω={cutoff:g}, T={temp:g}")
    iso = {r["T0"]: r["F_isolated"] for r in rows}
    ax.plot(sorted(iso), [iso[t] for t in sorted(iso)], "k-", lw=2, label="isolated")
    ax.set_xlabel("T₀")
    ax.set_ylabel("F(2T₀)")


def fig3(rows, ax):
    for (cutoff,), curve in grouped(rows, "cutoff"):
        t0 = [r["T0"] for r in curve]
        for column, style in (("n1", ":"), ("l1", "-"), ("k1", "--"), ("k1_minus_k2", "-.")):
            ax.plot(t0, [r[column] for r in curve], style, label=f"{column}, Ω={cutoff:g}")
    ax.set_xlabel("T₀")


def fig4(rows, ax):
    for (cutoff, temp), curve in grouped(rows, "cutoff", "temperature"):
        ax.plot([r["theta"] for r in curve], [r["F_2T0"] for r in curve], label=f"Ω={cutoff:g}, T={temp:g}")
    ax.set_xlabel("θ")
    ax.set_ylabel("F(2T₀)")


def fig6(rows, ax):
    for (theta_prime,), curve in grouped(rows, "theta_prime"):
        ax.plot([r["gamma"] for r in curve], [r["F_2T0"] for r in curve], label=f"θ′={theta_prime:.3f}")
    ax.set_xlabel("γ")
    ax.set_ylabel("F(2T₀)")


PLOTS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig6": fig6}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data_dir", type=Path)
    parser.add_argument("out_dir", type=Path, nargs="?")
    args = parser.parse_args(argv)
    out_dir = args.out_dir or args.data_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    found = 0
    for name, plot in PLOTS.items():
        path = args.data_dir / f"{name}.csv"
        if not path.exists():
            continue
        found += 1
        fig, ax = plt.subplots(figsize=(6, 4.5))
        plot(read_table(path), ax)
        ax.legend(fontsize="small")
        fig.tight_layout()
        target = out_dir / f"{name}.png"
        fig.savefig(target, dpi=150)
        plt.close(fig)
        print(f"wrote {target}")
    if found == 0:
        print(f"no figure CSVs in {args.data_dir}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
