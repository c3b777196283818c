#!/usr/bin/env python3
"""Plot capacity versus the mean-photon-number constraint from a sweep CSV.

Usage: plot_sweep.py sweep.csv [-o sweep.png]
The CSV comes from `locap sweep -o sweep.csv`.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_points(path):
    targets, capacities = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(line for line in fh if not line.startswith("#")):
            targets.append(float(row["target"]))
            capacities.append(float(row["capacity_bits"]))
    return targets, capacities


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--output", default="sweep.png")
    args = ap.parse_args()

    targets, capacities = read_points(args.csv_path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(targets, capacities, marker="o")
    ax.set_xlabel("mean photon number per character")
    ax.set_ylabel("capacity (bits)")
    ax.set_title("capacity vs photon-number constraint")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
