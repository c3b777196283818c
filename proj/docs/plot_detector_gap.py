#!/usr/bin/env python3
"""Plot entangled and baseline capacities over detector efficiency.

Usage: plot_detector_gap.py gap.csv [-o gap.png]
The CSV comes from `locap detector-sweep -o gap.csv`.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_points(path):
    s, ent, base = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(line for line in fh if not line.startswith("#")):
            s.append(float(row["s"]))
            ent.append(float(row["entangled_bits"]))
            base.append(float(row["baseline_bits"]))
    return s, ent, base


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--output", default="detector_gap.png")
    args = ap.parse_args()

    s, ent, base = read_points(args.csv_path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(s, ent, marker="o", label="entangled four-mode")
    ax.plot(s, base, marker="s", label="no entanglement")
    ax.set_xlabel("click efficiency s")
    ax.set_ylabel("capacity (bits)")
    ax.set_title("detector efficiency study")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
