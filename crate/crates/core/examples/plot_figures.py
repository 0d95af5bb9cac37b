"""Plot the CSV files written by the figure_data example (needs matplotlib)."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) if r[k] else float("nan") for r in rows] for k in rows[0]}


def main(directory):
    directory = Path(directory)
    for name, cols in [
        ("example1_lti", ("norm_x_H", "lower_main_H", "upper_main_H")),
        ("example3_ltv", ("norm_x_I", "lower_main", "upper_main")),
    ]:
        d = load(directory / f"{name}.csv")
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(d["t"], d[cols[0]], "k-", label=cols[0])
        ax.plot(d["t"], d[cols[1]], "k--", label=cols[1])
        ax.plot(d["t"], d[cols[2]], "k--", label=cols[2])
        ax.set_xlabel("t")
        ax.legend()
        fig.tight_layout()
        fig.savefig(directory / f"{name}.png", dpi=150)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "figure_data")
