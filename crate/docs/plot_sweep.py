#!/usr/bin/env python3
"""Plot a sweep report produced by `offsim sweep --output sweep.csv`.

Usage:
    offsim sweep --output sweep.csv
    python3 docs/plot_sweep.py sweep.csv [out_prefix]

Writes <out_prefix>_delay.png and <out_prefix>_energy.png: total delay and
total energy versus split point, one line per exit.
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    csv_path = sys.argv[1]
    prefix = sys.argv[2] if len(sys.argv) > 2 else "sweep"

    frame = pd.read_csv(csv_path, comment="#")
    for column, unit, name in [
        ("t_total_ms", "ms", "delay"),
        ("e_total_j", "J", "energy"),
    ]:
        fig, ax = plt.subplots(figsize=(6, 4))
        for exit_index, group in frame.groupby("exit"):
            group = group.sort_values("split")
            ax.plot(group["split"], group[column], marker="o", label=f"exit {exit_index}")
        ax.set_xlabel("split point S")
        ax.set_ylabel(f"total {name} [{unit}]")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out = f"{prefix}_{name}.png"
        fig.savefig(out, dpi=150)
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
