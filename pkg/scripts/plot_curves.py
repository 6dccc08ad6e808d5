#!/usr/bin/env python3
"""Plot BLER and convergence CSVs produced by the harness (auxiliary tool;
the CSVs are the contract). Requires matplotlib (`pip install qae[plot]`).

    python scripts/plot_curves.py bler results/*.csv --out bler.png
    python scripts/plot_curves.py trace convergence.csv --out conv.png
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(rows))


def plot_bler(paths, out):
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    for path in paths:
        series = defaultdict(list)
        for row in read_rows(path):
            key = f"{row['scheme']} ({row['n']},{row['k']})"
            series[key].append((float(row["snr_db"]), float(row["bler"])))
        for key, pts in series.items():
            pts.sort()
            ax.semilogy([p[0] for p in pts], [max(p[1], 1e-7) for p in pts],
                        marker="o", label=f"{key} [{Path(path).stem}]")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("BLER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print(f"wrote {out}")


def plot_trace(paths, out):
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    for path in paths:
        series = defaultdict(list)
        for row in read_rows(path):
            key = f"{row['scheme']} seed {row['seed']}"
            series[key].append((int(row["epoch"]), float(row["bler_smoothed"])))
        for key, pts in series.items():
            pts.sort()
            ax.semilogy([p[0] for p in pts], [max(p[1], 1e-7) for p in pts], label=key)
    ax.set_xlabel("epoch")
    ax.set_ylabel("validation BLER (smoothed)")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=8)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print(f"wrote {out}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("kind", choices=("bler", "trace"))
    ap.add_argument("csvs", nargs="+")
    ap.add_argument("--out", default="plot.png")
    args = ap.parse_args()
    try:
        import matplotlib  # noqa: F401
    except ImportError:
        sys.exit("matplotlib is not installed; run pip install 'qae[plot]'")
    if args.kind == "bler":
        plot_bler(args.csvs, args.out)
    else:
        plot_trace(args.csvs, args.out)


if __name__ == "__main__":
    main()
