#!/usr/bin/env python3
"""Paired AE/QAE convergence comparison on shared seeds: trains both schemes
on identical message/fading/noise streams, writes the combined trace CSV and
prints the steady-state summary with per-seed deltas.

    python scripts/run_convergence_comparison.py --n 4 --k 4 --seeds 7 8 9
"""

import argparse
from pathlib import Path

import numpy as np

from qae.harness import STEADY_STATE_EPOCH, compare_convergence, write_trace_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--layers", type=int, default=3)
    ap.add_argument("--channel", default="rayleigh", choices=("awgn", "rayleigh", "rician"))
    ap.add_argument("--rician-k", type=float, default=10.0)
    ap.add_argument("--seeds", type=int, nargs="+", default=[7, 8, 9])
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--out", type=Path, default=Path("convergence.csv"))
    args = ap.parse_args()

    comp = compare_convergence(args.n, args.k, seeds=args.seeds, layers=args.layers,
                               channel=args.channel, rician_k=args.rician_k,
                               epochs=args.epochs)
    meta = dict(n=args.n, k=args.k, layers=args.layers, channel=args.channel,
                rician_k=args.rician_k, epochs=args.epochs,
                seeds="/".join(map(str, args.seeds)),
                steady_state_epoch=STEADY_STATE_EPOCH)
    write_trace_csv(args.out, comp.traces, meta)

    window_start = min(STEADY_STATE_EPOCH + 1, args.epochs)
    print(f"steady-state BLER, mean over epochs {window_start}..{args.epochs}:")
    for seed in args.seeds:
        print(f"  seed {seed}: ae {comp.steady['ae'][seed]:.4e}  "
              f"qae {comp.steady['qae'][seed]:.4e}  delta {comp.deltas[seed]:+.4e}")
    mean_ae = float(np.mean(list(comp.steady["ae"].values())))
    mean_qae = float(np.mean(list(comp.steady["qae"].values())))
    print(f"  mean: ae {mean_ae:.4e}  qae {mean_qae:.4e}")
    print(f"traces: {args.out}")


if __name__ == "__main__":
    main()
