#!/usr/bin/env python3
"""Train AE and QAE for one (n,k) setting, then sweep BLER vs SNR alongside
the matched conventional baseline. Writes one BLER CSV per scheme plus the
baseline curve into --outdir.

Desk-scale example (a few minutes):
    python scripts/run_bler_comparison.py --n 4 --k 4 --channel rayleigh --outdir results
Use --quick for a fast smoke run with a reduced training budget.
"""

import argparse
from pathlib import Path

from qae.autoencoder import SystemConfig, save_checkpoint
from qae.harness import (
    BpskLink,
    HammingLink,
    LearnedLink,
    TrainConfig,
    evaluate_bler,
    train,
    write_bler_csv,
    write_trace_csv,
)


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--layers", type=int, default=3)
    ap.add_argument("--channel", default="rayleigh", choices=("awgn", "rayleigh", "rician"))
    ap.add_argument("--rician-k", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--snr-step", type=float, default=2.0)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--quick", action="store_true", help="reduced budget smoke run")
    return ap.parse_args()


def main():
    args = parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    snrs = [i * args.snr_step for i in range(int(20 / args.snr_step) + 1)]
    overrides = dict(epochs=args.epochs)
    if args.quick:
        overrides = dict(epochs=5, examples_per_epoch=2000, val_blocks=2000)

    for scheme in ("ae", "qae"):
        tc = TrainConfig(system=SystemConfig(n=args.n, k=args.k, layers=args.layers, scheme=scheme),
                         channel=args.channel, rician_k=args.rician_k, seed=args.seed, **overrides)
        print(f"training {scheme} ({args.n},{args.k}) on {args.channel}, seed {args.seed} ...")
        model, trace = train(tc)
        print(f"  final validation BLER {trace.bler_raw[-1]:.4e}")
        meta = dict(scheme=scheme, n=args.n, k=args.k, layers=args.layers,
                    channel=args.channel, rician_k=args.rician_k, seed=args.seed,
                    epochs=tc.epochs)
        save_checkpoint(model, args.outdir / f"{scheme}_{args.n}_{args.k}.json", args.seed, extra=meta)
        write_trace_csv(args.outdir / f"{scheme}_{args.n}_{args.k}_trace.csv", [trace], meta)
        curve = evaluate_bler(LearnedLink(model), args.channel, snrs,
                              seed=args.seed + 1000, rician_k=args.rician_k)
        write_bler_csv(args.outdir / f"{scheme}_{args.n}_{args.k}_bler.csv", [curve], meta)

    if args.n == 7 and args.k == 4:
        link = HammingLink()
    elif args.n == args.k:
        link = BpskLink(args.k)
    else:
        print("no matched conventional baseline for this (n,k); skipping")
        return
    curve = evaluate_bler(link, args.channel, snrs, seed=args.seed + 2000,
                          rician_k=args.rician_k)
    meta = dict(scheme=link.scheme, n=link.n, k=link.k, channel=args.channel,
                rician_k=args.rician_k, seed=args.seed + 2000)
    write_bler_csv(args.outdir / f"{link.scheme}_bler.csv", [curve], meta)
    print(f"wrote curves to {args.outdir}/")


if __name__ == "__main__":
    main()
