"""Command-line interface: train, evaluate, baseline, convergence, params.

Exit codes: 0 success, 1 usage error, 2 internal-consistency failure,
3 training divergence. Flags override values read from --config files,
which are plain "key = value" documents (see the README).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .autoencoder import (
    InternalConsistencyError,
    SystemConfig,
    load_checkpoint,
    save_checkpoint,
)
from .harness import (
    BpskLink,
    HammingLink,
    LearnedLink,
    TrainConfig,
    TrainingDiverged,
    compare_convergence,
    evaluate_bler,
    report_params,
    write_bler_csv,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONSISTENCY = 2
EXIT_DIVERGED = 3


class UsageError(Exception):
    """Bad flags, bad config file, or inconsistent options."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the CLI contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_CONFIG_TYPES = {
    "scheme": str, "n": int, "k": int, "layers": int,
    "channel": str, "rician_k": float, "train_snr": float,
    "snr_start": float, "snr_stop": float, "snr_step": float,
    "epochs": int, "seed": int, "out": str, "checkpoint": str,
    "examples_per_epoch": int, "batch_size": int, "val_blocks": int,
    "num_seeds": int, "fading": str, "target_errors": int, "max_blocks": int,
    "baseline": str,
}

_DEFAULTS = {
    "scheme": "qae", "n": 4, "k": 4, "layers": 3,
    "channel": "rayleigh", "rician_k": 10.0, "train_snr": 10.0,
    "snr_start": 0.0, "snr_stop": 20.0, "snr_step": 5.0,
    "epochs": 50, "seed": 0,
    "examples_per_epoch": 10_000, "batch_size": 32, "val_blocks": 10_000,
    "num_seeds": 3, "fading": "block",
    "target_errors": harness.DEFAULT_TARGET_ERRORS,
    "max_blocks": harness.DEFAULT_MAX_BLOCKS,
}


def load_config_file(path) -> dict:
    """Parse a "key = value" document; '#' starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


class _Options:
    """Flag values merged over config-file values merged over defaults."""

    def __init__(self, args: argparse.Namespace):
        self._cli = vars(args)
        self._file = load_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, key):
        cli_value = self._cli.get(key)
        if cli_value is not None:
            return cli_value
        if key in self._file:
            return self._file[key]
        return _DEFAULTS.get(key)


def _add_flags(parser, names) -> None:
    flags = {
        "scheme": dict(type=str, choices=("ae", "qae")),
        "n": dict(type=int),
        "k": dict(type=int),
        "layers": dict(type=int),
        "channel": dict(type=str, choices=("awgn", "rayleigh", "rician")),
        "rician_k": dict(type=float),
        "train_snr": dict(type=float),
        "snr_start": dict(type=float),
        "snr_stop": dict(type=float),
        "snr_step": dict(type=float),
        "epochs": dict(type=int),
        "seed": dict(type=int),
        "out": dict(type=str),
        "checkpoint": dict(type=str),
        "examples_per_epoch": dict(type=int),
        "batch_size": dict(type=int),
        "val_blocks": dict(type=int),
        "num_seeds": dict(type=int),
        "fading": dict(type=str, choices=("block", "symbol")),
        "target_errors": dict(type=int),
        "max_blocks": dict(type=int),
    }
    parser.add_argument("--config", type=str, help="key = value config file; flags override it")
    for name in names:
        parser.add_argument("--" + name.replace("_", "-"), **flags[name])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qae", description="End-to-end learned transceiver harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one scheme and write checkpoint + trace CSV")
    _add_flags(p, ["scheme", "n", "k", "layers", "channel", "rician_k", "train_snr",
                   "epochs", "examples_per_epoch", "batch_size", "val_blocks",
                   "seed", "checkpoint", "out"])

    p = sub.add_parser("evaluate", help="Monte Carlo BLER curve for a trained checkpoint")
    _add_flags(p, ["checkpoint", "channel", "rician_k", "snr_start", "snr_stop", "snr_step",
                   "fading", "target_errors", "max_blocks", "seed", "out"])

    p = sub.add_parser("baseline", help="BLER curve for a conventional baseline")
    p.add_argument("baseline", choices=("bpsk", "hamming"), nargs="?",
                   help="bpsk (n = k) or hamming (fixed (7,4) soft decision)")
    _add_flags(p, ["n", "k", "channel", "rician_k", "snr_start", "snr_stop", "snr_step",
                   "fading", "target_errors", "max_blocks", "seed", "out"])

    p = sub.add_parser("convergence", help="paired AE/QAE convergence comparison")
    _add_flags(p, ["n", "k", "layers", "channel", "rician_k", "train_snr",
                   "epochs", "examples_per_epoch", "batch_size", "val_blocks",
                   "num_seeds", "seed", "out"])

    p = sub.add_parser("params", help="walked vs closed-form parameter counts")
    _add_flags(p, ["n", "k", "layers", "scheme", "out"])

    return parser


def _snr_list(opts) -> list:
    start, stop, step = opts.get("snr_start"), opts.get("snr_stop"), opts.get("snr_step")
    if step <= 0:
        raise UsageError("snr-step must be positive")
    if stop < start:
        raise UsageError("snr-stop must be >= snr-start")
    count = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(count)]


def _system_config(opts, scheme=None) -> SystemConfig:
    try:
        return SystemConfig(n=opts.get("n"), k=opts.get("k"),
                            layers=opts.get("layers"), scheme=scheme or opts.get("scheme"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _train_config(opts, system: SystemConfig) -> TrainConfig:
    try:
        return TrainConfig(system=system,
                           channel=opts.get("channel"), rician_k=opts.get("rician_k"),
                           batch_size=opts.get("batch_size"),
                           train_snr_db=opts.get("train_snr"), epochs=opts.get("epochs"),
                           examples_per_epoch=opts.get("examples_per_epoch"),
                           val_blocks=opts.get("val_blocks"), seed=opts.get("seed"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_train(opts) -> int:
    tc = _train_config(opts, _system_config(opts))
    model, trace = harness.train(tc)
    checkpoint_path = opts.get("checkpoint") or "model.json"
    out_path = opts.get("out") or "trace.csv"
    train_meta = {
        "channel": tc.channel, "rician_k": tc.rician_k, "train_snr_db": tc.train_snr_db,
        "epochs": tc.epochs, "examples_per_epoch": tc.examples_per_epoch,
        "batch_size": tc.batch_size, "learning_rate": tc.learning_rate,
        "val_blocks": tc.val_blocks,
    }
    save_checkpoint(model, checkpoint_path, tc.seed, extra=train_meta)
    meta = dict(train_meta, scheme=tc.system.scheme, n=tc.system.n, k=tc.system.k,
                layers=tc.system.layers, seed=tc.seed)
    write_trace_csv(out_path, [trace], meta)
    print(f"trained {tc.system.scheme} ({tc.system.n},{tc.system.k}) on {tc.channel}, "
          f"seed {tc.seed}: final validation BLER {trace.bler_raw[-1]:.4e}")
    print(f"checkpoint: {checkpoint_path}")
    print(f"trace: {out_path}")
    return EXIT_OK


def _cmd_evaluate(opts) -> int:
    checkpoint_path = opts.get("checkpoint")
    if not checkpoint_path:
        raise UsageError("evaluate requires --checkpoint")
    try:
        model, doc = load_checkpoint(checkpoint_path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load checkpoint {checkpoint_path}: {exc}") from exc
    curve = evaluate_bler(LearnedLink(model), opts.get("channel"), _snr_list(opts),
                          seed=opts.get("seed"), rician_k=opts.get("rician_k"),
                          target_errors=opts.get("target_errors"),
                          max_blocks=opts.get("max_blocks"), fading=opts.get("fading"))
    out_path = opts.get("out") or "bler.csv"
    meta = {"scheme": curve.scheme, "channel": curve.channel, "n": curve.n, "k": curve.k,
            "fading": curve.fading, "seed": curve.seed, "rician_k": curve.rician_k,
            "checkpoint_seed": doc.get("seed")}
    write_bler_csv(out_path, [curve], meta)
    for p in curve.points:
        print(f"{curve.scheme} {p.snr_db:g} dB: bler {p.bler:.4e} "
              f"({p.errors}/{p.blocks}{', censored' if p.censored else ''})")
    print(f"curve: {out_path}")
    return EXIT_OK


def _cmd_baseline(opts) -> int:
    kind = opts.get("baseline")
    if kind not in ("bpsk", "hamming"):
        raise UsageError("baseline must be 'bpsk' or 'hamming'")
    if kind == "bpsk":
        n, k = opts.get("n"), opts.get("k")
        if n != k:
            raise UsageError("uncoded bpsk requires n = k")
        link = BpskLink(k)
    else:
        cli_n, cli_k = opts._cli.get("n"), opts._cli.get("k")
        if (cli_n is not None and cli_n != 7) or (cli_k is not None and cli_k != 4):
            raise UsageError("the hamming baseline is fixed at (7,4)")
        link = HammingLink()
    curve = evaluate_bler(link, opts.get("channel"), _snr_list(opts),
                          seed=opts.get("seed"), rician_k=opts.get("rician_k"),
                          target_errors=opts.get("target_errors"),
                          max_blocks=opts.get("max_blocks"), fading=opts.get("fading"))
    out_path = opts.get("out") or "baseline_bler.csv"
    meta = {"scheme": curve.scheme, "channel": curve.channel, "n": curve.n, "k": curve.k,
            "fading": curve.fading, "seed": curve.seed, "rician_k": curve.rician_k}
    write_bler_csv(out_path, [curve], meta)
    for p in curve.points:
        print(f"{curve.scheme} {p.snr_db:g} dB: bler {p.bler:.4e} "
              f"({p.errors}/{p.blocks}{', censored' if p.censored else ''})")
    print(f"curve: {out_path}")
    return EXIT_OK


def _cmd_convergence(opts) -> int:
    base_seed = opts.get("seed")
    seeds = [base_seed + i for i in range(opts.get("num_seeds"))]
    try:
        comparison = compare_convergence(
            n=opts.get("n"), k=opts.get("k"), seeds=seeds, layers=opts.get("layers"),
            channel=opts.get("channel"), rician_k=opts.get("rician_k"),
            batch_size=opts.get("batch_size"), train_snr_db=opts.get("train_snr"),
            epochs=opts.get("epochs"), examples_per_epoch=opts.get("examples_per_epoch"),
            val_blocks=opts.get("val_blocks"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out_path = opts.get("out") or "convergence.csv"
    meta = {"n": opts.get("n"), "k": opts.get("k"), "layers": opts.get("layers"),
            "channel": opts.get("channel"), "rician_k": opts.get("rician_k"),
            "train_snr_db": opts.get("train_snr"), "epochs": opts.get("epochs"),
            "seeds": "/".join(str(s) for s in seeds),
            "steady_state_epoch": harness.STEADY_STATE_EPOCH}
    write_trace_csv(out_path, comparison.traces, meta)
    window_start = min(harness.STEADY_STATE_EPOCH + 1, opts.get("epochs"))
    print(f"steady-state BLER (mean over epochs {window_start}..{opts.get('epochs')}):")
    for seed in seeds:
        ae = comparison.steady["ae"][seed]
        qae = comparison.steady["qae"][seed]
        print(f"  seed {seed}: ae {ae:.4e}  qae {qae:.4e}  delta(qae-ae) {comparison.deltas[seed]:+.4e}")
    mean_ae = float(np.mean(list(comparison.steady["ae"].values())))
    mean_qae = float(np.mean(list(comparison.steady["qae"].values())))
    print(f"  mean over seeds: ae {mean_ae:.4e}  qae {mean_qae:.4e}")
    print(f"traces: {out_path}")
    return EXIT_OK


def _cmd_params(opts) -> int:
    if opts._cli.get("n") is not None or opts._cli.get("k") is not None or "n" in opts._file:
        pairs = [(opts.get("n"), opts.get("k"))]
    else:
        pairs = [(4, 4), (7, 4), (8, 8)]
    layers = opts.get("layers")
    configs = []
    for n, k in pairs:
        for scheme in ("ae", "qae"):
            try:
                configs.append(SystemConfig(n=n, k=k, layers=layers, scheme=scheme))
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
    rows = report_params(configs)
    header = f"{'scheme':<7}{'n':>3}{'k':>3}{'L':>3}{'transmitter':>13}{'receiver':>10}{'total':>9}{'closed form':>13}"
    print(header)
    for r in rows:
        print(f"{r['scheme']:<7}{r['n']:>3}{r['k']:>3}{r['layers']:>3}"
              f"{r['transmitter']:>13}{r['receiver']:>10}{r['total']:>9}{r['closed_form_total']:>13}")
    out_path = opts.get("out")
    if out_path:
        lines = ["scheme,n,k,layers,transmitter,receiver,total,closed_form_total"]
        lines += [f"{r['scheme']},{r['n']},{r['k']},{r['layers']},{r['transmitter']},"
                  f"{r['receiver']},{r['total']},{r['closed_form_total']}" for r in rows]
        Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"table: {out_path}")
    return EXIT_OK


_DISPATCH = {
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "baseline": _cmd_baseline,
    "convergence": _cmd_convergence,
    "params": _cmd_params,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _DISPATCH[args.command](_Options(args))
    except UsageError as exc:
        print(f"qae: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalConsistencyError as exc:
        print(f"qae: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except TrainingDiverged as exc:
        print(f"qae: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
