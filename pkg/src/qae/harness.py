"""Training loop, Monte Carlo BLER evaluation, convergence comparison, CSV artifacts.

Seeding scheme: every run's master seed is split with numpy's SeedSequence
into independent init / training-data / validation streams, so runs are
bit-reproducible and paired AE/QAE runs on the same seed consume identical
message, fading and noise streams.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autoencoder import (
    Model,
    SNR_CONVENTION,
    SystemConfig,
    batch_gradient,
    build_model,
    closed_form_counts,
    count_parameters,
    decode_messages,
    transmit_table,
)
from .baselines import HAMMING, all_message_bits, bpsk_transmit, hamming_soft_decode_blocks
from .channel import FADING_KINDS, complex_noise, draw_fading, snr_to_sigma2
from .nn import AdamState, adam_step

BLER_CSV_HEADER = "scheme,channel,n,k,snr_db,blocks,errors,bler,ci95"
TRACE_CSV_HEADER = "scheme,seed,epoch,bler_raw,bler_smoothed"

SMOOTHING_WINDOW = 5
STEADY_STATE_EPOCH = 20  # steady-state statistics use epochs strictly beyond this
DEFAULT_TARGET_ERRORS = 100
DEFAULT_MAX_BLOCKS = 1_000_000
_EVAL_CHUNK = 20_000


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


@dataclass(frozen=True)
class TrainConfig:
    """One training run; the defaults are the reference hyperparameters."""

    system: SystemConfig
    channel: str = "rayleigh"
    rician_k: float = 10.0
    batch_size: int = 32
    learning_rate: float = 0.001
    train_snr_db: float = 10.0
    epochs: int = 50
    examples_per_epoch: int = 10_000
    val_blocks: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.channel not in FADING_KINDS:
            raise ValueError(f"unknown channel kind {self.channel!r}")
        if min(self.batch_size, self.epochs, self.examples_per_epoch, self.val_blocks) < 1:
            raise ValueError("batch_size, epochs, examples_per_epoch, val_blocks must be positive")
        if self.examples_per_epoch < self.batch_size:
            raise ValueError("examples_per_epoch must be at least one batch")


@dataclass
class ConvergenceTrace:
    """Per-epoch validation BLER at the train SNR, raw and smoothed."""

    scheme: str
    seed: int
    window: int
    bler_raw: list
    bler_smoothed: list


@dataclass(frozen=True)
class BlerPoint:
    snr_db: float
    blocks: int
    errors: int
    bler: float
    ci95: float
    censored: bool  # stopped at the block cap before reaching the error target


@dataclass
class BlerCurve:
    scheme: str
    channel: str
    n: int
    k: int
    fading: str  # "block": one h per message block; "symbol": one h per channel use
    seed: int
    rician_k: float
    points: list


def moving_average(values, window: int):
    """Trailing moving average; early entries average whatever exists so far."""
    out = []
    for i in range(len(values)):
        lo = max(0, i - window + 1)
        out.append(float(sum(values[lo:i + 1]) / (i + 1 - lo)))
    return out


def _stream_bler(model: Model, msgs, h, noise) -> float:
    """BLER of the current model on a frozen message/fading/noise stream."""
    table = transmit_table(model.transmitter, model.config)
    xhat = table[msgs] + noise / h[:, None]
    return float(np.mean(decode_messages(xhat, model.receiver) != msgs))


def train(tc: TrainConfig):
    """Adam training at the fixed train SNR with per-epoch validation BLER.

    The validation stream is drawn once and frozen, so the trace compares
    like with like across epochs. Returns (model, ConvergenceTrace).
    Raises TrainingDiverged on a non-finite loss.
    """
    cfg = tc.system
    init_ss, data_ss, val_ss = np.random.SeedSequence(tc.seed).spawn(3)
    model = build_model(cfg, np.random.default_rng(init_ss))
    data_rng = np.random.default_rng(data_ss)
    val_rng = np.random.default_rng(val_ss)

    sigma2 = snr_to_sigma2(tc.train_snr_db, cfg.rate)
    val_msgs = val_rng.integers(0, cfg.M, tc.val_blocks)
    val_h = draw_fading(tc.channel, val_rng, tc.rician_k, size=tc.val_blocks)
    val_noise = complex_noise(val_rng, (tc.val_blocks, cfg.n), sigma2)

    params = model.parameters()
    state = AdamState.for_params(params, learning_rate=tc.learning_rate)
    steps_per_epoch = tc.examples_per_epoch // tc.batch_size
    raw = []
    for epoch in range(tc.epochs):
        for _ in range(steps_per_epoch):
            msgs = data_rng.integers(0, cfg.M, tc.batch_size)
            h = draw_fading(tc.channel, data_rng, tc.rician_k, size=tc.batch_size)
            noise = complex_noise(data_rng, (tc.batch_size, cfg.n), sigma2)
            loss, grads = batch_gradient(model, msgs, h, noise)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch + 1}")
            params = adam_step(params, grads, state)
            model.set_parameters(params)
        raw.append(_stream_bler(model, val_msgs, val_h, val_noise))
    trace = ConvergenceTrace(cfg.scheme, tc.seed, SMOOTHING_WINDOW,
                             raw, moving_average(raw, SMOOTHING_WINDOW))
    return model, trace


class LearnedLink:
    """Monte Carlo adapter for a trained model: table transmit, argmax decode."""

    def __init__(self, model: Model):
        self.model = model
        self.scheme = model.config.scheme
        self.n = model.config.n
        self.k = model.config.k
        self._table = transmit_table(model.transmitter, model.config)

    def transmit(self, msgs):
        return self._table[msgs]

    def decide(self, xhat):
        return decode_messages(xhat, self.model.receiver)


class BpskLink:
    """Uncoded BPSK over n = k channel uses."""

    def __init__(self, k: int = 4):
        self.scheme = "bpsk"
        self.n = k
        self.k = k
        self._table = bpsk_transmit(all_message_bits(k))
        self._weights = 1 << np.arange(k - 1, -1, -1)

    def transmit(self, msgs):
        return self._table[msgs]

    def decide(self, xhat):
        return (np.asarray(xhat).real < 0).astype(np.int64) @ self._weights


class HammingLink:
    """Hamming(7,4) with exact soft-decision ML decoding."""

    scheme = "hamming74"
    n = 7
    k = 4

    def transmit(self, msgs):
        return HAMMING.bpsk_codebook[msgs].astype(np.complex128)

    def decide(self, xhat):
        return hamming_soft_decode_blocks(xhat)


def evaluate_bler(link, channel_kind: str, snr_dbs, seed: int, rician_k: float = 10.0,
                  target_errors: int = DEFAULT_TARGET_ERRORS,
                  max_blocks: int = DEFAULT_MAX_BLOCKS,
                  fading: str = "block", chunk_blocks: int = _EVAL_CHUNK) -> BlerCurve:
    """Monte Carlo BLER per SNR until >= target_errors block errors or max_blocks.

    fading="block" draws one coefficient per message block (the learned-link
    regime); "symbol" draws an independent coefficient per channel use, the
    regime the uncoded closed forms describe. Points that hit the block cap
    short of the error target are flagged censored.
    """
    if fading not in ("block", "symbol"):
        raise ValueError(f"unknown fading granularity {fading!r}")
    if channel_kind not in FADING_KINDS:
        raise ValueError(f"unknown channel kind {channel_kind!r}")
    rate = link.k / link.n
    n_msgs = 1 << link.k
    points = []
    for snr_db, ss in zip(snr_dbs, np.random.SeedSequence(seed).spawn(len(snr_dbs))):
        rng = np.random.default_rng(ss)
        sigma2 = snr_to_sigma2(snr_db, rate)
        blocks = errors = 0
        while errors < target_errors and blocks < max_blocks:
            b = int(min(chunk_blocks, max_blocks - blocks))
            msgs = rng.integers(0, n_msgs, b)
            x = link.transmit(msgs)
            if fading == "block":
                h = draw_fading(channel_kind, rng, rician_k, size=b)[:, None]
            else:
                h = draw_fading(channel_kind, rng, rician_k, size=(b, link.n))
            noise = complex_noise(rng, (b, link.n), sigma2)
            decoded = link.decide(x + noise / h)
            errors += int(np.sum(decoded != msgs))
            blocks += b
        bler = errors / blocks
        ci95 = 1.96 * math.sqrt(max(bler * (1.0 - bler), 0.0) / blocks)
        points.append(BlerPoint(float(snr_db), blocks, errors, bler, ci95,
                                censored=errors < target_errors))
    return BlerCurve(link.scheme, channel_kind, link.n, link.k, fading,
                     seed, rician_k, points)


def steady_state_bler(trace: ConvergenceTrace) -> float:
    """Mean raw validation BLER over the epochs beyond the steady-state threshold."""
    tail = trace.bler_raw[STEADY_STATE_EPOCH:]
    if not tail:
        tail = trace.bler_raw
    return float(np.mean(tail))


@dataclass
class ConvergenceComparison:
    """Paired AE/QAE traces plus steady-state summaries, keyed by seed."""

    traces: list
    models: dict
    steady: dict
    deltas: dict  # per seed: qae steady mean minus ae steady mean


def compare_convergence(n: int, k: int, seeds, layers: int = 3,
                        channel: str = "rayleigh", rician_k: float = 10.0,
                        **train_overrides) -> ConvergenceComparison:
    """Train both schemes on each shared seed with identical data streams."""
    traces = []
    models = {}
    steady = {"ae": {}, "qae": {}}
    for seed in seeds:
        for scheme in ("ae", "qae"):
            tc = TrainConfig(system=SystemConfig(n=n, k=k, layers=layers, scheme=scheme),
                             channel=channel, rician_k=rician_k, seed=seed,
                             **train_overrides)
            model, trace = train(tc)
            traces.append(trace)
            models[(scheme, seed)] = model
            steady[scheme][seed] = steady_state_bler(trace)
    deltas = {seed: steady["qae"][seed] - steady["ae"][seed] for seed in seeds}
    return ConvergenceComparison(traces, models, steady, deltas)


def report_params(configs) -> list:
    """Side-by-side walked and closed-form parameter sizes for each config.

    count_parameters raises InternalConsistencyError if a walked total ever
    disagrees with its closed form.
    """
    rows = []
    for config in configs:
        walked = count_parameters(config)
        formula = closed_form_counts(config)
        rows.append({
            "scheme": config.scheme, "n": config.n, "k": config.k, "layers": config.layers,
            "transmitter": walked["transmitter"], "receiver": walked["receiver"],
            "total": walked["total"], "closed_form_total": formula["total"],
        })
    return rows


def config_hash(meta: dict) -> str:
    """Short stable digest of a metadata mapping."""
    canon = ";".join(f"{key}={meta[key]}" for key in sorted(meta))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _metadata_lines(meta: dict) -> list:
    meta = dict(meta)
    meta.setdefault("snr_convention", SNR_CONVENTION)
    meta["config_hash"] = config_hash(meta)
    return [f"# {key}={meta[key]}" for key in sorted(meta)]


def write_bler_csv(path, curves, meta: dict) -> None:
    """BLER CSV: '#' metadata lines, then the fixed header, then one row per point."""
    lines = _metadata_lines(meta) + [BLER_CSV_HEADER]
    for curve in curves:
        for p in curve.points:
            lines.append(f"{curve.scheme},{curve.channel},{curve.n},{curve.k},"
                         f"{p.snr_db:g},{p.blocks},{p.errors},{p.bler:.6e},{p.ci95:.6e}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_trace_csv(path, traces, meta: dict) -> None:
    """Convergence CSV: '#' metadata lines, fixed header, one row per epoch."""
    meta = dict(meta)
    meta.setdefault("smoothing_window", SMOOTHING_WINDOW)
    lines = _metadata_lines(meta) + [TRACE_CSV_HEADER]
    for trace in traces:
        for epoch, (raw, smooth) in enumerate(zip(trace.bler_raw, trace.bler_smoothed), 1):
            lines.append(f"{trace.scheme},{trace.seed},{epoch},{raw:.6e},{smooth:.6e}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
