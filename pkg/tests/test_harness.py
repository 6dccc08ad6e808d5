"""Harness tests: determinism, stopping rule, CSV contracts, paired comparisons.

Training here runs tiny configurations for speed; the full default-budget
runs live in the acceptance suite.
"""

import pytest

from qae.autoencoder import SystemConfig
from qae.baselines import analytic_bpsk_rayleigh_bler
from qae.harness import (
    BLER_CSV_HEADER,
    TRACE_CSV_HEADER,
    BpskLink,
    HammingLink,
    LearnedLink,
    TrainConfig,
    compare_convergence,
    config_hash,
    evaluate_bler,
    moving_average,
    report_params,
    steady_state_bler,
    train,
    write_bler_csv,
    write_trace_csv,
)

TINY = dict(epochs=3, examples_per_epoch=640, val_blocks=500)

# a (2,2) relu transmitter can be degenerate at init for unlucky seeds (the
# contract raises); the tiny tests pick seeds whose init is non-degenerate
def tiny_config(scheme, seed=6, **overrides):
    merged = {**TINY, **overrides}
    return TrainConfig(system=SystemConfig(n=2, k=2, scheme=scheme), seed=seed, **merged)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("scheme", ["ae", "qae"])
def test_training_is_deterministic(scheme):
    _, trace_a = train(tiny_config(scheme))
    _, trace_b = train(tiny_config(scheme))
    assert trace_a.bler_raw == trace_b.bler_raw
    assert trace_a.bler_smoothed == trace_b.bler_smoothed


def test_different_seeds_differ():
    _, a = train(tiny_config("qae", seed=1))
    _, b = train(tiny_config("qae", seed=2))
    assert a.bler_raw != b.bler_raw


@pytest.fixture(scope="module", params=["ae", "qae"])
def near_noiseless_model(request):
    # (4,4) at 60 dB awgn separates within 10 epochs
    tc = TrainConfig(system=SystemConfig(n=4, k=4, scheme=request.param), channel="awgn",
                     train_snr_db=60.0, epochs=10, examples_per_epoch=2000,
                     val_blocks=2000, seed=3)
    return train(tc)


def test_near_noiseless_training_reaches_zero_bler(near_noiseless_model):
    _, trace = near_noiseless_model
    assert trace.bler_raw[-1] == 0.0


def test_trace_smoothing_is_recomputable():
    _, trace = train(tiny_config("ae", epochs=8))
    assert trace.window == 5
    assert trace.bler_smoothed == moving_average(trace.bler_raw, trace.window)


def test_moving_average_definition():
    assert moving_average([1.0, 2.0, 3.0, 4.0], 3) == [1.0, 1.5, 2.0, 3.0]


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(system=SystemConfig(n=2, k=2), channel="3gpp")
    with pytest.raises(ValueError):
        TrainConfig(system=SystemConfig(n=2, k=2), batch_size=64, examples_per_epoch=32)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_stopping_rule_reaches_target_errors():
    curve = evaluate_bler(BpskLink(4), "rayleigh", [0.0], seed=1,
                          target_errors=100, max_blocks=10 ** 6, chunk_blocks=500)
    point = curve.points[0]
    assert point.errors >= 100
    assert not point.censored
    assert point.blocks % 500 == 0


def test_stopping_rule_censors_at_block_cap():
    curve = evaluate_bler(BpskLink(4), "rayleigh", [40.0], seed=1,
                          target_errors=100, max_blocks=4000, chunk_blocks=1000)
    point = curve.points[0]
    assert point.blocks == 4000
    assert point.censored


def test_evaluation_is_deterministic():
    a = evaluate_bler(BpskLink(4), "rayleigh", [0.0, 10.0], seed=9)
    b = evaluate_bler(BpskLink(4), "rayleigh", [0.0, 10.0], seed=9)
    assert a.points == b.points


def test_bler_curve_monotone_within_one_sigma():
    curve = evaluate_bler(BpskLink(4), "rayleigh", [0.0, 5.0, 10.0, 15.0, 20.0],
                          seed=2, fading="symbol")
    for prev, cur in zip(curve.points, curve.points[1:]):
        slack = (prev.ci95 + cur.ci95) / 1.96  # 1 sigma each
        assert cur.bler <= prev.bler + slack


def test_bpsk_curve_matches_analytic_within_3_sigma():
    curve = evaluate_bler(BpskLink(4), "rayleigh", [0.0, 10.0, 20.0], seed=3,
                          fading="symbol", target_errors=2000)
    for p in curve.points:
        ref = analytic_bpsk_rayleigh_bler(p.snr_db, 4)
        sigma = (ref * (1 - ref) / p.blocks) ** 0.5
        assert abs(p.bler - ref) <= 3.0 * sigma


def test_hamming_beats_bpsk_at_10db():
    # paired seeds, block fading for both
    bpsk = evaluate_bler(BpskLink(4), "rayleigh", [10.0], seed=4, target_errors=300)
    ham = evaluate_bler(HammingLink(), "rayleigh", [10.0], seed=4, target_errors=300)
    assert ham.points[0].bler < bpsk.points[0].bler


def test_learned_link_round_trip_noiseless(near_noiseless_model):
    model, _ = near_noiseless_model
    link = LearnedLink(model)
    curve = evaluate_bler(link, "awgn", [60.0], seed=5, target_errors=10, max_blocks=2000)
    assert curve.points[0].bler == 0.0


def test_evaluate_rejects_unknown_granularity():
    with pytest.raises(ValueError):
        evaluate_bler(BpskLink(4), "rayleigh", [0.0], seed=0, fading="diagonal")


# ---------------------------------------------------------------------------
# paired convergence comparison
# ---------------------------------------------------------------------------

def test_compare_convergence_pairs_streams():
    comp = compare_convergence(2, 2, seeds=[11, 12], **TINY)
    assert len(comp.traces) == 4
    schemes = [t.scheme for t in comp.traces]
    assert schemes == ["ae", "qae", "ae", "qae"]
    for seed in (11, 12):
        assert ("ae", seed) in comp.models and ("qae", seed) in comp.models
        assert comp.deltas[seed] == pytest.approx(
            comp.steady["qae"][seed] - comp.steady["ae"][seed])
    epochs = {len(t.bler_raw) for t in comp.traces}
    assert epochs == {TINY["epochs"]}


def test_steady_state_uses_tail_epochs():
    from qae.harness import ConvergenceTrace

    raw = [0.5] * 20 + [0.1] * 10
    trace = ConvergenceTrace("ae", 0, 5, raw, moving_average(raw, 5))
    assert steady_state_bler(trace) == pytest.approx(0.1)


# ---------------------------------------------------------------------------
# parameter report
# ---------------------------------------------------------------------------

def test_report_params_published_rows():
    rows = report_params([SystemConfig(n=4, k=4, scheme="ae"),
                          SystemConfig(n=4, k=4, scheme="qae")])
    assert rows[0]["total"] == 824 and rows[0]["closed_form_total"] == 824
    assert rows[1]["total"] == 440 and rows[1]["closed_form_total"] == 440


# ---------------------------------------------------------------------------
# CSV artifacts
# ---------------------------------------------------------------------------

def _non_comment_lines(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def test_bler_csv_format(tmp_path):
    curve = evaluate_bler(BpskLink(4), "rayleigh", [0.0, 10.0], seed=6,
                          target_errors=50, max_blocks=10 ** 5)
    path = tmp_path / "bler.csv"
    write_bler_csv(path, [curve], {"seed": 6, "scheme": "bpsk"})
    lines = _non_comment_lines(path)
    assert lines[0] == BLER_CSV_HEADER
    assert len(lines) == 3
    fields = lines[1].split(",")
    assert fields[0] == "bpsk" and fields[1] == "rayleigh"
    assert int(fields[5]) > 0 and int(fields[6]) >= 50
    meta = [ln for ln in path.read_text().splitlines() if ln.startswith("#")]
    assert any("seed=6" in ln for ln in meta)
    assert any("snr_convention=" in ln for ln in meta)
    assert any("config_hash=" in ln for ln in meta)


def test_trace_csv_format(tmp_path):
    _, trace = train(tiny_config("ae"))
    path = tmp_path / "trace.csv"
    write_trace_csv(path, [trace], {"seed": 6})
    lines = _non_comment_lines(path)
    assert lines[0] == TRACE_CSV_HEADER
    assert len(lines) == 1 + TINY["epochs"]
    assert lines[1].startswith("ae,6,1,")
    meta = [ln for ln in path.read_text().splitlines() if ln.startswith("#")]
    assert any("smoothing_window=5" in ln for ln in meta)


def test_csv_writes_are_byte_identical(tmp_path):
    curve = evaluate_bler(BpskLink(4), "rayleigh", [0.0], seed=8, target_errors=20)
    write_bler_csv(tmp_path / "a.csv", [curve], {"seed": 8})
    write_bler_csv(tmp_path / "b.csv", [curve], {"seed": 8})
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_config_hash_is_stable_and_sensitive():
    a = config_hash({"seed": 1, "scheme": "qae"})
    b = config_hash({"scheme": "qae", "seed": 1})
    c = config_hash({"seed": 2, "scheme": "qae"})
    assert a == b
    assert a != c
