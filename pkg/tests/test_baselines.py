"""Baseline tests: BPSK mapping/detection, Hamming(7,4) code properties, analytics.

The Hamming soft decoder is cross-checked against a second implementation
built here from explicit parity equations and a plain min-distance loop,
plus a hard-decision syndrome decoder used as the soft-vs-hard foil.
"""

import math

import numpy as np
import pytest

from qae.baselines import (
    HAMMING,
    all_message_bits,
    analytic_bpsk_rayleigh_ber,
    analytic_bpsk_rayleigh_bler,
    bits_to_msg,
    bpsk_detect,
    bpsk_transmit,
    hamming_encode,
    hamming_soft_decode,
    hamming_soft_decode_blocks,
    msg_to_bits,
)
from qae.channel import apply_channel, complex_noise, draw_fading, draw_realization, equalize, snr_to_sigma2


# ---------------------------------------------------------------------------
# independent reference implementation (parity equations, explicit loops)
# ---------------------------------------------------------------------------

def reference_codeword(m0, m1, m2, m3):
    return [m0, m1, m2, m3,
            m1 ^ m2 ^ m3,
            m0 ^ m2 ^ m3,
            m0 ^ m1 ^ m3]


def reference_codebook():
    book = []
    for msg in range(16):
        bits = [(msg >> 3) & 1, (msg >> 2) & 1, (msg >> 1) & 1, msg & 1]
        book.append(reference_codeword(*bits))
    return np.array(book)


def reference_soft_decode(block_real):
    best, best_dist = 0, float("inf")
    for msg, code in enumerate(reference_codebook()):
        antipodal = 1.0 - 2.0 * code
        dist = float(np.linalg.norm(block_real - antipodal))
        if dist < best_dist:
            best, best_dist = msg, dist
    return best


# parity-check matrix [P^T | I3] for the systematic generator
H_CHECK = np.hstack([HAMMING.generator[:, 4:].T, np.eye(3, dtype=np.int64)])


def hard_decode(block_real):
    """Threshold bits then correct a single error via the syndrome."""
    bits = (block_real < 0).astype(np.int64)
    syndrome = H_CHECK @ bits % 2
    if syndrome.any():
        for pos in range(7):
            if np.array_equal(H_CHECK[:, pos], syndrome):
                bits[pos] ^= 1
                break
    return int(bits[:4] @ (1 << np.arange(3, -1, -1)))


# ---------------------------------------------------------------------------
# BPSK
# ---------------------------------------------------------------------------

def test_bpsk_mapping():
    assert np.array_equal(bpsk_transmit([0, 0, 0, 0]), np.ones(4, dtype=complex))
    assert np.array_equal(bpsk_transmit([1, 0, 1, 0]), np.array([-1, 1, -1, 1], dtype=complex))


def test_bpsk_block_energy():
    for msg in range(16):
        x = bpsk_transmit(msg_to_bits(msg, 4))
        assert np.linalg.norm(x) ** 2 == pytest.approx(4.0)


def test_bpsk_noiseless_loop_all_messages():
    rng = np.random.default_rng(0)
    for msg in range(16):
        bits = msg_to_bits(msg, 4)
        r = draw_realization("rayleigh", 0.0, 4, rng)
        xhat = equalize(apply_channel(bpsk_transmit(bits), r), r.h)
        assert bits_to_msg(bpsk_detect(xhat)) == msg


def test_bpsk_detect_tie_breaks_to_zero():
    assert np.array_equal(bpsk_detect(np.array([0.0 + 1j, -0.1, 0.1])), [0, 1, 0])


def test_bpsk_rayleigh_ber_matches_closed_form():
    # independent per-symbol fading, 1e6 bits, 3 sigma binomial band
    rng = np.random.default_rng(17)
    snr_db = 10.0
    sigma2 = snr_to_sigma2(snr_db, 1.0)
    bits = rng.integers(0, 2, 10 ** 6)
    x = bpsk_transmit(bits)
    h = draw_fading("rayleigh", rng, size=bits.size)
    xhat = x + complex_noise(rng, bits.size, sigma2) / h
    ber = float(np.mean(bpsk_detect(xhat) != bits))
    p = analytic_bpsk_rayleigh_ber(snr_db)
    assert abs(ber - p) <= 3.0 * math.sqrt(p * (1 - p) / bits.size)


# ---------------------------------------------------------------------------
# Hamming code structure
# ---------------------------------------------------------------------------

def test_codebook_matches_reference_parity_equations():
    assert np.array_equal(HAMMING.codebook, reference_codebook())


def test_zero_message_maps_to_all_plus_one():
    assert np.array_equal(hamming_encode(0), np.ones(7))


def test_generator_row_is_message_1000():
    assert np.array_equal(hamming_encode(0b1000), 1.0 - 2.0 * HAMMING.generator[0])


def test_minimum_distance_is_three():
    book = HAMMING.codebook
    dmin = 7
    for i in range(16):
        for j in range(16):
            if i != j:
                dmin = min(dmin, int(np.sum(book[i] != book[j])))
    assert dmin == 3


def test_codebook_closed_under_xor():
    book = {tuple(row) for row in HAMMING.codebook}
    for a in HAMMING.codebook:
        for b in HAMMING.codebook:
            assert tuple((a + b) % 2) in book


# ---------------------------------------------------------------------------
# soft decoding
# ---------------------------------------------------------------------------

def test_soft_decode_noiseless_all_messages():
    for msg in range(16):
        assert hamming_soft_decode(hamming_encode(msg).astype(complex)) == msg


def test_soft_decode_corrects_every_single_sign_flip():
    for msg in range(16):
        for pos in range(7):
            block = hamming_encode(msg)
            block[pos] = -block[pos]
            assert hamming_soft_decode(block.astype(complex)) == msg


def test_soft_decode_against_independent_implementation():
    rng = np.random.default_rng(23)
    blocks = HAMMING.bpsk_codebook[rng.integers(0, 16, 10 ** 4)].astype(complex)
    blocks += complex_noise(rng, blocks.shape, 0.7)
    got = hamming_soft_decode_blocks(blocks)
    for i in range(blocks.shape[0]):
        assert got[i] == reference_soft_decode(blocks[i].real)


def test_soft_never_worse_than_hard():
    # paired draws; soft-vs-hard compared with a 3 sigma Skellam-style band
    rng = np.random.default_rng(31)
    n_blocks = 20_000
    msgs = rng.integers(0, 16, n_blocks)
    sigma2 = snr_to_sigma2(3.0, 4.0 / 7.0)
    h = draw_fading("rayleigh", rng, size=n_blocks)[:, None]
    noise = complex_noise(rng, (n_blocks, 7), sigma2)
    xhat = HAMMING.bpsk_codebook[msgs] + noise / h
    soft = hamming_soft_decode_blocks(xhat)
    hard = np.array([hard_decode(row) for row in xhat.real])
    soft_only = int(np.sum((soft != msgs) & (hard == msgs)))
    hard_only = int(np.sum((hard != msgs) & (soft == msgs)))
    assert soft_only <= hard_only + 3.0 * math.sqrt(soft_only + hard_only)
    assert int(np.sum(soft != msgs)) <= int(np.sum(hard != msgs))


def test_hamming_encode_rejects_bad_message():
    with pytest.raises(ValueError):
        hamming_encode(16)


def test_soft_decode_rejects_bad_length():
    with pytest.raises(ValueError):
        hamming_soft_decode(np.zeros(6, dtype=complex))


# ---------------------------------------------------------------------------
# analytic closed forms
# ---------------------------------------------------------------------------

def test_bler_limits():
    assert analytic_bpsk_rayleigh_bler(80.0, 4) < 1e-7
    assert analytic_bpsk_rayleigh_bler(-80.0, 4) == pytest.approx(1.0 - 0.5 ** 4, abs=1e-3)


def test_bler_from_ber():
    p = analytic_bpsk_rayleigh_ber(10.0)
    assert analytic_bpsk_rayleigh_bler(10.0, 4) == pytest.approx(1.0 - (1.0 - p) ** 4)


def test_bits_round_trip():
    for msg in range(16):
        assert bits_to_msg(msg_to_bits(msg, 4)) == msg
    assert np.array_equal(all_message_bits(2), [[0, 0], [0, 1], [1, 0], [1, 1]])
