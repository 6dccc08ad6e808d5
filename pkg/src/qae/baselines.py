"""Conventional reference links: uncoded BPSK and soft-decision Hamming(7,4).

Both respect the same unit-average-symbol-energy constraint and the same
Eb/N0 noise calibration as the learned schemes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "msg_to_bits",
    "bits_to_msg",
    "all_message_bits",
    "bpsk_transmit",
    "bpsk_detect",
    "HammingCode",
    "HAMMING",
    "hamming_encode",
    "hamming_soft_decode",
    "hamming_soft_decode_blocks",
    "analytic_bpsk_rayleigh_ber",
    "analytic_bpsk_rayleigh_bler",
]


def msg_to_bits(msg: int, k: int) -> np.ndarray:
    """Message index -> k bits, most significant bit first."""
    if not 0 <= msg < (1 << k):
        raise ValueError(f"message {msg} out of range for k={k}")
    return np.array([(msg >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.int64)


def bits_to_msg(bits) -> int:
    bits = np.asarray(bits, dtype=np.int64)
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return int(bits @ weights)


def all_message_bits(k: int) -> np.ndarray:
    """Bit table of every k-bit message, shape (2**k, k), MSB first."""
    msgs = np.arange(1 << k)
    return np.stack([(msgs >> (k - 1 - i)) & 1 for i in range(k)], axis=1).astype(np.int64)


def bpsk_transmit(bits) -> np.ndarray:
    """Antipodal mapping bit b -> 1 - 2b on the real axis; block energy = len(bits)."""
    bits = np.asarray(bits)
    return (1.0 - 2.0 * bits).astype(np.complex128)


def bpsk_detect(block) -> np.ndarray:
    """Sign detector on the real part; an exactly-zero real part maps to bit 0."""
    return (np.asarray(block).real < 0).astype(np.int64)


# systematic generator [I | P]; any equivalent (7,4) Hamming code gives the same BLER
_HAMMING_P = np.array([[0, 1, 1],
                       [1, 0, 1],
                       [1, 1, 0],
                       [1, 1, 1]], dtype=np.int64)


@dataclass(frozen=True)
class HammingCode:
    """Generator, the 16-codeword book, and its antipodal image."""

    generator: np.ndarray
    codebook: np.ndarray
    bpsk_codebook: np.ndarray


def _build_hamming() -> HammingCode:
    g = np.hstack([np.eye(4, dtype=np.int64), _HAMMING_P])
    codebook = all_message_bits(4) @ g % 2
    return HammingCode(g, codebook, 1.0 - 2.0 * codebook)


HAMMING = _build_hamming()


def hamming_encode(msg: int) -> np.ndarray:
    """4-bit message -> 7 antipodal reals (block energy 7)."""
    if not 0 <= msg < 16:
        raise ValueError(f"message {msg} out of range for Hamming(7,4)")
    return HAMMING.bpsk_codebook[msg].copy()


def hamming_soft_decode_blocks(blocks) -> np.ndarray:
    """Exact ML per row: nearest antipodal codeword to the real parts."""
    blocks = np.asarray(blocks, dtype=np.complex128)
    if blocks.shape[-1] != 7:
        raise ValueError(f"expected blocks of 7 symbols, got {blocks.shape}")
    d = blocks.real[..., None, :] - HAMMING.bpsk_codebook[None, :, :]
    return np.argmin(np.sum(d * d, axis=-1), axis=-1)


def hamming_soft_decode(block) -> int:
    """Single-block soft decision: argmin Euclidean distance over 16 codewords."""
    return int(hamming_soft_decode_blocks(np.asarray(block, dtype=np.complex128)[None, :])[0])


def analytic_bpsk_rayleigh_ber(snr_db: float) -> float:
    """Average BPSK bit error rate over unit-power Rayleigh fading, Eb/N0 in dB."""
    g = 10.0 ** (snr_db / 10.0)
    return 0.5 * (1.0 - math.sqrt(g / (1.0 + g)))


def analytic_bpsk_rayleigh_bler(snr_db: float, k: int) -> float:
    """Block error rate of k independently faded BPSK bits: 1 - (1 - p)**k."""
    p = analytic_bpsk_rayleigh_ber(snr_db)
    return 1.0 - (1.0 - p) ** k
