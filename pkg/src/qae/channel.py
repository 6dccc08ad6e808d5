"""Block-fading channel layer: SNR calibration, complex AWGN, equalization.

SNR is Eb/N0 in dB with unit average symbol energy. Energy per bit is then
1 / rate symbol energies and N0 equals the per-complex-symbol noise power,
so sigma^2 = 1 / (rate * 10**(snr_db / 10)), equivalently a variance of
1 / (2 * rate * Eb/N0) in each real dimension. Under this calibration the
uncoded BPSK pipeline reproduces the textbook Rayleigh BER closed form at
the stated Eb/N0. Fading coefficients have unit mean power for every kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FADING_KINDS = ("awgn", "rayleigh", "rician")

_SINGULAR_H = 1e-12


class SingularChannelError(ValueError):
    """Fade magnitude too small to equalize."""


@dataclass(frozen=True)
class ChannelRealization:
    """One block's frozen channel draw: coefficient, noise power, noise vector."""

    h: complex
    noise_sigma2: float
    noise: np.ndarray


def snr_to_sigma2(snr_db: float, rate: float) -> float:
    """Noise power per complex symbol for a given Eb/N0 (dB) and rate (bits/use).

    sigma^2 = 1 / (rate * 10**(snr_db / 10)): N0 per complex symbol with
    Eb = 1 / rate at unit average symbol energy (sigma^2 / 2 per real
    dimension). Strictly decreasing in snr_db.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    return 1.0 / (rate * 10.0 ** (snr_db / 10.0))


def draw_fading(kind: str, rng, rician_k: float = 10.0, size=None):
    """Unit-mean-power fading coefficient(s); scalar when size is None.

    awgn: h = 1. rayleigh: h = (a + ib) / sqrt(2). rician: line-of-sight part
    sqrt(K / (K+1)) plus scatter (a + ib) / sqrt(2 (K+1)). Draws whose
    magnitude underflows the equalizer guard are redrawn (probability ~ 0).
    """
    if kind not in FADING_KINDS:
        raise ValueError(f"unknown fading kind {kind!r}")
    scalar = size is None
    shape = 1 if scalar else size
    if kind == "awgn":
        h = np.ones(shape, dtype=np.complex128)
    else:
        if kind == "rician":
            if rician_k < 0:
                raise ValueError("rician_k must be nonnegative")
            los = math.sqrt(rician_k / (rician_k + 1.0))
            scale = 1.0 / math.sqrt(2.0 * (rician_k + 1.0))
        else:
            los, scale = 0.0, 1.0 / math.sqrt(2.0)
        h = los + scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        mask = np.abs(h) < _SINGULAR_H
        while np.any(mask):
            h[mask] = draw_fading(kind, rng, rician_k, size=int(mask.sum()))
            mask = np.abs(h) < _SINGULAR_H
    return complex(h[0]) if scalar else h


def complex_noise(rng, shape, sigma2: float) -> np.ndarray:
    """Circular complex Gaussian with variance sigma2 per complex entry."""
    scale = math.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_realization(kind: str, sigma2: float, n: int, rng,
                     rician_k: float = 10.0) -> ChannelRealization:
    """One block's fading coefficient plus n noise samples."""
    return ChannelRealization(
        h=draw_fading(kind, rng, rician_k),
        noise_sigma2=float(sigma2),
        noise=complex_noise(rng, n, sigma2),
    )


def apply_channel(x, realization: ChannelRealization) -> np.ndarray:
    """y = h x + w, elementwise over the block."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != realization.noise.shape:
        raise ValueError(f"block shape {x.shape} does not match noise {realization.noise.shape}")
    return realization.h * x + realization.noise


def equalize(y, h: complex) -> np.ndarray:
    """Perfect-CSI equalization y / h."""
    if abs(h) < _SINGULAR_H:
        raise SingularChannelError(f"|h| = {abs(h)} is below the equalizer guard")
    return np.asarray(y, dtype=np.complex128) / h
