"""Exact statevector simulation of the Ry/CNOT transmitter circuits.

Conventions pinned here and relied on everywhere else:

* Big-endian basis indexing: qubit 0 is the most significant bit of the
  amplitude index, so embedding a length-2**k vector on the first k qubits
  of an n-qubit register places entry j at amplitude index j * 2**(n - k),
  and the n - k trailing ancilla qubits start in |0>.
* Trainable weights are unitless; every Ry gate rotates by pi * weight.
* One layer applies Ry on every qubit, then the open CNOT chain with
  control i and target i + 1 for i = 0 .. n - 2 (no wrap-around).
* Outputs are exact Pauli-Z expectations, one per qubit. No shot noise.

All public operations are pure functions; input states are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CircuitSpec",
    "StateVector",
    "amplitude_embed",
    "apply_ry",
    "apply_cnot",
    "run_circuit",
    "circuit_jacobian",
    "expectation_table",
    "expectation_table_vjp",
]

_ZERO_NORM = 1e-12


@dataclass(frozen=True)
class CircuitSpec:
    """Register size, depth and embedding width of one transmitter circuit."""

    n_qubits: int
    n_layers: int
    embed_qubits: int

    def __post_init__(self) -> None:
        if min(self.n_qubits, self.n_layers, self.embed_qubits) < 1:
            raise ValueError("n_qubits, n_layers and embed_qubits must be positive")
        if self.embed_qubits > self.n_qubits:
            raise ValueError(
                f"embed_qubits={self.embed_qubits} exceeds n_qubits={self.n_qubits}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def n_messages(self) -> int:
        return 1 << self.embed_qubits

    @property
    def n_weights(self) -> int:
        return self.n_layers * self.n_qubits


@dataclass(frozen=True)
class StateVector:
    """Unit-norm register state: 2**n_qubits complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm} is not 1")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def z_expectations(self) -> np.ndarray:
        """<Z_q> for every qubit, each in [-1, 1]."""
        return _z_batch(self.amplitudes[None, :], self.n_qubits)[0]


def _apply_ry_batch(amps: np.ndarray, n_qubits: int, qubit: int, angle: float) -> None:
    """In-place Ry on one qubit of a (batch, 2**n) array, real or complex dtype."""
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    view = amps.reshape(amps.shape[0], 1 << qubit, 2, -1)
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    new0 = c * a0 - s * a1
    new1 = s * a0 + c * a1
    view[:, :, 0, :] = new0
    view[:, :, 1, :] = new1


def _apply_cnot_batch(amps: np.ndarray, n_qubits: int, control: int, target: int) -> None:
    """In-place CNOT on a (batch, 2**n) array."""
    view = amps.reshape((amps.shape[0],) + (2,) * n_qubits)
    i10 = [slice(None)] * (n_qubits + 1)
    i11 = [slice(None)] * (n_qubits + 1)
    i10[1 + control] = 1
    i11[1 + control] = 1
    i10[1 + target] = 0
    i11[1 + target] = 1
    tmp = view[tuple(i10)].copy()
    view[tuple(i10)] = view[tuple(i11)]
    view[tuple(i11)] = tmp


def _evolve(amps: np.ndarray, spec: CircuitSpec, weights: np.ndarray) -> None:
    """Run the full layered circuit in place on a (batch, 2**n) array."""
    for layer in range(spec.n_layers):
        for q in range(spec.n_qubits):
            _apply_ry_batch(amps, spec.n_qubits, q, math.pi * weights[layer, q])
        for q in range(spec.n_qubits - 1):
            _apply_cnot_batch(amps, spec.n_qubits, q, q + 1)


def _z_batch(amps: np.ndarray, n_qubits: int) -> np.ndarray:
    """Per-qubit Z expectations of (batch, 2**n) amplitude rows."""
    if np.iscomplexobj(amps):
        probs = amps.real ** 2 + amps.imag ** 2
    else:
        probs = amps * amps
    z = np.empty((amps.shape[0], n_qubits))
    for q in range(n_qubits):
        view = probs.reshape(probs.shape[0], 1 << q, 2, -1)
        z[:, q] = view[:, :, 0, :].sum(axis=(1, 2)) - view[:, :, 1, :].sum(axis=(1, 2))
    return np.clip(z, -1.0, 1.0, out=z)


def _check_weights(spec: CircuitSpec, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (spec.n_layers, spec.n_qubits):
        raise ValueError(
            f"weights shape {w.shape} does not match (n_layers, n_qubits)="
            f"({spec.n_layers}, {spec.n_qubits})"
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    return w


def _embedded_rows(rows: np.ndarray, spec: CircuitSpec) -> np.ndarray:
    """Embed real rows (B, 2**k) into float statevector rows (B, 2**n)."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != spec.n_messages:
        raise ValueError(f"expected rows of length {spec.n_messages}, got {rows.shape}")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms < _ZERO_NORM):
        raise ValueError("cannot amplitude-embed a vector with (near-)zero norm")
    amps = np.zeros((rows.shape[0], spec.dim))
    stride = 1 << (spec.n_qubits - spec.embed_qubits)
    amps[:, ::stride] = rows / norms[:, None]
    return amps


def _basis_table(spec: CircuitSpec) -> np.ndarray:
    """One embedded basis state per row, (2**k, 2**n) float."""
    m = spec.n_messages
    amps = np.zeros((m, spec.dim))
    stride = 1 << (spec.n_qubits - spec.embed_qubits)
    amps[np.arange(m), np.arange(m) * stride] = 1.0
    return amps


@lru_cache(maxsize=None)
def _z_signs(n_qubits: int) -> np.ndarray:
    """(n, 2**n) matrix of Z eigenvalue signs: +1 where the qubit bit is 0."""
    idx = np.arange(1 << n_qubits)
    signs = np.empty((n_qubits, 1 << n_qubits))
    for q in range(n_qubits):
        signs[q] = 1.0 - 2.0 * ((idx >> (n_qubits - 1 - q)) & 1)
    signs.setflags(write=False)
    return signs


def amplitude_embed(data, spec: CircuitSpec) -> StateVector:
    """Normalized `data` on the first embed_qubits qubits, ancillas in |0>."""
    row = np.asarray(data, dtype=np.float64)
    if row.shape != (spec.n_messages,):
        raise ValueError(f"expected a vector of length {spec.n_messages}, got {row.shape}")
    amps = _embedded_rows(row[None, :], spec)[0]
    return StateVector(spec.n_qubits, amps.astype(np.complex128))


def apply_ry(state: StateVector, qubit: int, angle: float) -> StateVector:
    """Rotate one qubit about Y by `angle` radians; returns a new state."""
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.n_qubits}-qubit state")
    if not math.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    amps = state.amplitudes[None, :].copy()
    _apply_ry_batch(amps, state.n_qubits, qubit, float(angle))
    return StateVector(state.n_qubits, amps[0])


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Controlled-X with the given control and target; returns a new state."""
    n = state.n_qubits
    for name, q in (("control", control), ("target", target)):
        if not 0 <= q < n:
            raise IndexError(f"{name} qubit {q} out of range for {n}-qubit state")
    if control == target:
        raise ValueError("control and target must be different qubits")
    amps = state.amplitudes[None, :].copy()
    _apply_cnot_batch(amps, n, control, target)
    return StateVector(n, amps[0])


def run_circuit(data, spec: CircuitSpec, weights) -> np.ndarray:
    """Z expectation of every qubit after the full layered circuit.

    `data` is the classical vector to embed (a one-hot message vector in the
    transmitter). Each output component lies in [-1, 1].
    """
    w = _check_weights(spec, weights)
    row = np.asarray(data, dtype=np.float64)
    if row.shape != (spec.n_messages,):
        raise ValueError(f"expected a vector of length {spec.n_messages}, got {row.shape}")
    amps = _embedded_rows(row[None, :], spec)
    _evolve(amps, spec, w)
    return _z_batch(amps, spec.n_qubits)[0]


def circuit_jacobian(data, spec: CircuitSpec, weights) -> np.ndarray:
    """Parameter-shift jacobian d<Z_i>/dw[l, j], shape (n_qubits, L * n_qubits).

    Column l * n + j holds (pi/2) * (<Z>(theta + pi/2) - <Z>(theta - pi/2))
    with theta = pi * w[l, j]. The shift is exact for Ry-generated
    expectations; the leading pi is the chain factor of the angle scaling.
    """
    w = _check_weights(spec, weights)
    row = np.asarray(data, dtype=np.float64)
    if row.shape != (spec.n_messages,):
        raise ValueError(f"expected a vector of length {spec.n_messages}, got {row.shape}")
    base = _embedded_rows(row[None, :], spec)
    jac = np.empty((spec.n_qubits, spec.n_weights))
    for layer in range(spec.n_layers):
        for q in range(spec.n_qubits):
            shifted_z = []
            for delta in (0.5, -0.5):
                shifted = w.copy()
                shifted[layer, q] += delta
                amps = base.copy()
                _evolve(amps, spec, shifted)
                shifted_z.append(_z_batch(amps, spec.n_qubits)[0])
            jac[:, layer * spec.n_qubits + q] = 0.5 * math.pi * (shifted_z[0] - shifted_z[1])
    return jac


def expectation_table(spec: CircuitSpec, weights) -> np.ndarray:
    """run_circuit output for every one-hot message, stacked into (2**k, n)."""
    w = _check_weights(spec, weights)
    amps = _basis_table(spec)
    _evolve(amps, spec, w)
    return _z_batch(amps, spec.n_qubits)


def expectation_table_vjp(spec: CircuitSpec, weights, dz) -> np.ndarray:
    """Gradient of sum(dz * expectation_table(spec, weights)) w.r.t. the weights.

    Reverse-mode pass through the (real) statevector evolution; intermediate
    states are reconstructed by applying inverse gates, so memory stays at two
    tables. Agrees with the parameter-shift jacobian to rounding error (both
    are exact) at the cost of two evolutions instead of 2 * L * n.
    """
    w = _check_weights(spec, weights)
    dz = np.asarray(dz, dtype=np.float64)
    if dz.shape != (spec.n_messages, spec.n_qubits):
        raise ValueError(
            f"dz shape {dz.shape} does not match ({spec.n_messages}, {spec.n_qubits})"
        )
    n = spec.n_qubits
    amps = _basis_table(spec)
    _evolve(amps, spec, w)
    # d<Z_q>/d amp = 2 * sign_q * amp, summed over qubits with weights dz
    lam = 2.0 * amps * (dz @ _z_signs(n))
    grad = np.zeros((spec.n_layers, n))
    for layer in range(spec.n_layers - 1, -1, -1):
        for q in range(n - 2, -1, -1):
            _apply_cnot_batch(amps, n, q, q + 1)  # CNOT is its own inverse and transpose
            _apply_cnot_batch(lam, n, q, q + 1)
        for q in range(n - 1, -1, -1):
            theta = math.pi * w[layer, q]
            _apply_ry_batch(amps, n, q, -theta)  # state just before this gate
            d = amps.copy()
            _apply_ry_batch(d, n, q, theta + math.pi)  # dRy/dtheta = Ry(theta + pi) / 2
            grad[layer, q] = 0.5 * math.pi * float(np.sum(lam * d))
            _apply_ry_batch(lam, n, q, -theta)  # Ry(theta)^T = Ry(-theta)
    return grad
