"""The two end-to-end transceivers and their shared differentiable training path.

A transmitter maps a message index to 2n real outputs, which are projected
onto the energy-n sphere and read as n complex baseband symbols (first n
reals are the real parts, last n the imaginary parts). The receiver is the
same dense stack for both schemes. Gradients flow from the cross-entropy
loss through the receiver, unchanged through the equalized channel, through
the normalization jacobian, and then into dense backprop (ae) or the
circuit weight gradients (qae).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nn import DenseLayer, _walk_back, backward_chain, forward_chain, glorot_dense
from .qsim import CircuitSpec, expectation_table, expectation_table_vjp, run_circuit

SCHEMES = ("ae", "qae")

CHECKPOINT_VERSION = 1
SNR_CONVENTION = "eb_n0_db"

_NORM_FLOOR = 1e-12
_LOG_FLOOR = 1e-12


class DegenerateEncodingError(ValueError):
    """Transmitter produced an (effectively) zero vector; cannot normalize."""


class InternalConsistencyError(RuntimeError):
    """Walked parameter count disagrees with the closed-form total."""


@dataclass(frozen=True)
class SystemConfig:
    """Link geometry: k bits per message over n complex channel uses."""

    n: int
    k: int
    layers: int = 3
    scheme: str = "qae"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if min(self.n, self.k, self.layers) < 1:
            raise ValueError("n, k and layers must be positive")
        if self.scheme == "qae" and self.k > self.n:
            raise ValueError("qae needs k <= n: the one-hot embeds on k of the n qubits")

    @property
    def M(self) -> int:
        return 1 << self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    def circuit_spec(self) -> CircuitSpec:
        if self.scheme != "qae":
            raise ValueError("only the qae scheme has a circuit spec")
        return CircuitSpec(n_qubits=self.n, n_layers=self.layers, embed_qubits=self.k)


@dataclass
class AeTransmitter:
    """Classical transmitter: M -> M relu, then M -> 2n linear."""

    hidden: DenseLayer
    output: DenseLayer

    @property
    def layers(self):
        return [self.hidden, self.output]


@dataclass
class QaeTransmitter:
    """Two parallel circuits of identical shape, one per signal component."""

    spec: CircuitSpec
    weights_re: np.ndarray
    weights_im: np.ndarray


@dataclass
class Receiver:
    """Shared receiver: 2n -> M relu, then M -> M softmax."""

    hidden: DenseLayer
    output: DenseLayer

    @property
    def layers(self):
        return [self.hidden, self.output]


@dataclass
class Model:
    config: SystemConfig
    transmitter: AeTransmitter | QaeTransmitter
    receiver: Receiver

    def parameters(self) -> list:
        """Flat list of trainable arrays; order is the optimizer contract."""
        if isinstance(self.transmitter, QaeTransmitter):
            tx = [self.transmitter.weights_re, self.transmitter.weights_im]
        else:
            tx = [self.transmitter.hidden.weights, self.transmitter.hidden.bias,
                  self.transmitter.output.weights, self.transmitter.output.bias]
        rx = [self.receiver.hidden.weights, self.receiver.hidden.bias,
              self.receiver.output.weights, self.receiver.output.bias]
        return tx + rx

    def set_parameters(self, arrays) -> None:
        current = self.parameters()
        if len(arrays) != len(current):
            raise ValueError(f"expected {len(current)} arrays, got {len(arrays)}")
        for new, old in zip(arrays, current):
            if new.shape != old.shape:
                raise ValueError(f"array shape {new.shape} does not match {old.shape}")
        arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
        if isinstance(self.transmitter, QaeTransmitter):
            self.transmitter.weights_re, self.transmitter.weights_im = arrays[0], arrays[1]
            rx = arrays[2:]
        else:
            (self.transmitter.hidden.weights, self.transmitter.hidden.bias,
             self.transmitter.output.weights, self.transmitter.output.bias) = arrays[0:4]
            rx = arrays[4:]
        (self.receiver.hidden.weights, self.receiver.hidden.bias,
         self.receiver.output.weights, self.receiver.output.bias) = rx


def build_model(config: SystemConfig, rng) -> Model:
    """Fresh model: Glorot dense layers, circuit weights uniform on [0, 1)."""
    M, n = config.M, config.n
    if config.scheme == "qae":
        spec = config.circuit_spec()
        tx = QaeTransmitter(spec, rng.random((config.layers, n)), rng.random((config.layers, n)))
    else:
        tx = AeTransmitter(glorot_dense(M, M, "relu", rng),
                           glorot_dense(M, 2 * n, "linear", rng))
    rx = Receiver(glorot_dense(2 * n, M, "relu", rng),
                  glorot_dense(M, M, "softmax", rng))
    return Model(config, tx, rx)


def onehot(msg: int, M: int) -> np.ndarray:
    v = np.zeros(M)
    v[msg] = 1.0
    return v


def _raw_table(transmitter, config: SystemConfig) -> np.ndarray:
    """Pre-normalization transmitter outputs for every message, (M, 2n)."""
    if isinstance(transmitter, QaeTransmitter):
        z_re = expectation_table(transmitter.spec, transmitter.weights_re)
        z_im = expectation_table(transmitter.spec, transmitter.weights_im)
        return np.hstack([z_re, z_im])
    # onehot rows pick columns of the first layer, no need for an eye() matmul
    hidden, output = transmitter.hidden, transmitter.output
    a1 = np.maximum(hidden.weights.T + hidden.bias, 0.0)
    return a1 @ output.weights.T + output.bias


def _normalize_rows(v: np.ndarray, n: int):
    """sqrt(n) * v / ||v|| per row; rows below the norm floor are degenerate."""
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms < _NORM_FLOOR):
        raise DegenerateEncodingError("transmitter output has (near-)zero norm")
    return math.sqrt(n) * v / norms[:, None], norms


def _pack_complex(x, n: int) -> np.ndarray:
    return x[..., :n] + 1j * x[..., n:]


def transmit_table(transmitter, config: SystemConfig) -> np.ndarray:
    """Energy-normalized complex block for every message, (M, n)."""
    x, _ = _normalize_rows(_raw_table(transmitter, config), config.n)
    return _pack_complex(x, config.n)


def encode(msg: int, transmitter, config: SystemConfig) -> np.ndarray:
    """Message index -> n complex symbols with ||x||^2 = n."""
    if not 0 <= msg < config.M:
        raise IndexError(f"message {msg} out of range for M={config.M}")
    if isinstance(transmitter, QaeTransmitter):
        data = onehot(msg, config.M)
        v = np.concatenate([run_circuit(data, transmitter.spec, transmitter.weights_re),
                            run_circuit(data, transmitter.spec, transmitter.weights_im)])
    else:
        v, _ = forward_chain(transmitter.layers, onehot(msg, config.M))
    x, _ = _normalize_rows(v[None, :], config.n)
    return _pack_complex(x[0], config.n)


def decode(block, receiver: Receiver) -> np.ndarray:
    """Equalized block(s) -> probability distribution(s) over the M messages."""
    block = np.asarray(block, dtype=np.complex128)
    r = np.concatenate([block.real, block.imag], axis=-1)
    probs, _ = forward_chain(receiver.layers, r)
    return probs


def decode_messages(blocks, receiver: Receiver) -> np.ndarray:
    """Batched argmax decoding used by the Monte Carlo paths."""
    return np.argmax(decode(blocks, receiver), axis=-1)


def normalization_jacobian_apply(v: np.ndarray, vec: np.ndarray, n: int) -> np.ndarray:
    """Apply the (symmetric) jacobian of v -> sqrt(n) v / ||v|| to `vec`.

    J = (sqrt(n) / ||v||) (I - v v^T / ||v||^2); the radial direction is
    annihilated, which is what keeps gradients on the energy sphere.
    """
    rho = np.linalg.norm(v)
    if rho < _NORM_FLOOR:
        raise DegenerateEncodingError("cannot differentiate through a zero-norm output")
    return (math.sqrt(n) / rho) * (vec - v * (np.dot(v, vec) / rho ** 2))


def batch_gradient(model: Model, msgs, h, noise):
    """Mean cross-entropy over one batch plus gradients for every parameter array.

    The channel draw (h, noise) is frozen: y = h x + noise is equalized back
    to x + noise / h, so the receiver input gradient reaches the transmitter
    output unchanged and the channel itself receives no gradient. Returns
    (loss, grads) with grads ordered like model.parameters().
    """
    cfg = model.config
    msgs = np.asarray(msgs, dtype=np.int64)
    h = np.asarray(h, dtype=np.complex128)
    noise = np.asarray(noise, dtype=np.complex128)
    batch = msgs.shape[0]
    n = cfg.n

    v_table = _raw_table(model.transmitter, cfg)
    norms = np.linalg.norm(v_table, axis=1)
    if np.any(norms < _NORM_FLOOR):
        raise DegenerateEncodingError("transmitter output has (near-)zero norm")
    vb = v_table[msgs]
    rho = norms[msgs]
    xb = math.sqrt(n) * vb / rho[:, None]
    xhat = _pack_complex(xb, n) + noise / h[:, None]
    r = np.concatenate([xhat.real, xhat.imag], axis=1)

    probs, caches = forward_chain(model.receiver.layers, r)
    picked = probs[np.arange(batch), msgs]
    loss = float(np.mean(-np.log(np.maximum(picked, _LOG_FLOOR))))

    delta = probs.copy()
    delta[np.arange(batch), msgs] -= 1.0
    delta /= batch
    rx_grads, dr = _walk_back(model.receiver.layers, caches, delta)

    # identity through equalization, then undo the sphere projection
    radial = np.sum(vb * dr, axis=1) / (rho ** 2)
    dv = (math.sqrt(n) / rho)[:, None] * (dr - vb * radial[:, None])

    if isinstance(model.transmitter, QaeTransmitter):
        spec = model.transmitter.spec
        dz_re = np.zeros((cfg.M, n))
        dz_im = np.zeros((cfg.M, n))
        np.add.at(dz_re, msgs, dv[:, :n])
        np.add.at(dz_im, msgs, dv[:, n:])
        tx_grads = [expectation_table_vjp(spec, model.transmitter.weights_re, dz_re),
                    expectation_table_vjp(spec, model.transmitter.weights_im, dz_im)]
    else:
        eye_b = np.zeros((batch, cfg.M))
        eye_b[np.arange(batch), msgs] = 1.0
        _, tx_caches = forward_chain(model.transmitter.layers, eye_b)
        tx_layer_grads, _ = backward_chain(model.transmitter.layers, tx_caches, dv)
        tx_grads = [g for pair in tx_layer_grads for g in pair]

    rx_flat = [g for pair in rx_grads for g in pair]
    return loss, tx_grads + rx_flat


def e2e_gradient(msg: int, model: Model, realization):
    """Single-example loss and gradients at one frozen channel draw."""
    return batch_gradient(model, np.array([msg]),
                          np.array([realization.h]),
                          np.asarray(realization.noise)[None, :])


def closed_form_counts(config: SystemConfig) -> dict:
    """Closed-form parameter sizes for the configured scheme."""
    n, k, L = config.n, config.k, config.layers
    rx = 2 ** (2 * k) + (n + 1) * 2 ** (k + 1)
    if config.scheme == "ae":
        total = 2 ** (2 * k + 1) + (2 * n + 1) * 2 ** (k + 1) + 2 ** k + 2 * n
    else:
        total = rx + 2 * L * n
    return {"transmitter": total - rx, "receiver": rx, "total": total}


def count_parameters(config: SystemConfig) -> dict:
    """Walk a freshly built model's arrays and cross-check the closed forms."""
    model = build_model(config, np.random.default_rng(0))
    if isinstance(model.transmitter, QaeTransmitter):
        walked_tx = model.transmitter.weights_re.size + model.transmitter.weights_im.size
    else:
        walked_tx = sum(l.weights.size + l.bias.size for l in model.transmitter.layers)
    walked_rx = sum(l.weights.size + l.bias.size for l in model.receiver.layers)
    expected = closed_form_counts(config)
    walked = {"transmitter": walked_tx, "receiver": walked_rx, "total": walked_tx + walked_rx}
    if walked != expected:
        raise InternalConsistencyError(
            f"walked counts {walked} disagree with closed forms {expected} for {config}"
        )
    return walked


def _layer_to_json(layer: DenseLayer) -> dict:
    return {"weights": layer.weights.tolist(), "bias": layer.bias.tolist(),
            "activation": layer.activation}


def _layer_from_json(doc: dict) -> DenseLayer:
    return DenseLayer(np.array(doc["weights"], dtype=np.float64),
                      np.array(doc["bias"], dtype=np.float64),
                      doc["activation"])


def save_checkpoint(model: Model, path, seed: int, extra: dict | None = None) -> None:
    """Write the versioned JSON checkpoint (layout documented in the README)."""
    cfg = model.config
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "snr_convention": SNR_CONVENTION,
        "seed": int(seed),
        "config": {"scheme": cfg.scheme, "n": cfg.n, "k": cfg.k, "layers": cfg.layers},
        "extra": dict(extra or {}),
        "receiver": {"hidden": _layer_to_json(model.receiver.hidden),
                     "output": _layer_to_json(model.receiver.output)},
    }
    if isinstance(model.transmitter, QaeTransmitter):
        doc["transmitter"] = {"weights_re": model.transmitter.weights_re.tolist(),
                              "weights_im": model.transmitter.weights_im.tolist()}
    else:
        doc["transmitter"] = {"hidden": _layer_to_json(model.transmitter.hidden),
                              "output": _layer_to_json(model.transmitter.output)}
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_checkpoint(path):
    """Read a checkpoint; returns (model, full document)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {version!r}")
    c = doc["config"]
    config = SystemConfig(n=c["n"], k=c["k"], layers=c["layers"], scheme=c["scheme"])
    if config.scheme == "qae":
        tx = QaeTransmitter(config.circuit_spec(),
                            np.array(doc["transmitter"]["weights_re"], dtype=np.float64),
                            np.array(doc["transmitter"]["weights_im"], dtype=np.float64))
    else:
        tx = AeTransmitter(_layer_from_json(doc["transmitter"]["hidden"]),
                           _layer_from_json(doc["transmitter"]["output"]))
    rx = Receiver(_layer_from_json(doc["receiver"]["hidden"]),
                  _layer_from_json(doc["receiver"]["output"]))
    return Model(config, tx, rx), doc
