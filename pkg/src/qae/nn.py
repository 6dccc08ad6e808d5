"""Dense layers, cross-entropy loss and Adam for the classical network halves.

Row convention: a layer maps (..., in_dim) arrays to (..., out_dim) via
x @ W.T + b, so single vectors and batches share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "linear", "softmax")

_LOG_FLOOR = 1e-12  # probability floor inside the loss, keeps -log finite


@dataclass
class DenseLayer:
    """Affine map plus activation; weights (out_dim, in_dim), bias (out_dim,)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"inconsistent shapes: weights {self.weights.shape}, bias {self.bias.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def parameter_count(self) -> int:
        return (self.in_dim + 1) * self.out_dim


def glorot_dense(in_dim: int, out_dim: int, activation: str, rng) -> DenseLayer:
    """Glorot-uniform weights (bound sqrt(6 / (in + out))), zero bias."""
    bound = math.sqrt(6.0 / (in_dim + out_dim))
    return DenseLayer(rng.uniform(-bound, bound, (out_dim, in_dim)), np.zeros(out_dim), activation)


def relu(z):
    return np.maximum(z, 0.0)


def softmax(z):
    """Stable softmax along the last axis (max subtraction before exp)."""
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _activate(z, activation):
    if activation == "relu":
        return relu(z)
    if activation == "linear":
        return z
    return softmax(z)


def dense_forward(layer: DenseLayer, x) -> np.ndarray:
    """activation(W x + b); accepts a vector or a batch of row vectors."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != layer.in_dim:
        raise ValueError(f"input dim {x.shape[-1]} does not match layer in_dim {layer.in_dim}")
    return _activate(x @ layer.weights.T + layer.bias, layer.activation)


def cross_entropy(pred, label_index: int) -> float:
    """-log pred[label_index], with the probability floored at 1e-12."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.ndim != 1:
        raise ValueError("cross_entropy expects a single probability vector")
    if abs(float(pred.sum()) - 1.0) > 1e-6:
        raise ValueError("pred is not a probability vector")
    if not 0 <= label_index < pred.shape[0]:
        raise IndexError(f"label {label_index} out of range for {pred.shape[0]} classes")
    return float(-np.log(max(float(pred[label_index]), _LOG_FLOOR)))


def forward_chain(layers, x):
    """Forward pass; returns the output and per-layer (input, pre-activation) caches."""
    a = np.asarray(x, dtype=np.float64)
    caches = []
    for layer in layers:
        if a.shape[-1] != layer.in_dim:
            raise ValueError(f"input dim {a.shape[-1]} does not match layer in_dim {layer.in_dim}")
        z = a @ layer.weights.T + layer.bias
        caches.append((a, z))
        a = _activate(z, layer.activation)
    return a, caches


def _walk_back(layers, caches, delta_last):
    """Backward pass given dL/dz of the last layer.

    Returns ([(dW, db) per layer], dL/dx). Batched inputs sum gradients over
    the batch rows, so any averaging is the caller's choice of delta scale.
    """
    grads = [None] * len(layers)
    delta = np.asarray(delta_last, dtype=np.float64)
    for i in range(len(layers) - 1, -1, -1):
        a_in, _ = caches[i]
        if a_in.ndim == 1:
            grads[i] = (np.outer(delta, a_in), delta.copy())
        else:
            grads[i] = (delta.T @ a_in, delta.sum(axis=0))
        dx = delta @ layers[i].weights
        if i > 0:
            prev = layers[i - 1]
            _, z_prev = caches[i - 1]
            if prev.activation == "relu":
                delta = dx * (z_prev > 0)
            elif prev.activation == "linear":
                delta = dx
            else:
                raise ValueError("softmax cannot feed a downstream layer")
        else:
            delta = dx
    return grads, delta


def backward_chain(layers, caches, dout):
    """Backward from dL/d(output) for chains whose last activation is relu or linear."""
    last = layers[-1]
    _, z_last = caches[-1]
    if last.activation == "relu":
        delta = np.asarray(dout, dtype=np.float64) * (z_last > 0)
    elif last.activation == "linear":
        delta = np.asarray(dout, dtype=np.float64)
    else:
        raise ValueError("use backward() for softmax + cross-entropy heads")
    return _walk_back(layers, caches, delta)


def backward(layers, x, label_index: int):
    """Cross-entropy gradients for a softmax-terminated chain on one input.

    Returns ([(dW, db) per layer], dL/dx). Uses the exact softmax identity
    delta = p - onehot(label); the probability floor in cross_entropy is a
    value guard only and does not enter the gradient.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("backward expects a single input vector")
    if layers[-1].activation != "softmax":
        raise ValueError("backward expects a softmax output layer")
    probs, caches = forward_chain(layers, x)
    if not 0 <= label_index < probs.shape[0]:
        raise IndexError(f"label {label_index} out of range for {probs.shape[0]} classes")
    delta = probs.copy()
    delta[label_index] -= 1.0
    return _walk_back(layers, caches, delta)


@dataclass
class AdamState:
    """Adam moment accumulators for a flat list of parameter arrays."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, learning_rate: float = 0.001, beta1: float = 0.9,
                   beta2: float = 0.999, epsilon: float = 1e-8) -> "AdamState":
        state = cls(learning_rate, beta1, beta2, epsilon)
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
        return state


def adam_step(params, grads, state: AdamState):
    """One bias-corrected Adam update; mutates `state`, returns new parameter arrays."""
    if not (len(params) == len(grads) == len(state.m)):
        raise ValueError("params, grads and optimizer state must have equal lengths")
    state.step += 1
    t = state.step
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        mhat = state.m[i] / (1.0 - state.beta1 ** t)
        vhat = state.v[i] / (1.0 - state.beta2 ** t)
        out.append(p - state.learning_rate * mhat / (np.sqrt(vhat) + state.epsilon))
    return out
