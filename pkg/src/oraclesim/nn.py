"""Minimal fully-connected network with hand-rolled backprop.

Rectified-linear hidden layers, identity output, squared-error loss on a
single output unit per example (the value head for the action actually
taken). Checkpoints are plain text with repr-formatted floats, so a
save/load cycle restores weights bit for bit.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["Mlp", "save_network", "load_network", "CHECKPOINT_MAGIC"]

CHECKPOINT_MAGIC = "mlp-text-v1"


class Mlp:
    """Feed-forward network; weights[i] has shape (fan_out, fan_in)."""

    def __init__(self, layer_sizes: Sequence[int], rng: np.random.Generator | None = None):
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ValueError("layer sizes must be positive")
        self.layer_sizes = sizes
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        if rng is None:
            rng = np.random.default_rng()
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(rng.uniform(-bound, bound, size=(fan_out,)))

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    # -- forward ------------------------------------------------------------

    def _forward_full(self, x: np.ndarray):
        """Returns (pre_activations, layer_outputs); layer_outputs[0] is x."""
        pre = []
        outs = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = w @ h + b
            pre.append(z)
            h = z if i == last else np.maximum(z, 0.0)
            outs.append(h)
        return pre, outs

    def forward(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.input_size,):
            raise ValueError(f"expected input of shape ({self.input_size},), got {x.shape}")
        return self._forward_full(x)[1][-1]

    def forward_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.input_size:
            raise ValueError(f"expected batch of shape (n, {self.input_size}), got {xs.shape}")
        h = xs
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            h = z if i == last else np.maximum(z, 0.0)
        return h

    # -- backward -----------------------------------------------------------

    def backward(self, x: Sequence[float], action: int, td_error: float):
        """Gradients of 0.5 * td_error^2 with td_error = target - out[action];
        only the chosen output unit carries loss signal."""
        x = np.asarray(x, dtype=float)
        pre, outs = self._forward_full(x)
        delta = np.zeros(self.output_size)
        delta[action] = -float(td_error)
        grads = []
        for i in range(len(self.weights) - 1, -1, -1):
            grads.append((np.outer(delta, outs[i]), delta.copy()))
            if i > 0:
                delta = (self.weights[i].T @ delta) * (pre[i - 1] > 0)
        grads.reverse()
        return grads

    def backward_batch(self, xs: np.ndarray, actions: np.ndarray, td_errors: np.ndarray):
        """Mean gradient over the batch of the same per-example loss."""
        xs = np.asarray(xs, dtype=float)
        actions = np.asarray(actions, dtype=int)
        td_errors = np.asarray(td_errors, dtype=float)
        n = xs.shape[0]
        if actions.shape != (n,) or td_errors.shape != (n,):
            raise ValueError("actions and td_errors must match the batch size")
        pre = []
        outs = [xs]
        h = xs
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            pre.append(z)
            h = z if i == last else np.maximum(z, 0.0)
            outs.append(h)
        delta = np.zeros((n, self.output_size))
        delta[np.arange(n), actions] = -td_errors
        grads = []
        for i in range(len(self.weights) - 1, -1, -1):
            grads.append((delta.T @ outs[i] / n, delta.mean(axis=0)))
            if i > 0:
                delta = (delta @ self.weights[i]) * (pre[i - 1] > 0)
        grads.reverse()
        return grads

    def apply_update(self, grads, learning_rate: float) -> None:
        """Plain gradient-descent step."""
        if len(grads) != len(self.weights):
            raise ValueError("gradient list does not match layer count")
        for (gw, gb), w, b in zip(grads, self.weights, self.biases):
            if gw.shape != w.shape or gb.shape != b.shape:
                raise ValueError("gradient shapes do not match parameters")
            w -= learning_rate * gw
            b -= learning_rate * gb

    # -- copies -------------------------------------------------------------

    def clone(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.layer_sizes = self.layer_sizes
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def copy_from(self, other: "Mlp") -> None:
        if other.layer_sizes != self.layer_sizes:
            raise ValueError("cannot copy weights between different architectures")
        self.weights = [w.copy() for w in other.weights]
        self.biases = [b.copy() for b in other.biases]


def _format_vector(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in values)


def save_network(net: Mlp, path: str | Path) -> None:
    """Text checkpoint: a header line with the architecture, then one line
    per weight-matrix row and one per bias vector, repr-formatted so the
    floats round-trip exactly."""
    lines = [f"{CHECKPOINT_MAGIC} " + " ".join(str(s) for s in net.layer_sizes)]
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        for row in w:
            lines.append(_format_vector(row))
        lines.append(_format_vector(b))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_vector(line: str, size: int, what: str) -> np.ndarray:
    parts = line.split()
    if len(parts) != size:
        raise ValueError(f"{what}: expected {size} values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ValueError(f"{what}: non-numeric value") from None


def load_network(path: str | Path) -> Mlp:
    """Load a text checkpoint; errors name the first offending layer."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError("checkpoint is empty")
    header = lines[0].split()
    if not header or header[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"checkpoint header must start with {CHECKPOINT_MAGIC!r}")
    try:
        sizes = [int(s) for s in header[1:]]
    except ValueError:
        raise ValueError("checkpoint header: non-integer layer size") from None
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("checkpoint header: invalid architecture")

    net = Mlp.__new__(Mlp)
    net.layer_sizes = tuple(sizes)
    net.weights = []
    net.biases = []
    cursor = 1
    for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        rows = []
        for r in range(fan_out):
            if cursor >= len(lines):
                raise ValueError(f"layer {i} weights: checkpoint truncated at row {r}")
            rows.append(_parse_vector(lines[cursor], fan_in, f"layer {i} weights row {r}"))
            cursor += 1
        net.weights.append(np.vstack(rows))
        if cursor >= len(lines):
            raise ValueError(f"layer {i} biases: checkpoint truncated")
        net.biases.append(_parse_vector(lines[cursor], fan_out, f"layer {i} biases"))
        cursor += 1
    if cursor != len(lines):
        raise ValueError(f"checkpoint has {len(lines) - cursor} unexpected trailing lines")
    return net
