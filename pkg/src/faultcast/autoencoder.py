"""Fully connected autoencoder trained with plain mini-batch gradient descent.

The network is symmetric: for n input KPIs the layer widths are
[n, ceil(n/2), max(2, ceil(n/4)), ceil(n/2), n], a narrow middle for any
realistic KPI count.  Hidden layers use tanh, the output layer is linear, and
the loss is the mean squared reconstruction error.  Everything is
deterministic given the seed: weight initialization, batch shuffling, and
therefore the trained weights.

Gradients are computed analytically (backpropagation) so they can be checked
against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteLoss


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters for :func:`train`.

    ``batch_size=None`` resolves to min(32, number of rows) at training time.
    """

    epochs: int = 200
    learning_rate: float = 0.01
    batch_size: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def resolve_batch_size(self, n_rows: int) -> int:
        return self.batch_size if self.batch_size is not None else min(32, n_rows)


@dataclass(eq=False)
class AutoencoderModel:
    """Weights and biases of the reconstruction network.

    ``weights[i]`` has shape (layer_sizes[i], layer_sizes[i+1]) and
    ``biases[i]`` shape (layer_sizes[i+1],).
    """

    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        sizes = self.layer_sizes
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be at least two positive widths: {sizes}")
        if sizes != sizes[::-1]:
            raise ValueError(f"layer sizes must be a palindrome: {sizes}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise DimensionMismatch("one weight matrix and bias vector per layer transition")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise DimensionMismatch(
                    f"layer {i}: weight shape {w.shape}, bias shape {b.shape} "
                    f"do not match sizes {sizes[i]}->{sizes[i + 1]}"
                )

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    def clone(self) -> AutoencoderModel:
        return AutoencoderModel(
            layer_sizes=list(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


def bottleneck_layer_sizes(n: int) -> list[int]:
    """Layer widths for n input KPIs: [n, ceil(n/2), max(2, ceil(n/4)), ceil(n/2), n].

    The middle layer is the narrowest for n >= 3 (non-strictly up to n=8);
    for tiny inputs the floor of 2 units keeps the network trainable.
    """
    if n < 1:
        raise ValueError("need at least 1 input KPI")
    half = math.ceil(n / 2)
    quarter = max(2, math.ceil(n / 4))
    return [n, half, quarter, half, n]


def random_model(layer_sizes: list[int], seed: int) -> AutoencoderModel:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    weights: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return AutoencoderModel(layer_sizes=list(layer_sizes), weights=weights, biases=biases)


def init_autoencoder(n: int, seed: int) -> AutoencoderModel:
    """Build the standard symmetric network for ``n`` KPIs."""
    return random_model(bottleneck_layer_sizes(n), seed)


def _forward_cached(model: AutoencoderModel, batch: np.ndarray) -> list[np.ndarray]:
    """Activations per layer, input first.  tanh on hidden, identity on output."""
    last = len(model.weights) - 1
    activations = [batch]
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = activations[-1] @ w + b
        activations.append(z if i == last else np.tanh(z))
    return activations


def forward(model: AutoencoderModel, states: np.ndarray) -> np.ndarray:
    """Reconstruct one state (1-D) or a batch of states (2-D)."""
    states = np.asarray(states, dtype=np.float64)
    single = states.ndim == 1
    batch = states[None, :] if single else states
    if batch.shape[1] != model.n_inputs:
        raise DimensionMismatch(f"expected {model.n_inputs} inputs, got {batch.shape[1]}")
    out = _forward_cached(model, batch)[-1]
    return out[0] if single else out


def reconstruction_errors(model: AutoencoderModel, states: np.ndarray) -> np.ndarray:
    """Per-row mean squared reconstruction error."""
    states = np.asarray(states, dtype=np.float64)
    batch = states[None, :] if states.ndim == 1 else states
    recon = forward(model, batch)
    return np.mean((batch - recon) ** 2, axis=1)


def loss_and_gradients(
    model: AutoencoderModel, batch: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean squared error over the batch and its analytic weight/bias gradients.

    The loss averages over both rows and features, so gradients stay on a
    comparable scale regardless of batch size.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.n_inputs:
        raise DimensionMismatch(f"batch must be 2-D with {model.n_inputs} columns")
    activations = _forward_cached(model, batch)
    output = activations[-1]
    diff = output - batch
    loss = float(np.mean(diff**2))

    n_layers = len(model.weights)
    grads_w: list[np.ndarray] = [np.empty(0)] * n_layers
    grads_b: list[np.ndarray] = [np.empty(0)] * n_layers
    delta = 2.0 * diff / diff.size  # output layer is linear
    for i in range(n_layers - 1, -1, -1):
        grads_w[i] = activations[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (1.0 - activations[i] ** 2)
    return loss, grads_w, grads_b


def train(
    model: AutoencoderModel, data: np.ndarray, config: TrainingConfig
) -> tuple[AutoencoderModel, list[float]]:
    """Train a copy of ``model`` on normalized rows; returns (model, loss curve).

    One curve entry per epoch, measured over the full dataset after the
    epoch's updates.  Raises :class:`NonFiniteLoss` if the loss diverges.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("training data must be a non-empty 2-D array")
    if data.shape[1] != model.n_inputs:
        raise DimensionMismatch(f"expected {model.n_inputs} columns, got {data.shape[1]}")

    model = model.clone()
    rng = np.random.default_rng(config.seed)
    n_rows = data.shape[0]
    batch_size = config.resolve_batch_size(n_rows)
    curve: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n_rows)
        for start in range(0, n_rows, batch_size):
            batch = data[order[start : start + batch_size]]
            _, grads_w, grads_b = loss_and_gradients(model, batch)
            for w, b, gw, gb in zip(model.weights, model.biases, grads_w, grads_b):
                w -= config.learning_rate * gw
                b -= config.learning_rate * gb
        epoch_loss = float(np.mean((data - forward(model, data)) ** 2))
        if not math.isfinite(epoch_loss):
            raise NonFiniteLoss(f"loss became non-finite at epoch {epoch + 1}")
        curve.append(epoch_loss)
    return model, curve
