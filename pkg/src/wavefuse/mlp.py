"""Multilayer perceptron trained by online backpropagation with momentum.

Fixed conventions: logistic sigmoid on every non-input layer, squared error
E = 1/2 * sum((y - t)^2) per sample, per-sample (online) updates with the
momentum rule delta_w(n) = -lr * dE/dw + momentum * delta_w(n-1), and a
seeded shuffle of the sample order each epoch. Weight and bias values are
initialized uniformly in [-0.5, 0.5] from the same seeded generator, so a
fixed config and dataset reproduce the trained model bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DataError, NumericError


@dataclass(frozen=True)
class MlpConfig:
    layer_sizes: tuple[int, ...]
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 1000
    seed: int = 0
    target_error: float = 1e-3

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise DataError(f"need at least 2 layers, got {sizes}")
        if any(s < 1 for s in sizes):
            raise DataError(f"layer sizes must be positive, got {sizes}")
        if self.learning_rate <= 0:
            raise DataError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise DataError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise DataError(f"epochs must be >= 1, got {self.epochs}")
        if self.target_error < 0:
            raise DataError(f"target error must be >= 0, got {self.target_error}")


@dataclass
class MlpModel:
    """Trained network: per-layer weight matrices (fan-out x fan-in) and biases."""

    config: MlpConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    epochs_run: int = 0
    final_error: float = math.nan

    def __post_init__(self):
        sizes = self.config.layer_sizes
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise DataError(
                    f"layer {i} parameter shapes {w.shape}/{b.shape} do not chain "
                    f"with layer sizes {sizes}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise DataError(f"non-finite parameters in layer {i}")


def forward(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    """Run one input through the network, returning all layer activations.

    The first entry is the input itself, the last the output scores, each
    score strictly inside (0, 1).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.config.layer_sizes[0],):
        raise DataError(
            f"input length {x.shape} does not match input size "
            f"{model.config.layer_sizes[0]}"
        )
    activations = [x]
    for w, b in zip(model.weights, model.biases):
        activations.append(expit(w @ activations[-1] + b))
    return activations


def loss_and_gradients(model: MlpModel, x, target):
    """Per-sample squared error and its analytic gradients.

    Returns (loss, weight gradients, bias gradients) where loss is
    1/2 * sum((y - t)^2). Shared by the training loop and by gradient checks.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (model.config.layer_sizes[-1],):
        raise DataError(
            f"target length {target.shape} does not match output size "
            f"{model.config.layer_sizes[-1]}"
        )
    acts = forward(model, x)
    out = acts[-1]
    loss = 0.5 * float(np.sum((out - target) ** 2))
    delta = (out - target) * out * (1.0 - out)
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for layer in range(len(model.weights) - 1, -1, -1):
        grads_w[layer] = np.outer(delta, acts[layer])
        grads_b[layer] = delta
        if layer:
            a = acts[layer]
            delta = (model.weights[layer].T @ delta) * a * (1.0 - a)
    return loss, grads_w, grads_b


def _validate_data(config: MlpConfig, data):
    if len(data) == 0:
        raise DataError("no training samples")
    n_in, n_out = config.layer_sizes[0], config.layer_sizes[-1]
    xs = np.empty((len(data), n_in))
    ts = np.empty((len(data), n_out))
    for i, (x, t) in enumerate(data):
        x = np.asarray(x, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        if x.shape != (n_in,):
            raise DataError(f"sample {i} input shape {x.shape}, expected ({n_in},)")
        if t.shape != (n_out,):
            raise DataError(f"sample {i} target shape {t.shape}, expected ({n_out},)")
        xs[i], ts[i] = x, t
    return xs, ts


def train(config: MlpConfig, data) -> MlpModel:
    """Fit a network to (input, target) pairs by backpropagation with momentum.

    Stops early once an epoch's mean per-sample error drops to
    ``config.target_error``; raises NumericError, naming the epoch, if the
    loss or any parameter turns non-finite (sigmoid outputs keep the loss
    itself bounded, so runaway weights are the usual divergence signal).
    """
    xs, ts = _validate_data(config, data)
    sizes = config.layer_sizes
    rng = np.random.default_rng(config.seed)
    weights = [rng.uniform(-0.5, 0.5, (sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
    biases = [rng.uniform(-0.5, 0.5, sizes[i + 1]) for i in range(len(sizes) - 1)]
    model = MlpModel(config=config, weights=weights, biases=biases)
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]

    lr, mom = config.learning_rate, config.momentum
    epoch_error = math.nan
    epoch = 0
    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for i in rng.permutation(len(xs)):
            loss, grads_w, grads_b = loss_and_gradients(model, xs[i], ts[i])
            total += loss
            for layer in range(len(weights)):
                vel_w[layer] = mom * vel_w[layer] - lr * grads_w[layer]
                vel_b[layer] = mom * vel_b[layer] - lr * grads_b[layer]
                weights[layer] += vel_w[layer]
                biases[layer] += vel_b[layer]
        epoch_error = total / len(xs)
        finite_params = all(
            np.all(np.isfinite(arr)) for arr in (*weights, *biases)
        )
        if not math.isfinite(epoch_error) or not finite_params:
            raise NumericError(
                f"training diverged: non-finite loss or parameters at epoch {epoch}"
            )
        if epoch_error <= config.target_error:
            break
    model.epochs_run = epoch
    model.final_error = epoch_error
    return model


def predict(model: MlpModel, x) -> tuple[int, np.ndarray]:
    """Class index (argmax of output scores, ties to the lowest) plus the scores."""
    scores = forward(model, x)[-1]
    return int(np.argmax(scores)), scores
