"""Multilayer perceptron trained by mini-batch SGD with momentum.

Rectified-linear hidden layers, softmax output, mean cross-entropy loss.
Weights start Glorot-uniform from a seeded generator and batches follow a
seeded shuffle, so training is fully reproducible. The gradient routine is
exposed separately so it can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MlpParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)


def init_params(layer_sizes: tuple[int, ...], rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _forward(params: MlpParams, X: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Returns (layer activations including input, softmax probabilities)."""
    activations = [X]
    h = X
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ W + b
        if i < last:
            h = np.maximum(z, 0.0)
            activations.append(h)
        else:
            z = z - z.max(axis=1, keepdims=True)
            e = np.exp(z)
            probs = e / e.sum(axis=1, keepdims=True)
    return activations, probs


def predict_proba(params: MlpParams, X: np.ndarray) -> np.ndarray:
    return _forward(params, X)[1]


def cross_entropy(params: MlpParams, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of integer labels y."""
    probs = predict_proba(params, X)
    picked = probs[np.arange(X.shape[0]), y]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def gradients(
    params: MlpParams,
    X: np.ndarray,
    y: np.ndarray,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Backpropagated gradients of the mean cross-entropy.

    Returns (weight gradients, bias gradients) matching the parameter
    shapes. Duplicating every batch row leaves the result unchanged.
    """
    n = X.shape[0]
    if n == 0:
        raise ValueError("gradient batch is empty")
    activations, probs = _forward(params, X)
    one_hot = np.zeros_like(probs)
    one_hot[np.arange(n), y] = 1.0

    delta = (probs - one_hot) / n
    d_weights: list[np.ndarray] = [None] * len(params.weights)
    d_biases: list[np.ndarray] = [None] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        d_weights[layer] = activations[layer].T @ delta
        d_biases[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer].T) * (activations[layer] > 0.0)
    return d_weights, d_biases


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    hidden: tuple[int, ...],
    n_classes: int,
    learning_rate: float,
    momentum: float,
    epochs: int,
    batch_size: int,
    seed: int,
) -> MlpParams:
    rng = np.random.default_rng(seed)
    sizes = (X.shape[1],) + tuple(hidden) + (n_classes,)
    params = init_params(sizes, rng)
    vel_w = [np.zeros_like(w) for w in params.weights]
    vel_b = [np.zeros_like(b) for b in params.biases]

    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            d_w, d_b = gradients(params, X[batch], y[batch])
            for i in range(len(params.weights)):
                vel_w[i] = momentum * vel_w[i] - learning_rate * d_w[i]
                vel_b[i] = momentum * vel_b[i] - learning_rate * d_b[i]
                params.weights[i] += vel_w[i]
                params.biases[i] += vel_b[i]
    return params


def predict_mlp(params: MlpParams, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    probs = predict_proba(params, X)
    return np.argmax(probs, axis=1).astype(np.int64), probs
