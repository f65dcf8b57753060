"""Dense, 1-D convolution, max pooling, dropout, and softmax cross-entropy.

Each layer caches its forward inputs and accumulates parameter gradients
with += so a minibatch is just several forward/backward pairs between
zero_grads() calls. backward(grad_out) returns the gradient with respect
to the layer input.
"""

from __future__ import annotations

import math

import numpy as np


def conv_output_length(n: int, window: int, stride: int) -> int:
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    if n < window:
        raise ValueError(f"input length {n} shorter than window {window}")
    return (n - window) // stride + 1


class Dense:
    """Fully connected map: out = W x + b, W of shape (out_dim, in_dim)."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        if weights.shape[0] != bias.shape[0]:
            raise ValueError("bias length must match output dimension")
        self.weights = weights
        self.bias = bias
        self.grad_weights = np.zeros_like(weights)
        self.grad_bias = np.zeros_like(bias)
        self._x = None

    @classmethod
    def init(cls, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32):
        limit = math.sqrt(6.0 / (in_dim + out_dim))
        w = rng.uniform(-limit, limit, size=(out_dim, in_dim)).astype(dtype)
        return cls(w, np.zeros(out_dim, dtype=dtype))

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.weights.shape[1],):
            raise ValueError(
                f"expected input of shape ({self.weights.shape[1]},), got {x.shape}"
            )
        self._x = x
        return self.weights @ x + self.bias

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        self.grad_weights += np.outer(grad_out, self._x)
        self.grad_bias += grad_out
        return self.weights.T @ grad_out

    def params(self) -> dict[str, np.ndarray]:
        return {"weights": self.weights, "bias": self.bias}

    def grads(self) -> dict[str, np.ndarray]:
        return {"weights": self.grad_weights, "bias": self.grad_bias}

    def zero_grads(self):
        self.grad_weights[...] = 0
        self.grad_bias[...] = 0


class Conv1d:
    """Valid 1-D convolution over an (n, h) sequence.

    filters has shape (n_filters, window, h); output is
    (conv_output_length(n, window, stride), n_filters).
    """

    def __init__(self, filters: np.ndarray, bias: np.ndarray, stride: int = 1):
        if filters.ndim != 3:
            raise ValueError("filters must have shape (n_filters, window, h)")
        if filters.shape[0] != bias.shape[0]:
            raise ValueError("bias length must match filter count")
        self.filters = filters
        self.bias = bias
        self.stride = stride
        self.grad_filters = np.zeros_like(filters)
        self.grad_bias = np.zeros_like(bias)
        self._cache = None

    @classmethod
    def init(cls, n_filters: int, window: int, in_dim: int,
             rng: np.random.Generator, stride: int = 1, dtype=np.float32):
        limit = math.sqrt(6.0 / (window * in_dim + n_filters))
        f = rng.uniform(-limit, limit, size=(n_filters, window, in_dim)).astype(dtype)
        return cls(f, np.zeros(n_filters, dtype=dtype), stride=stride)

    def forward(self, seq: np.ndarray) -> np.ndarray:
        n_filters, window, h = self.filters.shape
        if seq.ndim != 2 or seq.shape[1] != h:
            raise ValueError(f"expected input of shape (n, {h}), got {seq.shape}")
        out_len = conv_output_length(seq.shape[0], window, self.stride)
        gather = np.arange(out_len)[:, None] * self.stride + np.arange(window)[None, :]
        windows = seq[gather].reshape(out_len, window * h)
        self._cache = (seq.shape, gather, windows)
        return windows @ self.filters.reshape(n_filters, -1).T + self.bias

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        seq_shape, gather, windows = self._cache
        n_filters, window, h = self.filters.shape
        self.grad_filters += (grad_out.T @ windows).reshape(n_filters, window, h)
        self.grad_bias += grad_out.sum(axis=0)
        grad_windows = grad_out @ self.filters.reshape(n_filters, -1)
        grad_seq = np.zeros(seq_shape, dtype=grad_out.dtype)
        # overlapping windows must add, not overwrite
        np.add.at(grad_seq, gather, grad_windows.reshape(-1, window, h))
        return grad_seq

    def params(self) -> dict[str, np.ndarray]:
        return {"filters": self.filters, "bias": self.bias}

    def grads(self) -> dict[str, np.ndarray]:
        return {"filters": self.grad_filters, "bias": self.grad_bias}

    def zero_grads(self):
        self.grad_filters[...] = 0
        self.grad_bias[...] = 0


class MaxPool1d:
    """Windowed maximum along the time axis of an (L, n_filters) map.

    stride defaults to the pool size (non-overlapping windows). Gradient
    flows to the earliest maximum in each window.
    """

    def __init__(self, pool: int, stride: int | None = None):
        if pool < 1:
            raise ValueError("pool must be >= 1")
        self.pool = pool
        self.stride = pool if stride is None else stride
        self._cache = None

    def forward(self, fmap: np.ndarray) -> np.ndarray:
        length, n_filters = fmap.shape
        out_len = conv_output_length(length, self.pool, self.stride)
        starts = np.arange(out_len) * self.stride
        windows = fmap[starts[:, None] + np.arange(self.pool)[None, :]]
        arg = windows.argmax(axis=1)  # first occurrence wins ties
        self._cache = (fmap.shape, starts[:, None] + arg)
        return np.take_along_axis(windows, arg[:, None, :], axis=1)[:, 0, :]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        in_shape, rows = self._cache
        grad_in = np.zeros(in_shape, dtype=grad_out.dtype)
        cols = np.broadcast_to(np.arange(in_shape[1]), rows.shape)
        np.add.at(grad_in, (rows, cols), grad_out)
        return grad_in

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def grads(self) -> dict[str, np.ndarray]:
        return {}

    def zero_grads(self):
        pass


def dropout_apply(
    x: np.ndarray, rate: float, train: bool, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Inverted dropout. Returns (output, mask); backward is grad * mask.

    Identity (mask of ones) at rate 0 or outside training.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError("rate must be in [0, 1)")
    if not train or rate == 0.0:
        return x, np.ones_like(x)
    if rng is None:
        raise ValueError("training-mode dropout needs an rng")
    mask = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * mask, mask


class Dropout:
    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError("rate must be in [0, 1)")
        self.rate = rate
        self._mask = None

    def forward(self, x: np.ndarray, train: bool = False,
                rng: np.random.Generator | None = None) -> np.ndarray:
        out, self._mask = dropout_apply(x, self.rate, train, rng)
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return grad_out * self._mask


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_xent(logits: np.ndarray, gold: int) -> tuple[float, np.ndarray]:
    """Cross-entropy of softmax(logits) against the gold class.

    Returns (loss, grad_logits) where grad = p - onehot(gold). Stable for
    logits of magnitude well past 1e3 via log-sum-exp.
    """
    if not np.all(np.isfinite(logits)):
        raise ValueError("non-finite logits")
    if not 0 <= gold < logits.shape[0]:
        raise ValueError(f"gold index {gold} out of range for {logits.shape[0]} classes")
    z = logits - logits.max()
    log_norm = np.log(np.exp(z).sum())
    loss = float(log_norm - z[gold])
    grad = np.exp(z - log_norm)
    grad[gold] -= 1.0
    return loss, grad
