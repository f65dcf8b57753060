"""Finite-difference verification of analytic gradients.

Checks project the layer output onto a fixed random direction to get a
scalar, then compare the layer's backward pass against central differences.
Run layers built in float64; float32 cannot resolve the 1e-4 tolerance.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Worst component-wise |a-b| / max(|a|, |b|, 1e-8)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return float((np.abs(a - b) / denom).max())


def numeric_grad(f: Callable[[], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central differences of f with respect to x, perturbing x in place."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        f_plus = f()
        flat[i] = orig - eps
        f_minus = f()
        flat[i] = orig
        out[i] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def grad_check(layer, x: np.ndarray, rng: np.random.Generator | None = None,
               eps: float = 1e-5) -> float:
    """Max relative error over the layer's input and parameter gradients.

    layer must expose forward/backward/params/grads/zero_grads and be
    deterministic (no training-mode dropout).
    """
    rng = rng or np.random.default_rng(0)
    direction = rng.standard_normal(layer.forward(x).shape)

    def scalar() -> float:
        return float((layer.forward(x) * direction).sum())

    layer.zero_grads()
    layer.forward(x)
    analytic_x = layer.backward(direction)
    analytic_params = {k: v.copy() for k, v in layer.grads().items()}

    worst = relative_error(analytic_x, numeric_grad(scalar, x, eps))
    for name, param in layer.params().items():
        err = relative_error(analytic_params[name], numeric_grad(scalar, param, eps))
        worst = max(worst, err)
    return worst
