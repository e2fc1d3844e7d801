"""Centered RMSProp.

Accumulates exponential moving averages of the gradient and squared gradient,
normalizes by the centered second moment (variance estimate) with epsilon
inside the square root, and applies momentum on the update itself:

    g <- decay*g + (1-decay)*grad
    n <- decay*n + (1-decay)*grad^2
    delta <- momentum*delta - lr*grad / sqrt(n - g^2 + epsilon)
    theta <- theta + delta

Defaults are the published set: lr 1e-5, epsilon 0.01, momentum 0.9,
decay 0.95.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericError


@dataclass
class RmsPropState:
    lr: float = 1e-5
    epsilon: float = 0.01
    momentum: float = 0.9
    decay: float = 0.95
    g_avg: dict = field(default_factory=dict)
    sq_avg: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)


def init_rmsprop(params: dict[str, np.ndarray], lr: float = 1e-5,
                 epsilon: float = 0.01, momentum: float = 0.9,
                 decay: float = 0.95) -> RmsPropState:
    state = RmsPropState(lr=lr, epsilon=epsilon, momentum=momentum, decay=decay)
    for path, arr in params.items():
        state.g_avg[path] = np.zeros_like(arr)
        state.sq_avg[path] = np.zeros_like(arr)
        state.delta[path] = np.zeros_like(arr)
    return state


def rmsprop_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
                 state: RmsPropState) -> None:
    """One parameter update, in place over the live param arrays."""
    if set(params) != set(state.g_avg):
        raise DimensionError("optimizer state does not match parameter set")
    for path, theta in params.items():
        grad = grads[path]
        if grad.shape != theta.shape:
            raise DimensionError(f"gradient shape mismatch at {path}")
        g = state.g_avg[path]
        n = state.sq_avg[path]
        d = state.delta[path]
        g *= state.decay
        g += (1.0 - state.decay) * grad
        n *= state.decay
        n += (1.0 - state.decay) * np.square(grad)
        denom = n - np.square(g) + state.epsilon
        if denom.min() <= 0.0:
            raise NumericError(f"rmsprop variance estimate not positive at {path}")
        d *= state.momentum
        d -= state.lr * grad / np.sqrt(denom)
        if not np.isfinite(d).all():
            raise NumericError(f"non-finite rmsprop update at {path}")
        theta += d
