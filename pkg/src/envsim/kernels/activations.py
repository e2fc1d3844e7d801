"""Elementwise activations with saved-context backward passes.

The randomized rectifier samples one negative-side slope per negative element
per forward call in train mode and reuses exactly those slopes in backward;
eval mode uses the fixed midpoint slope (lower+upper)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, NumericError


@dataclass(frozen=True)
class RReluSpec:
    lower: float = 1.0 / 8.0
    upper: float = 1.0 / 3.0

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper < 1.0):
            raise DimensionError(f"require 0 < lower <= upper < 1, got {self}")

    @property
    def eval_slope(self) -> float:
        return (self.lower + self.upper) / 2.0


def sigmoid_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # numerically stable on both tails
    y = np.empty_like(x)
    pos = x >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    y[~pos] = ex / (1.0 + ex)
    return y, y


def sigmoid_backward(dy: np.ndarray, saved: np.ndarray) -> np.ndarray:
    return dy * saved * (1.0 - saved)


def tanh_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.tanh(x)
    return y, y


def tanh_backward(dy: np.ndarray, saved: np.ndarray) -> np.ndarray:
    return dy * (1.0 - saved * saved)


def rrelu_forward(x: np.ndarray, spec: RReluSpec, train: bool,
                  rng: np.random.Generator | None = None
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Returns (output, slopes) where slopes is the full per-element slope map
    (1 for non-negative entries) needed by the backward pass."""
    if not np.isfinite(x).all():
        raise NumericError("non-finite input to rrelu")
    if train:
        if rng is None:
            raise DimensionError("train-mode rrelu requires a random generator")
        slopes = np.ones_like(x)
        neg = x < 0
        slopes[neg] = rng.uniform(spec.lower, spec.upper, size=int(neg.sum())).astype(x.dtype)
    else:
        slopes = np.where(x < 0, x.dtype.type(spec.eval_slope), x.dtype.type(1.0))
    return x * slopes, slopes


def rrelu_backward(dy: np.ndarray, slopes: np.ndarray) -> np.ndarray:
    return dy * slopes


_FORWARD = {"sigmoid": sigmoid_forward, "tanh": tanh_forward}
_BACKWARD = {"sigmoid": sigmoid_backward, "tanh": tanh_backward, "rrelu": rrelu_backward}


def activation_apply(x: np.ndarray, kind: str, spec: RReluSpec | None = None,
                     train: bool = False, rng: np.random.Generator | None = None):
    """Uniform entry point: returns (output, saved-context)."""
    if kind == "rrelu":
        if spec is None:
            raise DimensionError("rrelu requires an RReluSpec")
        return rrelu_forward(x, spec, train, rng)
    try:
        return _FORWARD[kind](x)
    except KeyError:
        raise DimensionError(f"unknown activation kind {kind!r}") from None


def activation_backward(dy: np.ndarray, kind: str, saved: np.ndarray) -> np.ndarray:
    try:
        return _BACKWARD[kind](dy, saved)
    except KeyError:
        raise DimensionError(f"unknown activation kind {kind!r}") from None
