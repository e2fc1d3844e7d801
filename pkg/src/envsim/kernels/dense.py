"""Affine layer: y = x @ W^T + b, with exact gradients.

Weights have layout (out_features, in_features).  Inputs may carry any number
of leading batch dimensions.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError


def dense_apply(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    if w.ndim != 2:
        raise DimensionError(f"dense weights must be 2-d, got {w.shape}")
    if x.shape[-1] != w.shape[1]:
        raise DimensionError(f"input dim {x.shape[-1]} != weight columns {w.shape[1]}")
    if b.shape != (w.shape[0],):
        raise DimensionError(f"bias shape {b.shape}, expected ({w.shape[0]},)")
    return x @ w.T + b


def dense_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if dy.shape[-1] != w.shape[0]:
        raise DimensionError(f"upstream dim {dy.shape[-1]} != weight rows {w.shape[0]}")
    dx = dy @ w
    dy2 = dy.reshape(-1, w.shape[0])
    x2 = x.reshape(-1, w.shape[1])
    dw = dy2.T @ x2
    db = dy2.sum(axis=0)
    return dx, dw, db
