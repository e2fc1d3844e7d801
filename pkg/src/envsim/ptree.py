"""Utilities over parameter trees.

A parameter tree is a dataclass whose fields are numpy arrays, lists of
arrays, nested parameter dataclasses, or None.  Gradients reuse the same
dataclass types, so everything here works for both.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Callable, Iterator

import numpy as np


def iter_arrays(tree: Any, prefix: str = "") -> Iterator[tuple[str, np.ndarray]]:
    """Yield (path, array) pairs in a deterministic field order."""
    if isinstance(tree, np.ndarray):
        yield prefix, tree
    elif dataclasses.is_dataclass(tree):
        for f in dataclasses.fields(tree):
            value = getattr(tree, f.name)
            path = f"{prefix}.{f.name}" if prefix else f.name
            yield from iter_arrays(value, path)
    elif isinstance(tree, (list, tuple)):
        for i, value in enumerate(tree):
            yield from iter_arrays(value, f"{prefix}.{i}")
    elif tree is None:
        return
    elif isinstance(tree, (int, float, str, bool)):
        return
    else:
        raise TypeError(f"unsupported tree node at {prefix!r}: {type(tree)}")


def flatten(tree: Any) -> dict[str, np.ndarray]:
    """Path-keyed view of the tree's arrays (references, not copies)."""
    return dict(iter_arrays(tree))


def map_arrays(fn: Callable[[np.ndarray], np.ndarray], tree: Any) -> Any:
    """Build a structurally identical tree with fn applied to each array."""
    if isinstance(tree, np.ndarray):
        return fn(tree)
    if dataclasses.is_dataclass(tree):
        kwargs = {
            f.name: map_arrays(fn, getattr(tree, f.name))
            for f in dataclasses.fields(tree)
        }
        return type(tree)(**kwargs)
    if isinstance(tree, list):
        return [map_arrays(fn, v) for v in tree]
    if isinstance(tree, tuple):
        return tuple(map_arrays(fn, v) for v in tree)
    if tree is None or isinstance(tree, (int, float, str, bool)):
        return tree
    raise TypeError(f"unsupported tree node: {type(tree)}")


def zeros_like(tree: Any) -> Any:
    return map_arrays(np.zeros_like, tree)


def add_in_place(dst: Any, src: Any) -> None:
    """dst += src elementwise over matching tree structures."""
    dst_flat = flatten(dst)
    for path, arr in iter_arrays(src):
        dst_flat[path] += arr


def scale_in_place(tree: Any, factor: float) -> None:
    for _, arr in iter_arrays(tree):
        arr *= factor


def global_norm(tree: Any) -> float:
    total = 0.0
    for _, arr in iter_arrays(tree):
        total += float(np.sum(arr.astype(np.float64) ** 2))
    return float(np.sqrt(total))
