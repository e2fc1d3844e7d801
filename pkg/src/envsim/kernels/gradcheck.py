"""Central finite-difference gradient checking.

The checker is the independent oracle for every backward kernel in the
package: it never calls any backward code, only repeated forward evaluations.
For large parameter sets a random subset of coordinates per tensor keeps the
cost bounded; sampling is seeded and reproducible.
"""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from ..errors import DimensionError, NumericError
from .. import ptree

_REL_FLOOR = 1e-8


def _rel_err(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), _REL_FLOOR)


def finite_diff_check(f: Callable[[np.ndarray], float], point: np.ndarray,
                      analytic_grad: np.ndarray, step: float,
                      *, sample: int | None = None,
                      rng: np.random.Generator | None = None,
                      min_grad: float = 0.0) -> float:
    """Max relative error between analytic_grad and central differences of f.

    Probes every coordinate of `point`, or `sample` random coordinates when
    given.  Both probe evaluations must be finite.

    `min_grad` restricts probing to coordinates with |analytic| >= min_grad.
    Central differences of a float64 forward pass carry an absolute noise
    floor of roughly eps*|f|/step, so coordinates whose gradient sits below
    that floor cannot be resolved by this oracle at any tolerance; callers
    checking large composite losses should exclude them explicitly.  If no
    coordinate qualifies, the largest-magnitude one is probed.
    """
    if step <= 0:
        raise DimensionError(f"step must be positive, got {step}")
    if point.shape != analytic_grad.shape:
        raise DimensionError(
            f"gradient shape {analytic_grad.shape} != point shape {point.shape}")

    flat = point.reshape(-1)
    grad_flat = analytic_grad.reshape(-1)
    if min_grad > 0.0:
        eligible = np.flatnonzero(np.abs(grad_flat) >= min_grad)
        if eligible.size == 0:
            eligible = np.array([int(np.argmax(np.abs(grad_flat)))])
    else:
        eligible = np.arange(flat.size)
    if sample is not None and sample < eligible.size:
        if rng is None:
            rng = np.random.default_rng(0)
        indices = rng.choice(eligible, size=sample, replace=False)
    else:
        indices = eligible

    worst = 0.0
    for i in indices:
        orig = flat[i]
        flat[i] = orig + step
        f_plus = float(f(point))
        flat[i] = orig - step
        f_minus = float(f(point))
        flat[i] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NumericError(f"non-finite probe value at coordinate {i}")
        numeric = (f_plus - f_minus) / (2.0 * step)
        worst = max(worst, _rel_err(float(grad_flat[i]), numeric))
    return worst


def finite_diff_check_tree(loss: Callable[[], float], params: Any, grads: Any,
                           step: float, *, sample_per_tensor: int | None = None,
                           rng: np.random.Generator | None = None
                           ) -> dict[str, float]:
    """Run the coordinate check against every array in a parameter tree.

    `loss` is a thunk reading the (mutated-in-place) params; `grads` is the
    analytic gradient tree with identical structure.  Returns max relative
    error per tree path.
    """
    grad_flat = ptree.flatten(grads)
    results: dict[str, float] = {}
    for path, arr in ptree.iter_arrays(params):
        g = grad_flat[path]
        results[path] = finite_diff_check(
            lambda _arr: loss(), arr, g, step, sample=sample_per_tensor, rng=rng)
    return results
