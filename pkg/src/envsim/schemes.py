"""Training-scheme catalog: which prediction steps run on the model's own
output versus the ground-truth frame, possibly varying with the parameter
update count.

Mask layout is a length-T tuple over the prediction window.  "First K
parameter updates" boundaries are inclusive: updates 1..K belong to the
earlier phase.  Fixed-position schemes (pdt33, pdt46, pdt67, pdt0_20_33) are
the published T=15 catalog and require T=15; the remaining schemes generalize
to any T.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionError
from .recurrent import RolloutPlan, TransitionMode

O = TransitionMode.OBSERVATION
P = TransitionMode.PREDICTION

SCHEME_IDS = (
    "pdt0",
    "pdt33",
    "pdt0_20_33",
    "pdt46alt",
    "pdt46",
    "pdt67",
    "pdt0_100",
    "pdt100",
    "oh_three_phase",
)

_FIXED_T15 = {"pdt33", "pdt46", "pdt67", "pdt0_20_33"}

# oh_three_phase: per-phase (prediction length, all-prediction?) with phase
# lengths 500k / 250k / 750k parameter updates
_OH_PHASES = ((10, False, 500_000), (3, True, 250_000), (5, True, 750_000))


@dataclass(frozen=True)
class SchemeConfig:
    scheme_id: str
    T: int = 15
    warmup: int = 10

    def __post_init__(self):
        if self.scheme_id not in SCHEME_IDS:
            raise DimensionError(
                f"unknown scheme {self.scheme_id!r}; available: {list(SCHEME_IDS)}")
        if self.T < 1:
            raise DimensionError(f"prediction length must be >= 1, got {self.T}")
        if self.scheme_id in _FIXED_T15 and self.T != 15:
            raise DimensionError(f"scheme {self.scheme_id} is defined for T=15 only")


def _split(n_obs: int, n_pred: int) -> tuple[TransitionMode, ...]:
    return (O,) * n_obs + (P,) * n_pred


def scheme_mask(config: SchemeConfig, update_index: int) -> RolloutPlan:
    """Transition-mode mask for the given parameter update (1-based)."""
    if update_index < 1:
        raise DimensionError(f"update_index must be >= 1, got {update_index}")
    sid, T = config.scheme_id, config.T

    if sid == "pdt0":
        mask = _split(T, 0)
    elif sid == "pdt100":
        mask = _split(0, T)
    elif sid == "pdt33":
        mask = _split(10, 5)
    elif sid == "pdt46":
        mask = _split(8, 7)
    elif sid == "pdt67":
        mask = _split(5, 10)
    elif sid == "pdt46alt":
        mask = tuple(O if i % 2 == 0 else P for i in range(T))
    elif sid == "pdt0_100":
        mask = _split(T, 0) if update_index <= 1000 else _split(0, T)
    elif sid == "pdt0_20_33":
        if update_index <= 10_000:
            mask = _split(15, 0)
        elif update_index <= 110_000:
            mask = _split(12, 3)
        else:
            mask = _split(10, 5)
    elif sid == "oh_three_phase":
        remaining = update_index
        phase_t, all_pred = _OH_PHASES[-1][0], _OH_PHASES[-1][1]
        for t, pred, count in _OH_PHASES:
            if remaining <= count:
                phase_t, all_pred = t, pred
                break
            remaining -= count
        mask = _split(0, phase_t) if all_pred else _split(phase_t, 0)
    else:  # pragma: no cover - guarded by SchemeConfig
        raise DimensionError(f"unknown scheme {sid!r}")

    return RolloutPlan(warmup=config.warmup, mask=mask)


def prediction_fraction(plan: RolloutPlan) -> float:
    return sum(m is P for m in plan.mask) / len(plan.mask)
