"""Mean-squared-error objective and the truncated-BPTT training loop.

Training samples fixed-length segments uniformly over all valid start offsets
across episodes, without replacement within an epoch.  A BPTT(T, n) group
covers warm-up plus n consecutive prediction windows of length T: the first
window runs warm-up, each later window starts from the detached final state
(and, when its first transition is prediction-dependent, the detached final
predicted frame) of the previous one, and every window gets its own optimizer
update.  Gradients never cross window boundaries.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ptree
from .errors import DimensionError, NumericError
from .optim import RmsPropState, rmsprop_step
from .recurrent import (
    RolloutPlan,
    Simulator,
    TransitionMode,
    VARIANT_PI,
    all_latent_mask,
    rollout,
    rollout_backward,
)
from .schemes import SchemeConfig, scheme_mask


def mse_loss(predictions, targets) -> tuple[float, list[np.ndarray]]:
    """Sum over steps of squared error normalized by (3 * batch).

    predictions/targets: sequences of (B, C, H, W) frames (or a single frame
    each).  Returns the scalar loss and the per-step gradients.
    """
    if isinstance(predictions, np.ndarray) and predictions.ndim == 4:
        predictions = [predictions]
        targets = [targets]
    if len(predictions) != len(targets):
        raise DimensionError(
            f"{len(predictions)} predictions vs {len(targets)} targets")
    loss = 0.0
    grads = []
    for pred, tgt in zip(predictions, targets):
        if pred.shape != tgt.shape:
            raise DimensionError(f"shape mismatch {pred.shape} vs {tgt.shape}")
        batch = pred.shape[0] if pred.ndim == 4 else 1
        diff = pred - tgt
        norm = 3.0 * batch
        loss += float(np.sum(diff.astype(np.float64) ** 2)) / norm
        grads.append((2.0 / norm) * diff)
    return loss, grads


@dataclass(frozen=True)
class BpttConfig:
    subseq_len: int
    subseq_count: int = 1

    def __post_init__(self):
        if self.subseq_len < 1 or self.subseq_count < 1:
            raise DimensionError(f"invalid BPTT config {self}")


class SegmentSampler:
    """Uniform segment sampling without replacement within an epoch."""

    def __init__(self, episodes, segment_len: int, rng: np.random.Generator):
        self.episodes = episodes
        self.segment_len = segment_len
        self.rng = rng
        self._pool = []
        for ep_idx, ep in enumerate(episodes):
            n = len(ep.frames)
            if n < segment_len + 1:
                continue
            for off in range(n - segment_len):
                self._pool.append((ep_idx, off))
        if not self._pool:
            raise DimensionError(
                f"no episode is longer than the segment length {segment_len}")
        self._order = None
        self._cursor = 0

    def _reshuffle(self):
        self._order = self.rng.permutation(len(self._pool))
        self._cursor = 0

    def next_batch(self, batch: int) -> list[tuple[int, int]]:
        out = []
        while len(out) < batch:
            if self._order is None or self._cursor >= len(self._order):
                self._reshuffle()
            out.append(self._pool[self._order[self._cursor]])
            self._cursor += 1
        return out


@dataclass
class TrainLogRecord:
    update_index: int
    frames_seen: int
    loss: float
    scheme: str
    lr: float

    def as_json(self) -> str:
        return json.dumps({
            "update_index": self.update_index,
            "frames_seen": self.frames_seen,
            "loss": self.loss,
            "scheme": self.scheme,
            "lr": self.lr,
        })


def _clip_grads(flat: dict[str, np.ndarray], max_norm: float) -> None:
    total = 0.0
    for arr in flat.values():
        total += float(np.sum(arr.astype(np.float64) ** 2))
    norm = float(np.sqrt(total))
    if norm > max_norm:
        scale = max_norm / norm
        for arr in flat.values():
            arr *= scale


def train_bptt(sim: Simulator, dataset, scheme: SchemeConfig, bptt: BpttConfig,
               opt_state: RmsPropState, *, updates: int, batch_size: int = 16,
               seed: int = 0, grad_clip: float | None = None,
               log_stream=None, on_update: Callable | None = None,
               ) -> list[TrainLogRecord]:
    """Run `updates` parameter updates; returns the training log.

    The dataset must expose `.episodes` (with `.frames` raw u8 (N, C, H, W)
    and `.actions` u8 (N-1,)) and `.preprocess(frames) -> float` frames.
    """
    rng = np.random.default_rng(seed)
    params_flat = ptree.flatten(sim)
    log: list[TrainLogRecord] = []
    frames_seen = 0
    sampler = None
    sampler_len = None

    update_index = 1
    while update_index <= updates:
        plan = scheme_mask(scheme, update_index)
        T = len(plan.mask)
        tau = plan.warmup
        n_sub = bptt.subseq_count
        if bptt.subseq_len != T:
            raise DimensionError(
                f"BPTT subsequence length {bptt.subseq_len} != scheme mask length {T}")
        seg_len = tau + T * n_sub
        if sampler is None or sampler_len != seg_len:
            sampler = SegmentSampler(dataset.episodes, seg_len, rng)
            sampler_len = seg_len

        picks = sampler.next_batch(batch_size)
        raw = np.stack([dataset.episodes[e].frames[o:o + seg_len] for e, o in picks])
        seg = dataset.preprocess(raw).astype(sim.dtype)
        acts = np.stack([dataset.episodes[e].actions[o:o + seg_len - 1]
                         for e, o in picks]).astype(np.int64)

        state = None
        handoff = None
        for k in range(n_sub):
            if update_index > updates:
                break
            plan_k = scheme_mask(scheme, update_index)
            if len(plan_k.mask) != T:
                plan_k = plan  # mask length is fixed within one segment group
            # PI stepping has no observation/prediction choice: always latent
            mask_k = all_latent_mask(T) if sim.variant == VARIANT_PI else plan_k.mask
            if k == 0:
                window_plan = RolloutPlan(tau, mask_k)
                w_frames = seg[:, :tau + T]
                w_actions = acts[:, :tau + T - 1]
                target_lo = tau
                res = rollout(sim, w_frames, w_actions, window_plan, train=True,
                              rng=rng, save_ctx=True)
            else:
                start = tau + k * T  # first masked slot of this window (1-based)
                window_plan = RolloutPlan(1, mask_k)
                w_frames = seg[:, start - 1:start + T]
                w_actions = acts[:, start - 1:start + T - 1]
                target_lo = start
                res = rollout(sim, w_frames, w_actions, window_plan, train=True,
                              rng=rng, save_ctx=True, initial_state=state,
                              handoff_frame=handoff)
            targets = [seg[:, target_lo + i] for i in range(T)]
            loss, d_preds = mse_loss(res.predictions, targets)
            if not np.isfinite(loss):
                raise NumericError(
                    f"non-finite loss {loss} at update {update_index} "
                    f"(scheme {scheme.scheme_id}, window {k + 1}/{n_sub})")

            grads = rollout_backward(sim, res.ctx, d_preds)
            grads_flat = ptree.flatten(grads)
            if grad_clip is not None:
                _clip_grads(grads_flat, grad_clip)
            rmsprop_step(params_flat, grads_flat, opt_state)

            frames_seen += batch_size * T
            rec = TrainLogRecord(update_index, frames_seen, loss,
                                 scheme.scheme_id, opt_state.lr)
            log.append(rec)
            if log_stream is not None:
                log_stream.write(rec.as_json() + "\n")
            if on_update is not None:
                on_update(update_index, sim, opt_state, rec)

            # detached handoff into the next window
            state = res.final_state
            if sim.variant == VARIANT_PI:
                handoff = None
            elif plan_k.mask[-1] is TransitionMode.PREDICTION:
                handoff = res.final_prediction
            else:
                handoff = seg[:, target_lo + T - 1]
            update_index += 1

    return log
