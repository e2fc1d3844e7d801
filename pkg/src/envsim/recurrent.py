"""Action-conditioned LSTM state transition and sequence rollout.

One simulator step computes, from the previous state (h, c), the action taken,
and a frame-derived (or latent) input vector z:

    fused   v = (W_state h) * (W_action a)          elementwise, a one-hot
    gates   i, f, o = sigmoid(W_gates_v v + W_gates_z z + b)
    cell    c' = f * c + i * tanh(W_cell_v v + W_cell_z z + b)
    state   h' = o * tanh(c')

The z input is routed by transition mode: Observation encodes the ground-truth
previous frame, Prediction encodes the simulator's own previous output, and
Latent (prediction-independent variant only) passes h through untouched, never
invoking the codec.

Rollout layout over a segment x_1..x_{tau+T}, actions a_1..a_{tau+T-1}
(1-based, as stored 0-based in arrays): transition slot j consumes a_j and the
frame input for slot j; slots 1..tau-1 are warm-up (always Observation); slots
tau..tau+T-1 are governed by the plan's length-T mask; predictions are decoded
from the states produced by the masked slots and align with targets
x_{tau+1}..x_{tau+T}.  When the first masked slot runs in Prediction mode its
input is the decode of the warm-up end state (or a detached handed-off frame
for truncated-BPTT continuation windows).

Gradient stopping: the prediction-dependent variant never backpropagates into
warm-up slots.  The prediction-independent variant backpropagates through
warm-up slots with index > 5 so the encoder keeps learning, and uses separate
transition parameters for the warm-up (encoding) and prediction (latent)
phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .codec import (
    CodecParams,
    CodecProfile,
    CodecStats,
    codec_zero_grads,
    decode,
    decode_backward,
    encode,
    encode_backward,
    init_codec_params,
)
from .errors import DimensionError, NumericError

VARIANT_PD = "pd"  # prediction-dependent: steps on encoded frames
VARIANT_PI = "pi"  # prediction-independent: steps in latent space
PI_WARMUP_GRAD_SLOT = 5  # gradient flows through warm-up slots strictly beyond this


class TransitionMode(Enum):
    OBSERVATION = "observation"
    PREDICTION = "prediction"
    LATENT = "latent"


@dataclass
class SimState:
    h: np.ndarray
    c: np.ndarray

    def copy(self) -> "SimState":
        return SimState(self.h.copy(), self.c.copy())


def zero_state(batch: int, h_dim: int, dtype=np.float32) -> SimState:
    return SimState(np.zeros((batch, h_dim), dtype=dtype),
                    np.zeros((batch, h_dim), dtype=dtype))


@dataclass
class TransitionParams:
    """Gate matrices are stored row-fused in blocks [input, forget, output,
    candidate] so a step costs two GEMMs; per-gate views are exposed below."""
    w_fuse_state: np.ndarray   # (v_dim, h_dim)
    w_fuse_action: np.ndarray  # (v_dim, n_actions)
    w_gates_v: np.ndarray      # (4*h_dim, v_dim)
    w_gates_z: np.ndarray      # (4*h_dim, z_dim)
    b_gates: np.ndarray        # (4*h_dim,)

    @property
    def h_dim(self) -> int:
        return self.w_gates_v.shape[0] // 4

    @property
    def v_dim(self) -> int:
        return self.w_gates_v.shape[1]

    @property
    def z_dim(self) -> int:
        return self.w_gates_z.shape[1]

    @property
    def n_actions(self) -> int:
        return self.w_fuse_action.shape[1]

    def gate_view(self, which: str, side: str) -> np.ndarray:
        """Row block of the fused gate matrix: which in i|f|o|c, side in v|z|b."""
        idx = "ifoc".index(which)
        h = self.h_dim
        src = {"v": self.w_gates_v, "z": self.w_gates_z, "b": self.b_gates}[side]
        return src[idx * h:(idx + 1) * h]


def init_transition_params(h_dim: int, v_dim: int, z_dim: int, n_actions: int,
                           rng: np.random.Generator, dtype=np.float32,
                           forget_bias: float = 0.0) -> TransitionParams:
    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape).astype(dtype)

    b = np.zeros(4 * h_dim, dtype=dtype)
    b[h_dim:2 * h_dim] = forget_bias
    return TransitionParams(
        w_fuse_state=uniform((v_dim, h_dim), h_dim),
        w_fuse_action=uniform((v_dim, n_actions), n_actions),
        w_gates_v=uniform((4 * h_dim, v_dim), v_dim),
        w_gates_z=uniform((4 * h_dim, z_dim), z_dim),
        b_gates=b,
    )


def transition_zero_grads(p: TransitionParams) -> TransitionParams:
    return TransitionParams(*(np.zeros_like(a) for a in
                              (p.w_fuse_state, p.w_fuse_action, p.w_gates_v,
                               p.w_gates_z, p.b_gates)))


@dataclass
class StepActivations:
    """Everything a single transition must retain for its backward pass."""
    z: np.ndarray
    v: np.ndarray
    gates: np.ndarray        # (B, 4h): sigmoid i|f|o then tanh candidate
    c: np.ndarray
    h: np.ndarray
    tanh_c: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    fused_state: np.ndarray  # W_state @ h_prev
    fused_action: np.ndarray  # gathered W_action columns
    actions: np.ndarray      # (B,) int ids

    def _block(self, i: int) -> np.ndarray:
        h = self.h.shape[-1]
        return self.gates[..., i * h:(i + 1) * h]

    @property
    def in_gate(self) -> np.ndarray:
        return self._block(0)

    @property
    def forget_gate(self) -> np.ndarray:
        return self._block(1)

    @property
    def out_gate(self) -> np.ndarray:
        return self._block(2)

    @property
    def candidate(self) -> np.ndarray:
        return self._block(3)


def fuse_action(h_prev: np.ndarray, action, params: TransitionParams
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """v = (W_state h_prev) * (W_action a); returns (v, both factors).

    `action` is either an int array of ids (column gather) or an explicit
    one-hot float vector/matrix.
    """
    squeeze = h_prev.ndim == 1
    h2 = h_prev[None] if squeeze else h_prev
    if h2.shape[-1] != params.w_fuse_state.shape[1]:
        raise DimensionError(
            f"state dim {h2.shape[-1]} != fuse matrix input {params.w_fuse_state.shape[1]}")
    fused_state = h2 @ params.w_fuse_state.T
    action = np.asarray(action)
    if np.issubdtype(action.dtype, np.integer):
        ids = action.reshape(-1)
        if ids.max(initial=0) >= params.n_actions or ids.min(initial=0) < 0:
            raise DimensionError(f"action id out of range 0..{params.n_actions - 1}")
        fused_action = params.w_fuse_action[:, ids].T  # (B, v_dim)
    else:
        onehot = action[None] if action.ndim == 1 else action
        if onehot.shape[-1] != params.n_actions:
            raise DimensionError(
                f"one-hot length {onehot.shape[-1]} != n_actions {params.n_actions}")
        fused_action = onehot @ params.w_fuse_action.T
    v = fused_state * fused_action
    if squeeze:
        return v[0], fused_state[0], fused_action[0]
    return v, fused_state, fused_action


def lstm_step(state: SimState, v: np.ndarray, z: np.ndarray,
              params: TransitionParams, actions: np.ndarray | None = None,
              fused_state: np.ndarray | None = None,
              fused_action: np.ndarray | None = None
              ) -> tuple[SimState, StepActivations]:
    squeeze = v.ndim == 1
    if squeeze:
        v, z = v[None], z[None]
        state = SimState(state.h[None] if state.h.ndim == 1 else state.h,
                         state.c[None] if state.c.ndim == 1 else state.c)
    if z.shape[-1] != params.z_dim:
        raise DimensionError(f"z dim {z.shape[-1]} != expected {params.z_dim}")
    h_dim = params.h_dim

    pre = v @ params.w_gates_v.T + z @ params.w_gates_z.T + params.b_gates
    gates = np.empty_like(pre)
    # stable sigmoid over the three gate blocks, tanh over the candidate block
    g = pre[:, :3 * h_dim]
    pos = g >= 0
    gates[:, :3 * h_dim][pos] = 1.0 / (1.0 + np.exp(-g[pos]))
    eg = np.exp(g[~pos])
    gates[:, :3 * h_dim][~pos] = eg / (1.0 + eg)
    gates[:, 3 * h_dim:] = np.tanh(pre[:, 3 * h_dim:])

    i = gates[:, 0:h_dim]
    f = gates[:, h_dim:2 * h_dim]
    o = gates[:, 2 * h_dim:3 * h_dim]
    cand = gates[:, 3 * h_dim:]
    c = f * state.c + i * cand
    tanh_c = np.tanh(c)
    h = o * tanh_c
    if not np.isfinite(h).all() or not np.isfinite(c).all():
        raise NumericError("non-finite state after lstm step")

    acts = StepActivations(
        z=z, v=v, gates=gates, c=c, h=h, tanh_c=tanh_c,
        h_prev=state.h, c_prev=state.c,
        fused_state=fused_state if fused_state is not None else np.array([]),
        fused_action=fused_action if fused_action is not None else np.array([]),
        actions=actions if actions is not None else np.array([], dtype=np.int64),
    )
    new_state = SimState(h, c)
    if squeeze:
        new_state = SimState(h[0], c[0])
    return new_state, acts


def lstm_step_backward(d_h: np.ndarray, d_c: np.ndarray, acts: StepActivations,
                       params: TransitionParams, grads: TransitionParams
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accumulates gate/cell grads; returns (d_v, d_z, d_c_prev)."""
    h_dim = params.h_dim
    i, f, o, cand = (acts.gates[:, k * h_dim:(k + 1) * h_dim] for k in range(4))
    d_o = d_h * acts.tanh_c
    d_c_total = d_c + d_h * o * (1.0 - acts.tanh_c ** 2)
    d_i = d_c_total * cand
    d_f = d_c_total * acts.c_prev
    d_cand = d_c_total * i
    d_c_prev = d_c_total * f

    d_pre = np.empty_like(acts.gates)
    d_pre[:, 0:h_dim] = d_i * i * (1.0 - i)
    d_pre[:, h_dim:2 * h_dim] = d_f * f * (1.0 - f)
    d_pre[:, 2 * h_dim:3 * h_dim] = d_o * o * (1.0 - o)
    d_pre[:, 3 * h_dim:] = d_cand * (1.0 - cand ** 2)

    grads.w_gates_v += d_pre.T @ acts.v
    grads.w_gates_z += d_pre.T @ acts.z
    grads.b_gates += d_pre.sum(axis=0)
    d_v = d_pre @ params.w_gates_v
    d_z = d_pre @ params.w_gates_z
    return d_v, d_z, d_c_prev


def fuse_action_backward(d_v: np.ndarray, acts: StepActivations,
                         params: TransitionParams, grads: TransitionParams
                         ) -> np.ndarray:
    """Accumulates fuse-matrix grads; returns d_h_prev."""
    d_fused_state = d_v * acts.fused_action
    d_fused_action = d_v * acts.fused_state
    grads.w_fuse_state += d_fused_state.T @ acts.h_prev
    np.add.at(grads.w_fuse_action.T, acts.actions, d_fused_action)
    return d_fused_state @ params.w_fuse_state


@dataclass
class Simulator:
    """The full parameter set plus the metadata needed to rebuild it."""
    profile: CodecProfile
    variant: str
    n_actions: int
    h_dim: int
    v_dim: int
    codec: CodecParams
    trans: TransitionParams                  # prediction-phase (and PD everything)
    trans_warm: TransitionParams | None      # PI warm-up phase

    @property
    def dtype(self):
        return self.trans.w_gates_v.dtype


def init_simulator(profile: CodecProfile, n_actions: int, variant: str,
                   rng: np.random.Generator, *, h_dim: int, v_dim: int,
                   dtype=np.float32, forget_bias: float = 0.0) -> Simulator:
    if variant not in (VARIANT_PD, VARIANT_PI):
        raise DimensionError(f"unknown variant {variant!r}")
    codec = init_codec_params(profile, h_dim, rng, dtype)
    if variant == VARIANT_PD:
        trans = init_transition_params(h_dim, v_dim, profile.z_dim, n_actions,
                                       rng, dtype, forget_bias)
        trans_warm = None
    else:
        # prediction phase steps on z = h, warm-up phase on encoded frames
        trans = init_transition_params(h_dim, v_dim, h_dim, n_actions,
                                       rng, dtype, forget_bias)
        trans_warm = init_transition_params(h_dim, v_dim, profile.z_dim, n_actions,
                                            rng, dtype, forget_bias)
    return Simulator(profile=profile, variant=variant, n_actions=n_actions,
                     h_dim=h_dim, v_dim=v_dim, codec=codec, trans=trans,
                     trans_warm=trans_warm)


@dataclass
class SimGrads:
    codec: CodecParams
    trans: TransitionParams
    trans_warm: TransitionParams | None


def sim_zero_grads(sim: Simulator) -> SimGrads:
    return SimGrads(
        codec=codec_zero_grads(sim.codec),
        trans=transition_zero_grads(sim.trans),
        trans_warm=None if sim.trans_warm is None else transition_zero_grads(sim.trans_warm),
    )


def select_input(mode: TransitionMode, *, real_frame=None, predicted_frame=None,
                 h_prev=None, codec_params: CodecParams | None = None,
                 profile: CodecProfile | None = None, train: bool = False,
                 rng=None, stats: CodecStats | None = None, save_ctx: bool = False):
    """Route the transition's z input per mode.  Returns (z, encode_ctx)."""
    if mode is TransitionMode.LATENT:
        if h_prev is None:
            raise DimensionError("latent transition requires the previous state")
        return h_prev, None
    frame = real_frame if mode is TransitionMode.OBSERVATION else predicted_frame
    if frame is None:
        raise DimensionError(f"{mode.value} transition requires its frame input")
    return encode(frame, codec_params, profile, train=train, rng=rng,
                  stats=stats, save_ctx=save_ctx)


@dataclass(frozen=True)
class RolloutPlan:
    warmup: int
    mask: tuple[TransitionMode, ...]

    def __post_init__(self):
        if self.warmup < 1:
            raise DimensionError(f"warm-up length must be >= 1, got {self.warmup}")
        if not self.mask:
            raise DimensionError("empty transition mask")


@dataclass
class _StepCtx:
    mode: TransitionMode
    acts: StepActivations
    enc_ctx: object | None
    dec_ctx: object | None
    input_is_live_pred: bool


@dataclass
class _WarmCtx:
    slot: int  # 1-based transition slot index
    acts: StepActivations
    enc_ctx: object | None


@dataclass
class RolloutCtx:
    variant: str
    plan: RolloutPlan
    warm_steps: list
    boundary_dec_ctx: object | None
    steps: list


@dataclass
class RolloutResult:
    predictions: list            # length T; None where not decoded
    final_state: SimState
    final_prediction: np.ndarray | None
    ctx: RolloutCtx | None


def _as_batched_frames(frames: np.ndarray) -> np.ndarray:
    if frames.ndim == 4:
        return frames[None]
    if frames.ndim != 5:
        raise DimensionError(f"frames must be (B, N, C, H, W), got {frames.shape}")
    return frames


def run_warmup(sim: Simulator, frames: np.ndarray, actions: np.ndarray, *,
               initial_state: SimState | None = None, train: bool = False,
               rng=None, stats: CodecStats | None = None, save_ctx: bool = False,
               slot_offset: int = 1) -> tuple[SimState, list]:
    """Advance the state over Observation transitions, one per frame/action.

    frames (B, K, C, H, W) and actions (B, K) drive K transitions; contexts
    are only retained for the PI variant (PD never backpropagates into them).
    """
    frames = _as_batched_frames(frames)
    actions = np.asarray(actions)
    if actions.ndim == 1:
        actions = actions[None]
    batch, k = actions.shape
    if frames.shape[:2] != (batch, k):
        raise DimensionError(
            f"warm-up frames {frames.shape[:2]} do not match actions {(batch, k)}")
    state = initial_state if initial_state is not None else \
        zero_state(batch, sim.h_dim, sim.dtype)
    if state.h.ndim == 1:
        state = SimState(state.h[None], state.c[None])
    params = sim.trans_warm if sim.variant == VARIANT_PI else sim.trans
    keep = save_ctx and sim.variant == VARIANT_PI
    ctxs: list[_WarmCtx] = []
    for j in range(k):
        z, enc_ctx = encode(frames[:, j], sim.codec, sim.profile, train=train,
                            rng=rng, stats=stats, save_ctx=keep)
        acts_in = actions[:, j]
        v, fs, fa = fuse_action(state.h, acts_in, params)
        state, acts = lstm_step(state, v, z, params, acts_in, fs, fa)
        if keep:
            ctxs.append(_WarmCtx(slot=slot_offset + j, acts=acts, enc_ctx=enc_ctx))
    return state, ctxs


def rollout(sim: Simulator, frames: np.ndarray, actions: np.ndarray,
            plan: RolloutPlan, *, initial_state: SimState | None = None,
            handoff_frame: np.ndarray | None = None, train: bool = False,
            rng=None, stats: CodecStats | None = None, save_ctx: bool = False,
            decode_steps=None) -> RolloutResult:
    """Run warm-up plus the masked prediction window.

    frames:  (B, F, C, H, W) preprocessed reals; slot j (1-based) consumes
             frames[:, j-1] when it runs in Observation mode, so F must cover
             the last Observation slot; pure-Prediction/Latent windows only
             need the warm-up prefix.
    actions: (B, warmup-1+T) int ids, one per transition slot.
    decode_steps: masked step indices (0-based) whose predictions are wanted;
             None means all.  Steps feeding a Prediction transition are
             decoded regardless.
    """
    frames = _as_batched_frames(frames)
    batch = frames.shape[0]
    tau, mask = plan.warmup, plan.mask
    steps_total = tau - 1 + len(mask)
    actions = np.asarray(actions)
    if actions.ndim == 1:
        actions = actions[None]
    if actions.shape != (batch, steps_total):
        raise DimensionError(
            f"actions shape {actions.shape} != {(batch, steps_total)} "
            f"(warm-up {tau} with {len(mask)} masked steps)")
    if sim.variant == VARIANT_PD:
        if any(m is TransitionMode.LATENT for m in mask):
            raise DimensionError("latent transitions are invalid for the PD variant")
    else:
        if any(m is not TransitionMode.LATENT for m in mask):
            raise DimensionError("PI rollouts use latent transitions for every masked step")

    if frames.shape[1] < tau - 1:
        raise DimensionError(
            f"warm-up needs {tau - 1} frames (slots 1..{tau - 1}), have {frames.shape[1]}")
    # slots 1..tau-1 consume x_1..x_{tau-1}
    state, warm_steps = run_warmup(
        sim, frames[:, :tau - 1], actions[:, :tau - 1], initial_state=initial_state,
        train=train, rng=rng, stats=stats, save_ctx=save_ctx, slot_offset=1)

    T = len(mask)
    boundary_dec_ctx = None
    prev_prediction = None
    prev_was_live = False
    if mask[0] is TransitionMode.PREDICTION:
        if handoff_frame is not None:
            prev_prediction = handoff_frame if handoff_frame.ndim == 4 else handoff_frame[None]
            prev_was_live = False
        else:
            prev_prediction, boundary_dec_ctx = decode(
                state.h, sim.codec, sim.profile, train=train, rng=rng,
                stats=stats, save_ctx=save_ctx)
            prev_was_live = True

    predictions: list = [None] * T
    step_ctxs: list[_StepCtx] = []
    final_prediction = None
    for i, mode in enumerate(mask):
        slot = tau + i
        if mode is TransitionMode.OBSERVATION:
            if frames.shape[1] < slot:
                raise DimensionError(
                    f"observation slot {slot} needs frame {slot}, have {frames.shape[1]}")
            z, enc_ctx = select_input(mode, real_frame=frames[:, slot - 1],
                                      codec_params=sim.codec, profile=sim.profile,
                                      train=train, rng=rng, stats=stats,
                                      save_ctx=save_ctx)
            live_input = False
        elif mode is TransitionMode.PREDICTION:
            if prev_prediction is None:
                raise DimensionError("prediction transition without a previous prediction")
            z, enc_ctx = select_input(mode, predicted_frame=prev_prediction,
                                      codec_params=sim.codec, profile=sim.profile,
                                      train=train, rng=rng, stats=stats,
                                      save_ctx=save_ctx)
            live_input = prev_was_live
        else:
            z, enc_ctx = select_input(mode, h_prev=state.h)
            live_input = False

        acts_in = actions[:, slot - 1]
        v, fs, fa = fuse_action(state.h, acts_in, sim.trans)
        state, acts = lstm_step(state, v, z, sim.trans, acts_in, fs, fa)

        want = decode_steps is None or i in decode_steps
        feeds_next = i + 1 < T and mask[i + 1] is TransitionMode.PREDICTION
        dec_ctx = None
        if want or feeds_next:
            pred, dec_ctx = decode(state.h, sim.codec, sim.profile, train=train,
                                   rng=rng, stats=stats, save_ctx=save_ctx)
            prev_prediction = pred
            prev_was_live = True
            if want:
                predictions[i] = pred
            final_prediction = pred
        if save_ctx:
            step_ctxs.append(_StepCtx(mode=mode, acts=acts, enc_ctx=enc_ctx,
                                      dec_ctx=dec_ctx, input_is_live_pred=live_input))

    ctx = RolloutCtx(variant=sim.variant, plan=plan, warm_steps=warm_steps,
                     boundary_dec_ctx=boundary_dec_ctx, steps=step_ctxs) if save_ctx else None
    return RolloutResult(predictions=predictions, final_state=state,
                         final_prediction=final_prediction, ctx=ctx)


def rollout_backward(sim: Simulator, ctx: RolloutCtx, d_predictions: list
                     ) -> SimGrads:
    """Exact truncated BPTT through a saved rollout.

    d_predictions aligns with RolloutResult.predictions (None where no loss).
    Gradients never flow out through the initial state or a handed-off frame.
    """
    if ctx is None:
        raise DimensionError("rollout was run without save_ctx")
    grads = sim_zero_grads(sim)
    steps = ctx.steps
    T = len(steps)
    if len(d_predictions) != T:
        raise DimensionError(f"expected {T} upstream slots, got {len(d_predictions)}")

    batch = steps[-1].acts.h.shape[0]
    d_h = np.zeros((batch, sim.h_dim), dtype=sim.dtype)
    d_c = np.zeros_like(d_h)
    d_pred_pending = None  # flows into the decode whose output fed the later step

    for i in range(T - 1, -1, -1):
        s = steps[i]
        d_out = d_predictions[i]
        if d_pred_pending is not None:
            d_out = d_pred_pending if d_out is None else d_out + d_pred_pending
            d_pred_pending = None
        if d_out is not None:
            if s.dec_ctx is None:
                raise DimensionError(f"step {i} received upstream but was not decoded")
            d_h = d_h + decode_backward(d_out, s.dec_ctx, sim.codec, sim.profile,
                                        grads.codec)

        d_v, d_z, d_c_prev = lstm_step_backward(d_h, d_c, s.acts, sim.trans, grads.trans)
        d_h_prev = fuse_action_backward(d_v, s.acts, sim.trans, grads.trans)
        if s.mode is TransitionMode.LATENT:
            d_h_prev = d_h_prev + d_z
        else:
            d_frame = encode_backward(d_z, s.enc_ctx, sim.codec, sim.profile,
                                      grads.codec)
            if s.input_is_live_pred:
                d_pred_pending = d_frame  # chains into the previous decode
        d_h, d_c = d_h_prev, d_c_prev

    if d_pred_pending is not None:
        if ctx.boundary_dec_ctx is None:
            raise DimensionError("live boundary prediction without its decode context")
        d_h_boundary = decode_backward(d_pred_pending, ctx.boundary_dec_ctx,
                                       sim.codec, sim.profile, grads.codec)
        d_h = d_h + d_h_boundary

    if ctx.variant == VARIANT_PI and ctx.warm_steps:
        # PD stops at the warm-up boundary; PI flows into slots > 5
        for w in reversed(ctx.warm_steps):
            if w.slot <= PI_WARMUP_GRAD_SLOT:
                break
            d_v, d_z, d_c_prev = lstm_step_backward(d_h, d_c, w.acts,
                                                    sim.trans_warm, grads.trans_warm)
            d_h_prev = fuse_action_backward(d_v, w.acts, sim.trans_warm,
                                            grads.trans_warm)
            encode_backward(d_z, w.enc_ctx, sim.codec, sim.profile, grads.codec)
            d_h, d_c = d_h_prev, d_c_prev

    return grads


def all_observation_mask(T: int) -> tuple[TransitionMode, ...]:
    return (TransitionMode.OBSERVATION,) * T


def all_prediction_mask(T: int) -> tuple[TransitionMode, ...]:
    return (TransitionMode.PREDICTION,) * T


def all_latent_mask(T: int) -> tuple[TransitionMode, ...]:
    return (TransitionMode.LATENT,) * T
