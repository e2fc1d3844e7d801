"""Frame encoder/decoder stacks.

The encoder is a stack of strided convolutions, each followed by a randomized
rectifier, whose output tensor is flattened row-major into the latent vector.
The decoder runs a fully-connected layer (followed by a randomized rectifier)
from the recurrent state to the flattened conv shape, then mirrors the encoder
with transposed convolutions; the final layer is linear so predictions can
take any real value.

Three named profiles are built in:

    atari-full  210x160 RGB, the published 4-layer geometry (shape tests only)
    maze48      48x48 RGB, 3 convolutions, 64 filters of size 6x6
    toy32       32x32 RGB, a 3-layer scaled-down profile for CPU training
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .kernels import (
    ConvGeometry,
    RReluSpec,
    conv_forward,
    conv_backward,
    deconv_forward,
    deconv_backward,
    dense_apply,
    dense_backward,
    rrelu_forward,
    rrelu_backward,
)

RRELU = RReluSpec(1.0 / 8.0, 1.0 / 3.0)


@dataclass(frozen=True)
class CodecProfile:
    name: str
    input_shape: tuple[int, int, int]  # (C, H, W)
    conv_layers: tuple[ConvGeometry, ...]

    @property
    def encoder_spatial_dims(self) -> list[tuple[int, int]]:
        dims = []
        h, w = self.input_shape[1], self.input_shape[2]
        for g in self.conv_layers:
            h, w = g.out_hw(h, w)
            dims.append((h, w))
        return dims

    @property
    def latent_conv_shape(self) -> tuple[int, int, int]:
        h, w = self.encoder_spatial_dims[-1]
        return (self.conv_layers[-1].out_channels, h, w)

    @property
    def z_dim(self) -> int:
        c, h, w = self.latent_conv_shape
        return c * h * w

    @property
    def deconv_layers(self) -> tuple[ConvGeometry, ...]:
        # decoder mirrors the encoder: same kernels/strides/pads, channels swapped
        return tuple(
            ConvGeometry(g.out_channels, g.in_channels, g.kernel_h, g.kernel_w,
                         g.stride, g.pad_h, g.pad_w)
            for g in reversed(self.conv_layers)
        )

    def validate(self) -> None:
        h, w = self.input_shape[1], self.input_shape[2]
        for g in self.conv_layers:
            if not g.mirrors(h, w):
                raise DimensionError(
                    f"profile {self.name}: layer {g} does not mirror exactly at {h}x{w}")
            h, w = g.out_hw(h, w)


_PROFILES: dict[str, CodecProfile] = {
    "atari-full": CodecProfile(
        name="atari-full",
        input_shape=(3, 210, 160),
        conv_layers=(
            ConvGeometry(3, 64, 8, 8, 2, 0, 1),
            ConvGeometry(64, 32, 6, 6, 2, 1, 1),
            ConvGeometry(32, 32, 6, 6, 2, 1, 1),
            ConvGeometry(32, 32, 4, 4, 2, 0, 0),
        ),
    ),
    "maze48": CodecProfile(
        name="maze48",
        input_shape=(3, 48, 48),
        conv_layers=(
            ConvGeometry(3, 64, 6, 6, 2, 0, 0),
            ConvGeometry(64, 64, 6, 6, 2, 1, 1),
            ConvGeometry(64, 64, 6, 6, 2, 2, 2),
        ),
    ),
    # kernels 6/5/5 rather than 6/4/4 so every layer mirrors exactly
    "toy32": CodecProfile(
        name="toy32",
        input_shape=(3, 32, 32),
        conv_layers=(
            ConvGeometry(3, 32, 6, 6, 2, 1, 1),
            ConvGeometry(32, 32, 5, 5, 2, 1, 1),
            ConvGeometry(32, 32, 5, 5, 2, 0, 0),
        ),
    ),
}

# recurrent sizing per profile: hidden and fused-action dims keep the 1:2 ratio
PROFILE_DIMS: dict[str, tuple[int, int]] = {
    "atari-full": (1024, 2048),
    "maze48": (512, 1024),
    "toy32": (256, 512),
}


def profile_names() -> list[str]:
    return sorted(_PROFILES)


def build_profile(name: str) -> CodecProfile:
    try:
        profile = _PROFILES[name]
    except KeyError:
        raise DimensionError(
            f"unknown codec profile {name!r}; available: {profile_names()}") from None
    profile.validate()
    return profile


@dataclass
class CodecParams:
    enc_w: list[np.ndarray]
    enc_b: list[np.ndarray]
    dec_dense_w: np.ndarray
    dec_dense_b: np.ndarray
    dec_w: list[np.ndarray]
    dec_b: list[np.ndarray]


def _uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def init_codec_params(profile: CodecProfile, h_dim: int,
                      rng: np.random.Generator, dtype=np.float32) -> CodecParams:
    """Uniform +-1/sqrt(fan_in) weights, zero biases."""
    enc_w, enc_b = [], []
    for g in profile.conv_layers:
        fan = g.in_channels * g.kernel_h * g.kernel_w
        enc_w.append(_uniform(rng, (g.out_channels, g.in_channels, g.kernel_h, g.kernel_w), fan, dtype))
        enc_b.append(np.zeros(g.out_channels, dtype=dtype))
    dec_w, dec_b = [], []
    for g in profile.deconv_layers:
        fan = g.in_channels * g.kernel_h * g.kernel_w
        dec_w.append(_uniform(rng, (g.in_channels, g.out_channels, g.kernel_h, g.kernel_w), fan, dtype))
        dec_b.append(np.zeros(g.out_channels, dtype=dtype))
    return CodecParams(
        enc_w=enc_w,
        enc_b=enc_b,
        dec_dense_w=_uniform(rng, (profile.z_dim, h_dim), h_dim, dtype),
        dec_dense_b=np.zeros(profile.z_dim, dtype=dtype),
        dec_w=dec_w,
        dec_b=dec_b,
    )


@dataclass
class CodecStats:
    """Call-count instrumentation for the latent-rollout efficiency accounting."""
    encode_calls: int = 0
    decode_calls: int = 0

    def reset(self) -> None:
        self.encode_calls = 0
        self.decode_calls = 0


def encode(frame: np.ndarray, params: CodecParams, profile: CodecProfile, *,
           train: bool = False, rng: np.random.Generator | None = None,
           stats: CodecStats | None = None, save_ctx: bool = True):
    """Conv stack with a randomized rectifier after every layer, then flatten.

    Returns (z, ctx); ctx is None when save_ctx is False.
    """
    squeeze = frame.ndim == 3
    x = frame[None] if squeeze else frame
    if x.shape[1:] != profile.input_shape:
        raise DimensionError(
            f"frame shape {x.shape[1:]} != profile input {profile.input_shape}")
    if stats is not None:
        stats.encode_calls += 1

    layers = []
    for g, w, b in zip(profile.conv_layers, params.enc_w, params.enc_b):
        y, cols = conv_forward(x, w, b, g, return_cols=True)
        act, slopes = rrelu_forward(y, RRELU, train, rng)
        layers.append((x, cols, slopes) if save_ctx else None)
        x = act
    z = x.reshape(x.shape[0], -1)
    ctx = (layers, x.shape) if save_ctx else None
    if squeeze:
        z = z[0]
    return z, ctx


def encode_backward(dz: np.ndarray, ctx, params: CodecParams,
                    profile: CodecProfile, grads: CodecParams) -> np.ndarray:
    """Accumulates encoder gradients into `grads`; returns d(frame)."""
    layers, final_shape = ctx
    squeeze = dz.ndim == 1
    dx = (dz[None] if squeeze else dz).reshape(final_shape)
    for i in range(len(layers) - 1, -1, -1):
        x_in, cols, slopes = layers[i]
        dy = rrelu_backward(dx, slopes)
        dx, dw, db = conv_backward(dy, x_in, params.enc_w[i], profile.conv_layers[i], cols=cols)
        grads.enc_w[i] += dw
        grads.enc_b[i] += db
    return dx[0] if squeeze else dx


def decode(state_h: np.ndarray, params: CodecParams, profile: CodecProfile, *,
           train: bool = False, rng: np.random.Generator | None = None,
           stats: CodecStats | None = None, save_ctx: bool = True):
    """Dense layer to the flattened conv shape, then the mirrored deconv stack.

    Returns (frame prediction, ctx).
    """
    squeeze = state_h.ndim == 1
    h = state_h[None] if squeeze else state_h
    if h.shape[1] != params.dec_dense_w.shape[1]:
        raise DimensionError(
            f"state dim {h.shape[1]} != decoder dense input {params.dec_dense_w.shape[1]}")
    if stats is not None:
        stats.decode_calls += 1

    pre = dense_apply(h, params.dec_dense_w, params.dec_dense_b)
    act, dense_slopes = rrelu_forward(pre, RRELU, train, rng)
    x = act.reshape((h.shape[0],) + profile.latent_conv_shape)

    n_layers = len(profile.deconv_layers)
    layers = []
    for i, (g, w, b) in enumerate(zip(profile.deconv_layers, params.dec_w, params.dec_b)):
        y = deconv_forward(x, w, b, g)
        if i < n_layers - 1:
            out, slopes = rrelu_forward(y, RRELU, train, rng)
        else:
            out, slopes = y, None  # final layer stays linear
        layers.append((x, slopes) if save_ctx else None)
        x = out
    ctx = (h, dense_slopes, layers) if save_ctx else None
    if squeeze:
        x = x[0]
    return x, ctx


def decode_backward(dframe: np.ndarray, ctx, params: CodecParams,
                    profile: CodecProfile, grads: CodecParams) -> np.ndarray:
    """Accumulates decoder gradients into `grads`; returns d(state_h)."""
    h, dense_slopes, layers = ctx
    squeeze = dframe.ndim == 3
    dx = dframe[None] if squeeze else dframe
    for i in range(len(layers) - 1, -1, -1):
        x_in, slopes = layers[i]
        dy = dx if slopes is None else rrelu_backward(dx, slopes)
        dx, dw, db = deconv_backward(dy, x_in, params.dec_w[i], profile.deconv_layers[i])
        grads.dec_w[i] += dw
        grads.dec_b[i] += db
    d_act = dx.reshape(dx.shape[0], -1)
    d_pre = rrelu_backward(d_act, dense_slopes)
    dh, dw, db = dense_backward(d_pre, h, params.dec_dense_w)
    grads.dec_dense_w += dw
    grads.dec_dense_b += db
    return dh[0] if squeeze else dh


def codec_zero_grads(params: CodecParams) -> CodecParams:
    return CodecParams(
        enc_w=[np.zeros_like(a) for a in params.enc_w],
        enc_b=[np.zeros_like(a) for a in params.enc_b],
        dec_dense_w=np.zeros_like(params.dec_dense_w),
        dec_dense_b=np.zeros_like(params.dec_dense_b),
        dec_w=[np.zeros_like(a) for a in params.dec_w],
        dec_b=[np.zeros_like(a) for a in params.dec_b],
    )


def conv_stack_macs(profile: CodecProfile) -> dict[str, int]:
    """Exact multiply-accumulate counts for one encode and one decode."""
    enc = 0
    h, w = profile.input_shape[1], profile.input_shape[2]
    for g in profile.conv_layers:
        oh, ow = g.out_hw(h, w)
        enc += g.out_channels * oh * ow * g.in_channels * g.kernel_h * g.kernel_w
        h, w = oh, ow
    dec = 0
    for g in profile.deconv_layers:
        # a transposed conv does exactly the MACs of the conv it transposes
        oh, ow = g.deconv_out_hw(h, w)
        dec += g.in_channels * h * w * g.out_channels * g.kernel_h * g.kernel_w
        h, w = oh, ow
    return {"encode": enc, "decode": dec}


def projection_flops(profile: CodecProfile, h_dim: int) -> float:
    """Flops per avoided encode+decode pair, estimated as a dense projection
    between the state space and the observation space, once in each direction."""
    c, h, w = profile.input_shape
    return 2.0 * h_dim * (c * h * w)
