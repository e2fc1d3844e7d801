"""2-D convolution and transposed convolution with exact reverse-mode gradients.

Convolution here is cross-correlation (no kernel flip), zero padding, square
stride.  The transposed convolution is implemented as the exact adjoint of the
convolution with the same geometry: forward transposed conv is computed in
gather form (zero-dilate, border-pad, correlate with the flipped kernel), so
every path below is an im2col + GEMM and never a scatter.

Array layouts:
    conv weights     (out_channels, in_channels, kh, kw)
    deconv weights   (in_channels, out_channels, kh, kw)
    activations      (batch, channels, h, w) or unbatched (channels, h, w)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, NumericError


@dataclass(frozen=True)
class ConvGeometry:
    in_channels: int
    out_channels: int
    kernel_h: int
    kernel_w: int
    stride: int
    pad_h: int
    pad_w: int

    def __post_init__(self):
        if self.stride < 1:
            raise DimensionError(f"stride must be >= 1, got {self.stride}")
        if min(self.in_channels, self.out_channels, self.kernel_h, self.kernel_w) < 1:
            raise DimensionError(f"degenerate geometry: {self}")
        if min(self.pad_h, self.pad_w) < 0:
            raise DimensionError(f"negative padding: {self}")

    def out_hw(self, h: int, w: int) -> tuple[int, int]:
        oh = (h + 2 * self.pad_h - self.kernel_h) // self.stride + 1
        ow = (w + 2 * self.pad_w - self.kernel_w) // self.stride + 1
        if oh < 1 or ow < 1:
            raise DimensionError(f"conv output {oh}x{ow} < 1 for input {h}x{w} with {self}")
        return oh, ow

    def deconv_out_hw(self, h: int, w: int) -> tuple[int, int]:
        oh = (h - 1) * self.stride - 2 * self.pad_h + self.kernel_h
        ow = (w - 1) * self.stride - 2 * self.pad_w + self.kernel_w
        if oh < 1 or ow < 1:
            raise DimensionError(f"deconv output {oh}x{ow} < 1 for input {h}x{w} with {self}")
        return oh, ow

    def mirrors(self, h: int, w: int) -> bool:
        """True if deconv(conv(h, w)) == (h, w), the inverse-symmetric property."""
        return self.deconv_out_hw(*self.out_hw(h, w)) == (h, w)


def _promote(x: np.ndarray) -> tuple[np.ndarray, bool]:
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise DimensionError(f"expected 3- or 4-d activation tensor, got shape {x.shape}")


def _check_finite(name: str, x: np.ndarray) -> None:
    if not np.isfinite(x).all():
        raise NumericError(f"non-finite values in {name}")


def _pad_hw(x: np.ndarray, ph: int, pw: int) -> np.ndarray:
    if ph == 0 and pw == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, oh: int, ow: int) -> np.ndarray:
    """(B, C, Hp, Wp) -> (C*kh*kw, B*oh*ow) patch matrix.

    Built with kh*kw strided slice copies; per-element gathers (e.g. reshaping
    an as_strided window view) are an order of magnitude slower.
    """
    b, c, _, _ = xp.shape
    cols = np.empty((c, kh, kw, b, oh, ow), dtype=xp.dtype)
    src = xp.transpose(1, 0, 2, 3)
    for i in range(kh):
        for j in range(kw):
            cols[:, i, j] = src[:, :, i:i + oh * stride:stride, j:j + ow * stride:stride]
    return cols.reshape(c * kh * kw, b * oh * ow)


def _dilate(x: np.ndarray, stride: int) -> np.ndarray:
    if stride == 1:
        return x
    b, c, h, w = x.shape
    out = np.zeros((b, c, (h - 1) * stride + 1, (w - 1) * stride + 1), dtype=x.dtype)
    out[:, :, ::stride, ::stride] = x
    return out


def _pad_or_crop(x: np.ndarray, ph: int, pw: int) -> np.ndarray:
    """Pad spatially by (ph, pw); negative amounts crop instead."""
    if ph < 0:
        x = x[:, :, -ph : x.shape[2] + ph, :]
        ph = 0
    if pw < 0:
        x = x[:, :, :, -pw : x.shape[3] + pw]
        pw = 0
    return _pad_hw(x, ph, pw)


def _correlate(x: np.ndarray, w_mat: np.ndarray, kh: int, kw: int, stride: int,
               ph: int, pw: int, oh: int, ow: int) -> tuple[np.ndarray, np.ndarray]:
    """Shared GEMM core: returns (output (B, OC, oh, ow), patch matrix).

    w_mat has layout (OC, C*kh*kw); the patch matrix comes back for reuse in
    weight-gradient GEMMs.
    """
    b = x.shape[0]
    cols = _im2col(_pad_hw(x, ph, pw), kh, kw, stride, oh, ow)
    y = w_mat @ cols  # (OC, B*oh*ow)
    oc = w_mat.shape[0]
    y = y.reshape(oc, b, oh, ow).transpose(1, 0, 2, 3)
    return np.ascontiguousarray(y), cols


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, geom: ConvGeometry,
                 *, return_cols: bool = False):
    """Cross-correlate x with w, add bias.  Output per ConvGeometry.out_hw."""
    x4, squeeze = _promote(x)
    if x4.shape[1] != geom.in_channels:
        raise DimensionError(
            f"input has {x4.shape[1]} channels, geometry expects {geom.in_channels}")
    if w.shape != (geom.out_channels, geom.in_channels, geom.kernel_h, geom.kernel_w):
        raise DimensionError(f"conv weights shape {w.shape} inconsistent with {geom}")
    if b.shape != (geom.out_channels,):
        raise DimensionError(f"conv bias shape {b.shape}, expected ({geom.out_channels},)")
    _check_finite("conv input", x4)
    oh, ow = geom.out_hw(x4.shape[2], x4.shape[3])
    w_mat = w.reshape(geom.out_channels, -1)
    y, cols = _correlate(x4, w_mat, geom.kernel_h, geom.kernel_w, geom.stride,
                         geom.pad_h, geom.pad_w, oh, ow)
    y += b[None, :, None, None]
    if squeeze:
        y = y[0]
    if return_cols:
        return y, cols
    return y


def conv_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray, geom: ConvGeometry,
                  *, cols: np.ndarray | None = None):
    """Gradients of conv_forward w.r.t. (input, weights, bias).

    `cols` may pass the patch matrix returned by conv_forward(return_cols=True)
    to skip recomputing it.
    """
    x4, squeeze = _promote(x)
    dy4, _ = _promote(dy)
    h, wd = x4.shape[2], x4.shape[3]
    oh, ow = geom.out_hw(h, wd)
    if dy4.shape != (x4.shape[0], geom.out_channels, oh, ow):
        raise DimensionError(
            f"upstream shape {dy4.shape} != expected {(x4.shape[0], geom.out_channels, oh, ow)}")

    dy_mat = dy4.transpose(1, 0, 2, 3).reshape(geom.out_channels, -1)
    db = dy_mat.sum(axis=1)
    if cols is None:
        cols = _im2col(_pad_hw(x4, geom.pad_h, geom.pad_w),
                       geom.kernel_h, geom.kernel_w, geom.stride, oh, ow)
    dw = (dy_mat @ cols.T).reshape(w.shape)

    dx = _adjoint_apply(dy4, w, geom, h, wd)
    if squeeze:
        dx = dx[0]
    return dx, dw, db


def _adjoint_apply(u: np.ndarray, w: np.ndarray, geom: ConvGeometry,
                   out_h: int, out_w: int) -> np.ndarray:
    """Apply the adjoint of conv(geom, w) to u, zero-padding any floor remainder.

    Gather form: zero-dilate u by the stride, border by (k-1-p), correlate with
    the kernel flipped spatially and transposed in channels.
    """
    kh, kw, s = geom.kernel_h, geom.kernel_w, geom.stride
    full_h = (u.shape[2] - 1) * s + kh - 2 * geom.pad_h
    full_w = (u.shape[3] - 1) * s + kw - 2 * geom.pad_w
    ud = _pad_or_crop(_dilate(u, s), kh - 1 - geom.pad_h, kw - 1 - geom.pad_w)
    w_flip = w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)  # (C_in, C_out, kh, kw)
    w_mat = w_flip.reshape(geom.in_channels, -1)
    y, _ = _correlate(ud, w_mat, kh, kw, 1, 0, 0, full_h, full_w)
    if full_h < out_h or full_w < out_w:
        # stride floor remainder: those input pixels never touched the output
        y = np.pad(y, ((0, 0), (0, 0), (0, out_h - full_h), (0, out_w - full_w)))
    return y


def deconv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, geom: ConvGeometry):
    """Transposed convolution: the adjoint of conv(geom) as a forward map.

    Weights have layout (in_channels, out_channels, kh, kw); geom.in_channels
    refers to the deconv input, geom.out_channels to the deconv output.
    """
    x4, squeeze = _promote(x)
    if x4.shape[1] != geom.in_channels:
        raise DimensionError(
            f"input has {x4.shape[1]} channels, geometry expects {geom.in_channels}")
    if w.shape != (geom.in_channels, geom.out_channels, geom.kernel_h, geom.kernel_w):
        raise DimensionError(f"deconv weights shape {w.shape} inconsistent with {geom}")
    if b.shape != (geom.out_channels,):
        raise DimensionError(f"deconv bias shape {b.shape}, expected ({geom.out_channels},)")
    _check_finite("deconv input", x4)
    oh, ow = geom.deconv_out_hw(x4.shape[2], x4.shape[3])
    # the conv being transposed maps out_channels -> in_channels with weights
    # in this exact layout, so the adjoint helper applies directly
    mirror = ConvGeometry(geom.out_channels, geom.in_channels, geom.kernel_h,
                          geom.kernel_w, geom.stride, geom.pad_h, geom.pad_w)
    y = _adjoint_apply(x4, w, mirror, oh, ow)
    y += b[None, :, None, None]
    if squeeze:
        y = y[0]
    return y


def deconv_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray, geom: ConvGeometry):
    """Gradients of deconv_forward; grad_input is itself a plain convolution."""
    x4, squeeze = _promote(x)
    dy4, _ = _promote(dy)
    oh, ow = geom.deconv_out_hw(x4.shape[2], x4.shape[3])
    if dy4.shape != (x4.shape[0], geom.out_channels, oh, ow):
        raise DimensionError(
            f"upstream shape {dy4.shape} != expected {(x4.shape[0], geom.out_channels, oh, ow)}")

    db = dy4.sum(axis=(0, 2, 3))

    # grad wrt input: convolve upstream with w treated as conv weights
    w_mat = w.reshape(geom.in_channels, -1)
    dx, cols_dy = _correlate(dy4, w_mat, geom.kernel_h, geom.kernel_w, geom.stride,
                             geom.pad_h, geom.pad_w, x4.shape[2], x4.shape[3])

    # grad wrt weights: conv weight-gradient with input/upstream roles swapped
    x_mat = x4.transpose(1, 0, 2, 3).reshape(geom.in_channels, -1)
    dw = (x_mat @ cols_dy.T).reshape(w.shape)

    if squeeze:
        dx = dx[0]
    return dx, dw, db
