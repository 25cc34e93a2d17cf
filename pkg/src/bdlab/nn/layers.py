"""Convolution, normalization variants, RoI align, pooling, upsampling.

All functions operate on NCHW tensors and plug into the autograd graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..grad.tensor import ShapeError, Tensor, crop_hw, reshape, tmean


# -- convolution -------------------------------------------------------------


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of an NCHW input with (Cout, Cin, kh, kw) weights."""
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeError(f"conv2d: need NCHW input and OIHW weights, got {x.data.shape}, {w.data.shape}")
    N, Cin, H, W = x.data.shape
    Cout, Cin_w, kh, kw = w.data.shape
    if Cin != Cin_w:
        raise ShapeError(f"conv2d: input channels {Cin} != weight channels {Cin_w}")
    if b is not None and b.data.shape != (Cout,):
        raise ShapeError(f"conv2d: bias shape {b.data.shape} != ({Cout},)")
    Ho = (H + 2 * padding - kh) // stride + 1
    Wo = (W + 2 * padding - kw) // stride + 1
    if Ho < 1 or Wo < 1:
        raise ShapeError(f"conv2d: kernel {kh}x{kw} too large for input {H}x{W} (pad {padding})")

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    cols = np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5)).reshape(N * Ho * Wo, Cin * kh * kw)
    wm = w.data.reshape(Cout, -1).T
    out = cols @ wm
    if b is not None:
        out = out + b.data
    y = out.reshape(N, Ho, Wo, Cout).transpose(0, 3, 1, 2)

    def backward(g):
        gm = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(N * Ho * Wo, Cout)
        w._accumulate((cols.T @ gm).T.reshape(w.data.shape))
        if b is not None:
            b._accumulate(gm.sum(axis=0))
        if x.requires_grad:
            dcols = (gm @ wm.T).reshape(N, Ho, Wo, Cin, kh, kw).transpose(0, 3, 1, 2, 4, 5)
            dxp = np.zeros_like(xp) if padding else np.zeros_like(x.data)
            for di in range(kh):
                for dj in range(kw):
                    dxp[:, :, di : di + stride * Ho : stride, dj : dj + stride * Wo : stride] += dcols[..., di, dj]
            x._accumulate(dxp[:, :, padding : padding + H, padding : padding + W] if padding else dxp)

    parents = (x, w) if b is None else (x, w, b)
    return Tensor._result(np.ascontiguousarray(y), parents, backward)


# -- normalization -----------------------------------------------------------


@dataclass(frozen=True)
class NormSpec:
    """Which normalization to apply inside conv blocks.

    ``kind`` is one of "bn", "in", "gn", "ln".  LN is realized as GN with a
    single group; IN is GN with one group per channel.  ``group_count`` only
    matters for "gn" and must divide the channel count.
    """

    kind: str = "bn"
    group_count: int = 32
    eps: float = 1e-5
    momentum: float = 0.1

    def groups_for(self, channels: int) -> int:
        if self.kind == "in":
            return channels
        if self.kind == "ln":
            return 1
        if self.kind == "gn":
            if channels % self.group_count != 0:
                raise ShapeError(f"group norm: {self.group_count} groups do not divide {channels} channels")
            return self.group_count
        raise ValueError(f"no per-sample grouping for norm kind '{self.kind}'")


def normalize_groups(x: Tensor, groups: int, eps: float = 1e-5, over_batch: bool = False) -> Tensor:
    """Zero-mean unit-variance normalization within channel groups.

    With ``over_batch=False`` statistics are per (sample, group) — this covers
    IN (groups=C), GN, and LN (groups=1).  With ``over_batch=True`` statistics
    pool over the batch and spatial axes per group, which with groups=C is
    train-mode batch norm.
    """
    if x.data.ndim != 4:
        raise ShapeError(f"normalize_groups expects NCHW, got {x.data.shape}")
    N, C, H, W = x.data.shape
    if C % groups != 0:
        raise ShapeError(f"normalize_groups: {groups} groups do not divide {C} channels")
    xg = x.data.reshape(N, groups, -1)
    axes = (0, 2) if over_batch else (2,)
    mu = xg.mean(axis=axes, keepdims=True)
    var = xg.var(axis=axes, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (xg - mu) * inv

    def backward(g):
        gg = g.reshape(N, groups, -1)
        gmean = gg.mean(axis=axes, keepdims=True)
        gxhat = (gg * xhat).mean(axis=axes, keepdims=True)
        dx = (gg - gmean - xhat * gxhat) * inv
        x._accumulate(dx.reshape(x.data.shape))

    return Tensor._result(xhat.reshape(x.data.shape), (x,), backward)


def batch_statistics(x: Tensor) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean/variance over (N, H, W); used to update BN running stats."""
    mu = x.data.mean(axis=(0, 2, 3))
    var = x.data.var(axis=(0, 2, 3))
    return mu, var


# -- RoI align ---------------------------------------------------------------

ROI_SAMPLES_PER_BIN = 2  # 2x2 bilinear samples per bin, average pooled


def roi_align(
    fmap: Tensor,
    boxes: np.ndarray,
    batch_index: np.ndarray,
    output_size: int,
    spatial_scale: float,
) -> Tensor:
    """Extract an (R, C, k, k) tensor by bilinear sampling boxes on a feature map.

    ``boxes`` holds (x_min, y_min, x_max, y_max) in image coordinates;
    ``spatial_scale`` maps image to feature coordinates.  Each of the k×k bins
    averages a 2×2 grid of bilinear samples.  Feature pixel (i, j) is treated
    as a point sample at (j + 0.5, i + 0.5); out-of-range samples clamp to the
    border.  Gradients flow to the feature map only.
    """
    if fmap.data.ndim != 4:
        raise ShapeError(f"roi_align expects NCHW feature map, got {fmap.data.shape}")
    boxes = np.asarray(boxes, dtype=np.float64)
    if boxes.ndim != 2 or boxes.shape[1] != 4:
        raise ShapeError(f"roi_align: boxes must be (R, 4), got {boxes.shape}")
    if np.any(boxes[:, 2] <= boxes[:, 0]) or np.any(boxes[:, 3] <= boxes[:, 1]):
        bad = np.where((boxes[:, 2] <= boxes[:, 0]) | (boxes[:, 3] <= boxes[:, 1]))[0]
        raise ValueError(f"roi_align: degenerate box at index {bad[0]}: {boxes[bad[0]].tolist()}")
    batch_index = np.asarray(batch_index, dtype=np.intp)
    N, C, Hf, Wf = fmap.data.shape
    k = int(output_size)
    ns = ROI_SAMPLES_PER_BIN

    fb = boxes * spatial_scale
    bin_w = (fb[:, 2] - fb[:, 0]) / k
    bin_h = (fb[:, 3] - fb[:, 1]) / k
    # sample centers: box_origin + bin * (index + (sub + 0.5) / ns)
    offs = (np.arange(ns) + 0.5) / ns
    grid = np.arange(k)
    sx = fb[:, 0, None, None] + bin_w[:, None, None] * (grid[None, :, None] + offs[None, None, :])  # (R,k,ns)
    sy = fb[:, 1, None, None] + bin_h[:, None, None] * (grid[None, :, None] + offs[None, None, :])

    R = boxes.shape[0]
    gx = np.clip(sx - 0.5, 0.0, Wf - 1.0)  # continuous grid coords, pixel centers at integers
    gy = np.clip(sy - 0.5, 0.0, Hf - 1.0)
    x0 = np.floor(gx).astype(np.intp)
    y0 = np.floor(gy).astype(np.intp)
    x0 = np.minimum(x0, Wf - 2) if Wf > 1 else x0 * 0
    y0 = np.minimum(y0, Hf - 2) if Hf > 1 else y0 * 0
    fx = gx - x0
    fy = gy - y0
    x1 = np.minimum(x0 + 1, Wf - 1)
    y1 = np.minimum(y0 + 1, Hf - 1)

    # broadcast to a full (R, k, ns, k, ns) sample lattice: rows index y, cols x
    fy_b, fx_b = np.broadcast_arrays(fy[:, :, :, None, None], fx[:, None, None, :, :])
    y0_b, x0_b = np.broadcast_arrays(y0[:, :, :, None, None], x0[:, None, None, :, :])
    y1_b, x1_b = np.broadcast_arrays(y1[:, :, :, None, None], x1[:, None, None, :, :])
    w00 = (1 - fy_b) * (1 - fx_b)
    w01 = (1 - fy_b) * fx_b
    w10 = fy_b * (1 - fx_b)
    w11 = fy_b * fx_b

    fm = np.ascontiguousarray(fmap.data.transpose(0, 2, 3, 1))  # NHWC for channel-contiguous gathers
    bidx = batch_index[:, None, None, None, None]
    bb = np.broadcast_to(bidx, y0_b.shape)
    vals = (
        fm[bb, y0_b, x0_b] * w00[..., None]
        + fm[bb, y0_b, x1_b] * w01[..., None]
        + fm[bb, y1_b, x0_b] * w10[..., None]
        + fm[bb, y1_b, x1_b] * w11[..., None]
    )  # (R, k, ns, k, ns, C)
    out = vals.mean(axis=(2, 4)).transpose(0, 3, 1, 2)  # (R, C, k, k)
    out = np.ascontiguousarray(out.astype(fmap.data.dtype))

    def backward(g):
        gs = (g.transpose(0, 2, 3, 1) / (ns * ns)).astype(fmap.data.dtype)  # (R, k, k, C)
        gs = np.broadcast_to(gs[:, :, None, :, None, :], w00.shape + (C,))
        buf = np.zeros((N, Hf, Wf, C), dtype=fmap.data.dtype)
        flat = buf.reshape(N * Hf * Wf, C)
        base = bb * (Hf * Wf)
        for wgt, yy, xx in ((w00, y0_b, x0_b), (w01, y0_b, x1_b), (w10, y1_b, x0_b), (w11, y1_b, x1_b)):
            np.add.at(flat, (base + yy * Wf + xx).ravel(), (gs * wgt[..., None]).reshape(-1, C))
        fmap._accumulate(buf.transpose(0, 3, 1, 2))

    return Tensor._result(out, (fmap,), backward)


# -- resampling ----------------------------------------------------------------


def avg_pool2(x: Tensor) -> Tensor:
    """2x2 average pooling; odd trailing rows/columns are cropped first."""
    N, C, H, W = x.data.shape
    h2, w2 = H // 2, W // 2
    if h2 < 1 or w2 < 1:
        raise ShapeError(f"avg_pool2: input {H}x{W} too small")
    t = x if (H == 2 * h2 and W == 2 * w2) else crop_hw(x, 2 * h2, 2 * w2)
    t = reshape(t, (N, C, h2, 2, w2, 2))
    return reshape(tmean(t, axis=(3, 5)), (N, C, h2, w2))


def upsample_nearest(x: Tensor, size: tuple[int, int]) -> Tensor:
    """Nearest-neighbor resize of an NCHW tensor to (H, W) = size."""
    N, C, H, W = x.data.shape
    Ho, Wo = size
    src_h = (np.arange(Ho) * H) // Ho
    src_w = (np.arange(Wo) * W) // Wo
    out = x.data[:, :, src_h[:, None], src_w[None, :]]

    def backward(g):
        flat_idx = (src_h[:, None] * W + src_w[None, :]).ravel()
        gput = np.ascontiguousarray(g.reshape(N * C, Ho * Wo).T)  # (Ho*Wo, N*C)
        buf = np.zeros((H * W, N * C), dtype=x.data.dtype)
        np.add.at(buf, flat_idx, gput)
        x._accumulate(buf.T.reshape(x.data.shape))

    return Tensor._result(np.ascontiguousarray(out), (x,), backward)
