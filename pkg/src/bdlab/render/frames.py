"""Rendering of trajectories into the two visual domains plus annotations.

Both domains share identical geometry, ground-truth masks, and bounding
boxes; only pixel appearance differs.  The plain domain paints flat colors
with anti-aliased discs; the shaded domain adds a seeded table texture,
vignette, beveled borders, drop shadows, and radial ball shading, rendered
with 4x supersampling for soft edges.

Images are (H, W, 3) float32 in [0, 1], quantized to the 1/255 grid so PNG
round-trips are lossless.  Masks are (2, H, W) float32 one-hot with channel
0 = table and channel 1 = border (split included).
"""

from __future__ import annotations

import numpy as np

from ..sim.physics import EnvContext

MASK_TABLE = 0
MASK_BORDER = 1

PLAIN_TABLE = np.array([0.58, 0.60, 0.58], dtype=np.float32)
PLAIN_BORDER = np.array([0.07, 0.07, 0.09], dtype=np.float32)
SHADED_TABLE = np.array([0.16, 0.40, 0.22], dtype=np.float32)
SHADED_BORDER = np.array([0.33, 0.20, 0.11], dtype=np.float32)

BALL_COLORS = np.array(
    [
        [0.86, 0.16, 0.12],
        [0.93, 0.79, 0.18],
        [0.22, 0.42, 0.88],
        [0.90, 0.90, 0.88],
        [0.55, 0.20, 0.65],
        [0.95, 0.50, 0.12],
    ],
    dtype=np.float32,
)

SUPERSAMPLE = 4


def ball_color(index: int) -> np.ndarray:
    return BALL_COLORS[index % len(BALL_COLORS)]


def bboxes(positions: np.ndarray, radius: float) -> np.ndarray:
    """One (x_min, y_min, x_max, y_max) box per ball, center +- radius."""
    positions = np.asarray(positions, dtype=np.float64)
    return np.concatenate([positions - radius, positions + radius], axis=1)


def border_region(context: EnvContext) -> np.ndarray:
    """Boolean (H, W) map of border/split pixels by pixel-center membership."""
    h, w = context.image_height, context.image_width
    xs = np.arange(w) + 0.5
    ys = np.arange(h) + 0.5
    cols = (xs < context.left) | (xs > w - context.right)
    rows = (ys < context.top) | (ys > h - context.bottom)
    region = rows[:, None] | cols[None, :]
    if context.split is not None:
        cx, sw = context.split
        split_cols = (xs >= cx - sw / 2.0) & (xs < cx + sw / 2.0)
        region |= split_cols[None, :] & ~rows[:, None]
    return region


def render_gt_mask(context: EnvContext) -> np.ndarray:
    """Two-channel one-hot mask of the environment; balls play no part."""
    border = border_region(context)
    mask = np.zeros((2, context.image_height, context.image_width), dtype=np.float32)
    mask[MASK_BORDER] = border
    mask[MASK_TABLE] = ~border
    return mask


def mask_partition_ok(mask: np.ndarray) -> bool:
    return bool(np.all(mask.sum(axis=0) == 1.0) and np.all((mask == 0) | (mask == 1)))


def _quantize(img: np.ndarray) -> np.ndarray:
    return (np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0).astype(np.float32)


class PlainRenderer:
    """Flat-color domain: uniform table, solid borders, anti-aliased discs."""

    def __init__(self, context: EnvContext, radius: float, seed: int = 0):
        self.context = context
        self.radius = radius
        bg = np.empty((context.image_height, context.image_width, 3), dtype=np.float32)
        bg[:] = PLAIN_TABLE
        bg[border_region(context)] = PLAIN_BORDER
        self.background = bg

    def frame(self, positions: np.ndarray) -> np.ndarray:
        img = self.background.copy()
        h, w = img.shape[:2]
        r = self.radius
        for i, (cx, cy) in enumerate(np.asarray(positions, dtype=np.float64)):
            pad = r + 1.5
            x0, x1 = max(int(cx - pad), 0), min(int(np.ceil(cx + pad)), w)
            y0, y1 = max(int(cy - pad), 0), min(int(np.ceil(cy + pad)), h)
            if x0 >= x1 or y0 >= y1:
                continue
            xs = np.arange(x0, x1) + 0.5
            ys = np.arange(y0, y1) + 0.5
            d = np.hypot(xs[None, :] - cx, ys[:, None] - cy)
            alpha = np.clip(r + 0.5 - d, 0.0, 1.0).astype(np.float32)
            patch = img[y0:y1, x0:x1]
            patch += alpha[:, :, None] * (ball_color(i) - patch)
        return _quantize(img)


class ShadedRenderer:
    """Textured domain with shading; the static background is cached per video."""

    def __init__(self, context: EnvContext, radius: float, seed: int):
        self.context = context
        self.radius = radius
        self.scale = SUPERSAMPLE
        self._build_background(seed)

    def _build_background(self, seed: int) -> None:
        ctx, s = self.context, self.scale
        h, w = ctx.image_height, ctx.image_width
        hs, ws = h * s, w * s
        xs = (np.arange(ws) + 0.5) / s
        ys = (np.arange(hs) + 0.5) / s
        rng = np.random.default_rng(np.uint64(seed) ^ np.uint64(0x5EEDBA11))

        # two-octave value noise on the table felt
        def octave(cell: float, amp: float) -> np.ndarray:
            gh, gw = int(np.ceil(h / cell)) + 2, int(np.ceil(w / cell)) + 2
            g = rng.standard_normal((gh, gw)).astype(np.float32)
            gy = ys / cell
            gx = xs / cell
            y0 = np.floor(gy).astype(int)
            x0 = np.floor(gx).astype(int)
            fy = (gy - y0)[:, None]
            fx = (gx - x0)[None, :]
            v = (
                g[y0[:, None], x0[None, :]] * (1 - fy) * (1 - fx)
                + g[y0[:, None], x0[None, :] + 1] * (1 - fy) * fx
                + g[y0[:, None] + 1, x0[None, :]] * fy * (1 - fx)
                + g[y0[:, None] + 1, x0[None, :] + 1] * fy * fx
            )
            return amp * v

        tex = octave(6.0, 0.035) + octave(1.5, 0.015)
        cx_img, cy_img = w / 2.0, h / 2.0
        rr = ((xs[None, :] - cx_img) / w) ** 2 + ((ys[:, None] - cy_img) / h) ** 2
        vignette = 1.0 - 0.35 * rr.astype(np.float32)
        table = SHADED_TABLE[None, None, :] * (1.0 + tex[:, :, None]) * vignette[:, :, None]

        # borders with a bevel: bright rim at the playable edge, darker inward
        depth = np.full((hs, ws), -np.inf, dtype=np.float32)
        for gap in (
            ctx.top - ys[:, None] + 0 * xs[None, :],
            ys[:, None] - (h - ctx.bottom) + 0 * xs[None, :],
            ctx.left - xs[None, :] + 0 * ys[:, None],
            xs[None, :] - (w - ctx.right) + 0 * ys[:, None],
        ):
            depth = np.maximum(depth, gap)
        if ctx.split is not None:
            scx, sw_ = ctx.split
            inside_rows = (ys >= ctx.top) & (ys < h - ctx.bottom)
            split_depth = (sw_ / 2.0 - np.abs(xs[None, :] - scx)) * inside_rows[:, None]
            split_depth = np.where(inside_rows[:, None], sw_ / 2.0 - np.abs(xs[None, :] - scx), -np.inf)
            depth = np.maximum(depth, split_depth)
        in_border = depth > 0
        bevel = np.clip(1.45 - 0.28 * depth, 0.55, 1.45).astype(np.float32)
        border_px = SHADED_BORDER[None, None, :] * bevel[:, :, None]

        bg = np.where(in_border[:, :, None], border_px, table).astype(np.float32)
        self.background_ss = bg
        self.background = self._downsample(bg)

    def _downsample(self, img_ss: np.ndarray) -> np.ndarray:
        s = self.scale
        hs, ws, _ = img_ss.shape
        return img_ss.reshape(hs // s, s, ws // s, s, 3).mean(axis=(1, 3))

    def frame(self, positions: np.ndarray) -> np.ndarray:
        ctx, s, r = self.context, self.scale, self.radius
        h, w = ctx.image_height, ctx.image_width
        img = self.background.copy()
        for i, (cx, cy) in enumerate(np.asarray(positions, dtype=np.float64)):
            pad = 1.6 * r + 1.0
            x0, x1 = max(int(cx - pad), 0), min(int(np.ceil(cx + pad)), w)
            y0, y1 = max(int(cy - pad), 0), min(int(np.ceil(cy + pad)), h)
            if x0 >= x1 or y0 >= y1:
                continue
            patch = self.background_ss[y0 * s : y1 * s, x0 * s : x1 * s].copy()
            xs = (np.arange(x0 * s, x1 * s) + 0.5) / s
            ys = (np.arange(y0 * s, y1 * s) + 0.5) / s
            # drop shadow offset toward lower-right
            dsh = np.hypot(xs[None, :] - (cx + 0.35 * r), ys[:, None] - (cy + 0.45 * r))
            shadow = 0.40 * np.clip(1.15 * r + 0.25 - dsh, 0.0, 1.0)
            patch *= (1.0 - shadow[:, :, None]).astype(np.float32)
            # sphere-shaded disc with an upper-left highlight
            d = np.hypot(xs[None, :] - cx, ys[:, None] - cy)
            alpha = np.clip(r + 0.125 - d, 0.0, 1.0).astype(np.float32)[:, :, None]
            hd = np.hypot(xs[None, :] - (cx - 0.35 * r), ys[:, None] - (cy - 0.35 * r)) / r
            shade = np.clip(1.12 - 0.55 * hd * hd, 0.30, 1.12).astype(np.float32)[:, :, None]
            spec = (0.45 * np.clip(1.0 - hd / 0.45, 0.0, 1.0) ** 2).astype(np.float32)[:, :, None]
            ball = ball_color(i)[None, None, :] * shade + spec
            patch += alpha * (ball - patch)
            img[y0:y1, x0:x1] = self._downsample_patch(patch)
        return _quantize(img)

    def _downsample_patch(self, patch: np.ndarray) -> np.ndarray:
        s = self.scale
        hs, ws, _ = patch.shape
        return patch.reshape(hs // s, s, ws // s, s, 3).mean(axis=(1, 3))


DOMAINS = ("sim", "blenlike")


def make_renderer(domain: str, context: EnvContext, radius: float, seed: int):
    if domain == "sim":
        return PlainRenderer(context, radius, seed)
    if domain == "blenlike":
        return ShadedRenderer(context, radius, seed)
    raise ValueError(f"unknown rendering domain: {domain}")


def render_frame_sim(positions: np.ndarray, context: EnvContext, radius: float) -> np.ndarray:
    return PlainRenderer(context, radius).frame(positions)


def render_frame_blenlike(positions: np.ndarray, context: EnvContext, radius: float, seed: int) -> np.ndarray:
    return ShadedRenderer(context, radius, seed).frame(positions)
