from .frames import (
    BALL_COLORS,
    DOMAINS,
    MASK_BORDER,
    MASK_TABLE,
    PlainRenderer,
    ShadedRenderer,
    ball_color,
    bboxes,
    border_region,
    make_renderer,
    mask_partition_ok,
    render_frame_blenlike,
    render_frame_sim,
    render_gt_mask,
)

__all__ = [
    "BALL_COLORS",
    "DOMAINS",
    "MASK_BORDER",
    "MASK_TABLE",
    "PlainRenderer",
    "ShadedRenderer",
    "ball_color",
    "bboxes",
    "border_region",
    "make_renderer",
    "mask_partition_ok",
    "render_frame_blenlike",
    "render_frame_sim",
    "render_gt_mask",
]
