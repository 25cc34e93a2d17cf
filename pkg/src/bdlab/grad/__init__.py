from .tensor import (
    GradError,
    ShapeError,
    Tensor,
    add,
    add_const,
    clamp_passthrough,
    concat,
    crop_hw,
    expand,
    grad_enabled,
    leaky_relu,
    matmul,
    mse,
    mul,
    mul_const,
    no_grad,
    relu,
    reshape,
    softmax_cross_entropy,
    sub,
    take_rows,
    tanh,
    tmax,
    tmean,
    transpose,
    tsum,
)
from .optim import ParameterSet, adam_step, cosine_lr, load_checkpoint, load_into, save_checkpoint
from .gradcheck import GradCheckReport, finite_diff_gradcheck

__all__ = [
    "GradError",
    "ShapeError",
    "Tensor",
    "add",
    "add_const",
    "clamp_passthrough",
    "concat",
    "crop_hw",
    "expand",
    "grad_enabled",
    "leaky_relu",
    "matmul",
    "mse",
    "mul",
    "mul_const",
    "no_grad",
    "relu",
    "reshape",
    "softmax_cross_entropy",
    "sub",
    "take_rows",
    "tanh",
    "tmax",
    "tmean",
    "transpose",
    "tsum",
    "ParameterSet",
    "adam_step",
    "cosine_lr",
    "load_checkpoint",
    "load_into",
    "save_checkpoint",
    "GradCheckReport",
    "finite_diff_gradcheck",
]
