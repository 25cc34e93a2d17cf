"""Visual backbone: strided stem + residual blocks + hourglass module.

The backbone downsamples by exactly 4x and emits a dense feature map whose
channel width comes from the active scale profile.  Layers register their
parameters in a shared ParameterSet so checkpointing sees one flat namespace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grad.optim import ParameterSet
from ..grad.tensor import ShapeError, Tensor, add, expand, mul, relu, reshape
from .layers import NormSpec, avg_pool2, batch_statistics, conv2d, normalize_groups, upsample_nearest


def he_init(rng: np.random.Generator, cout: int, cin: int, k: int, dtype=np.float32) -> np.ndarray:
    std = np.sqrt(2.0 / (cin * k * k))
    return (rng.standard_normal((cout, cin, k, k)) * std).astype(dtype)


class ConvLayer:
    def __init__(self, ps: ParameterSet, name: str, cin: int, cout: int, rng: np.random.Generator,
                 k: int = 3, stride: int = 1, bias: bool = True, dtype=np.float32):
        self.stride = stride
        self.padding = k // 2
        self.w = ps.add(f"{name}.w", he_init(rng, cout, cin, k, dtype))
        self.b = ps.add(f"{name}.b", np.zeros(cout, dtype=dtype)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.w, self.b, stride=self.stride, padding=self.padding)


class NormLayer:
    """Affine normalization layer; BN keeps running statistics for eval mode."""

    def __init__(self, ps: ParameterSet, name: str, channels: int, spec: NormSpec, dtype=np.float32):
        self.spec = spec
        self.channels = channels
        self.gamma = ps.add(f"{name}.gamma", np.ones(channels, dtype=dtype))
        self.beta = ps.add(f"{name}.beta", np.zeros(channels, dtype=dtype))
        if spec.kind == "bn":
            self.running_mean = ps.add(f"{name}.running_mean", np.zeros(channels, dtype=dtype), trainable=False)
            self.running_var = ps.add(f"{name}.running_var", np.ones(channels, dtype=dtype), trainable=False)
        elif spec.kind == "gn":
            spec.groups_for(channels)  # validate divisibility at construction

    def __call__(self, x: Tensor, train: bool) -> Tensor:
        spec = self.spec
        if spec.kind == "bn":
            if train:
                mu, var = batch_statistics(x)
                m = spec.momentum
                self.running_mean.data += m * (mu - self.running_mean.data)
                self.running_var.data += m * (var - self.running_var.data)
                xhat = normalize_groups(x, groups=self.channels, eps=spec.eps, over_batch=True)
            else:
                shape = (1, self.channels, 1, 1)
                inv = (1.0 / np.sqrt(self.running_var.data + spec.eps)).reshape(shape)
                mean = self.running_mean.data.reshape(shape)
                mean_t = Tensor(np.broadcast_to(-mean, x.data.shape).astype(x.data.dtype))
                inv_t = Tensor(np.broadcast_to(inv, x.data.shape).astype(x.data.dtype))
                xhat = mul(add(x, mean_t), inv_t)
        else:
            xhat = normalize_groups(x, groups=spec.groups_for(self.channels), eps=spec.eps, over_batch=False)
        shape = (1, self.channels, 1, 1)
        g = expand(reshape(self.gamma, shape), x.data.shape)
        b = expand(reshape(self.beta, shape), x.data.shape)
        return add(mul(xhat, g), b)


class ConvNormRelu:
    def __init__(self, ps, name, cin, cout, spec: NormSpec, rng, stride=1, dtype=np.float32):
        self.conv = ConvLayer(ps, f"{name}.conv", cin, cout, rng, stride=stride, bias=False, dtype=dtype)
        self.norm = NormLayer(ps, f"{name}.norm", cout, spec, dtype=dtype)

    def __call__(self, x, train):
        return relu(self.norm(self.conv(x), train))


class ResidualBlock:
    """conv-norm-relu-conv-norm with an identity or 1x1-projected skip."""

    def __init__(self, ps, name, cin, cout, spec: NormSpec, rng, stride=1, dtype=np.float32):
        self.conv1 = ConvLayer(ps, f"{name}.conv1", cin, cout, rng, stride=stride, bias=False, dtype=dtype)
        self.norm1 = NormLayer(ps, f"{name}.norm1", cout, spec, dtype=dtype)
        self.conv2 = ConvLayer(ps, f"{name}.conv2", cout, cout, rng, bias=False, dtype=dtype)
        self.norm2 = NormLayer(ps, f"{name}.norm2", cout, spec, dtype=dtype)
        if stride != 1 or cin != cout:
            self.proj = ConvLayer(ps, f"{name}.proj", cin, cout, rng, k=1, stride=stride, bias=False, dtype=dtype)
        else:
            self.proj = None

    def __call__(self, x, train):
        h = relu(self.norm1(self.conv1(x), train))
        h = self.norm2(self.conv2(h), train)
        skip = self.proj(x) if self.proj is not None else x
        return relu(add(h, skip))


class Hourglass:
    """Recursive encoder-decoder with skip connections at each scale."""

    def __init__(self, ps, name, channels, depth, spec: NormSpec, rng, dtype=np.float32):
        self.depth = depth
        self.skip = ResidualBlock(ps, f"{name}.skip", channels, channels, spec, rng, dtype=dtype)
        self.down = ResidualBlock(ps, f"{name}.down", channels, channels, spec, rng, dtype=dtype)
        if depth > 1:
            self.inner = Hourglass(ps, f"{name}.inner", channels, depth - 1, spec, rng, dtype=dtype)
        else:
            self.inner = ResidualBlock(ps, f"{name}.bottom", channels, channels, spec, rng, dtype=dtype)
        self.up = ResidualBlock(ps, f"{name}.up", channels, channels, spec, rng, dtype=dtype)

    def __call__(self, x, train):
        skip = self.skip(x, train)
        h = avg_pool2(x)
        h = self.down(h, train)
        h = self.inner(h, train) if self.depth > 1 else self.inner(h, train)
        h = self.up(h, train)
        h = upsample_nearest(h, x.data.shape[2:])
        return add(skip, h)


@dataclass(frozen=True)
class BackboneSpec:
    in_channels: int = 3
    stem_channels: int = 16
    out_channels: int = 32
    hourglass_depth: int = 2
    # stem stride 2 + first residual block stride 2 = fixed 4x downsampling
    downsample: int = 4


class Backbone:
    """Stem conv + three residual blocks (4x down) + one hourglass module."""

    def __init__(self, ps: ParameterSet, name: str, spec: BackboneSpec, norm: NormSpec,
                 rng: np.random.Generator, dtype=np.float32):
        self.spec = spec
        c_stem, c_out = spec.stem_channels, spec.out_channels
        self.stem = ConvNormRelu(ps, f"{name}.stem", spec.in_channels, c_stem, norm, rng, stride=2, dtype=dtype)
        self.block1 = ResidualBlock(ps, f"{name}.block1", c_stem, c_out, norm, rng, stride=2, dtype=dtype)
        self.block2 = ResidualBlock(ps, f"{name}.block2", c_out, c_out, norm, rng, dtype=dtype)
        self.block3 = ResidualBlock(ps, f"{name}.block3", c_out, c_out, norm, rng, dtype=dtype)
        self.hourglass = Hourglass(ps, f"{name}.hourglass", c_out, spec.hourglass_depth, norm, rng, dtype=dtype)

    def __call__(self, x: Tensor, train: bool) -> Tensor:
        H, W = x.data.shape[2:]
        if H % self.spec.downsample or W % self.spec.downsample:
            raise ShapeError(f"backbone input {H}x{W} not divisible by {self.spec.downsample}")
        h = self.stem(x, train)
        h = self.block1(h, train)
        h = self.block2(h, train)
        h = self.block3(h, train)
        return self.hourglass(h, train)
