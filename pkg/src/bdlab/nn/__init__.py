from .layers import NormSpec, avg_pool2, batch_statistics, conv2d, normalize_groups, roi_align, upsample_nearest
from .backbone import Backbone, BackboneSpec, ConvLayer, ConvNormRelu, Hourglass, NormLayer, ResidualBlock, he_init

__all__ = [
    "NormSpec",
    "avg_pool2",
    "batch_statistics",
    "conv2d",
    "normalize_groups",
    "roi_align",
    "upsample_nearest",
    "Backbone",
    "BackboneSpec",
    "ConvLayer",
    "ConvNormRelu",
    "Hourglass",
    "NormLayer",
    "ResidualBlock",
    "he_init",
]
