"""
신경망 레이어 모듈
파라미터 레이어와 백본 구성 블록
"""

from .blocks import ConvNeXtBlock, PatchEmbed, ResidualBlock, batched
from .layers import (
    BatchNorm,
    Conv2d,
    Dropout,
    LayerNorm,
    Linear,
    batch_norm,
    dropout,
    layer_norm,
    linear,
)
from .module import Module, Parameter, count_parameters

__all__ = [
    "Module",
    "Parameter",
    "count_parameters",
    "Linear",
    "Conv2d",
    "BatchNorm",
    "LayerNorm",
    "Dropout",
    "linear",
    "batch_norm",
    "layer_norm",
    "dropout",
    "ResidualBlock",
    "ConvNeXtBlock",
    "PatchEmbed",
    "batched",
]
