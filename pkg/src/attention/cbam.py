"""
CBAM (Convolutional Block Attention Module)
채널 어텐션과 공간 어텐션, 그리고 채널 -> 공간 순서의 합성
"""

from typing import Optional

import numpy as np

from ..errors import ConfigurationError, ShapeError
from ..nn import Module, Parameter
from ..nn.layers import linear
from ..tensor import Tensor
from ..tensor import functional as F


def _shared_mlp(v: Tensor, w0: Tensor, w1: Tensor) -> Tensor:
    return linear(linear(v, w0).relu(), w1)


def channel_attention(features: Tensor, w0: Tensor, w1: Tensor) -> Tensor:
    """
    채널 어텐션 맵 M_c = sigmoid(MLP(AvgPool(F)) + MLP(MaxPool(F)))

    두 풀링 분기는 같은 MLP 가중치(W0, W1)를 공유한다.

    Args:
        features: [C,H,W] 또는 [N,C,H,W]
        w0: [C, C/r]
        w1: [C/r, C]

    Returns:
        Tensor: [C] 또는 [N,C], 모든 값이 (0, 1)
    """
    if features.ndim not in (3, 4):
        raise ShapeError("channel_attention 입력은 [C,H,W] 또는 [N,C,H,W]", features.shape)
    channels = features.shape[-3]
    if w0.shape[0] != channels or w1.shape[1] != channels:
        raise ShapeError("channel_attention 채널 수 불일치", features.shape, w0.shape)
    avg = F.global_pool("avg", features)
    mx = F.global_pool("max", features)
    if features.ndim == 3:
        avg, mx = avg.reshape(1, channels), mx.reshape(1, channels)
    logits = _shared_mlp(avg, w0, w1) + _shared_mlp(mx, w0, w1)
    gate = logits.sigmoid()
    return gate.reshape(channels) if features.ndim == 3 else gate


def spatial_attention(features: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """
    공간 어텐션 맵 M_s = sigmoid(conv7x7([mean_c(F); max_c(F)]))

    Args:
        features: [C,H,W] 또는 [N,C,H,W]
        kernel: [1, 2, 7, 7]
        bias: [1]

    Returns:
        Tensor: [1,H,W] 또는 [N,1,H,W]
    """
    if features.ndim not in (3, 4):
        raise ShapeError("spatial_attention 입력은 [C,H,W] 또는 [N,C,H,W]", features.shape)
    pooled = F.concat([F.channel_mean(features), F.channel_max(features)], axis=features.ndim - 3)
    return F.conv2d(pooled, kernel, bias, stride=1, padding=kernel.shape[-1] // 2).sigmoid()


def cbam(
    features: Tensor, w0: Tensor, w1: Tensor, kernel: Tensor, bias: Tensor
) -> Tensor:
    """채널 어텐션을 먼저 곱한 뒤 그 결과에 공간 어텐션을 곱함"""
    mc = channel_attention(features, w0, w1)
    mc = mc.reshape(mc.shape + (1, 1))
    refined = F.broadcast_mul(features, mc)
    ms = spatial_attention(refined, kernel, bias)
    return F.broadcast_mul(refined, ms)


class ChannelAttention(Module):
    """
    채널 어텐션 모듈

    Args:
        channels: 입력 채널 수 C
        reduction: 축소 비율 r (C를 나누어야 함)
    """

    def __init__(self, channels: int, reduction: int = 2, rng: Optional[np.random.Generator] = None):
        super().__init__()
        if reduction < 1 or channels % reduction:
            raise ConfigurationError(f"축소 비율 {reduction}이 채널 수 {channels}를 나누지 않습니다")
        rng = rng if rng is not None else np.random.default_rng(0)
        hidden = channels // reduction
        self.w0 = Parameter(rng.uniform(-1.0, 1.0, (channels, hidden)) / np.sqrt(channels))
        self.w1 = Parameter(rng.uniform(-1.0, 1.0, (hidden, channels)) / np.sqrt(hidden))

    def forward(self, x: Tensor) -> Tensor:
        return channel_attention(x, self.w0, self.w1)


class SpatialAttention(Module):
    def __init__(self, kernel_size: int = 7, rng: Optional[np.random.Generator] = None):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in = 2 * kernel_size * kernel_size
        self.kernel = Parameter(
            rng.uniform(-1.0, 1.0, (1, 2, kernel_size, kernel_size)) / np.sqrt(fan_in)
        )
        self.bias = Parameter(np.zeros(1))

    def forward(self, x: Tensor) -> Tensor:
        return spatial_attention(x, self.kernel, self.bias)


class CBAM(Module):
    """채널 -> 공간 순서로 특징을 재보정하는 어텐션 모듈"""

    def __init__(self, channels: int, reduction: int = 2, rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.channel = ChannelAttention(channels, reduction, rng=rng)
        self.spatial = SpatialAttention(rng=rng)

    def forward(self, x: Tensor) -> Tensor:
        return cbam(x, self.channel.w0, self.channel.w1, self.spatial.kernel, self.spatial.bias)
