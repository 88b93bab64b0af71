"""
기본 레이어 모듈
Linear, Conv2d, BatchNorm, LayerNorm, Dropout 및 함수형 구현
"""

import math
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigurationError, ContractError, ShapeError
from ..tensor import Tensor
from ..tensor import functional as F
from .module import Module, Parameter


def _uniform(rng: np.random.Generator, shape: Sequence[int], fan_in: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=tuple(shape))


def _default_rng(rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(0)


def _constant_like(values: np.ndarray, channel_shape: Sequence[int], shape: Sequence[int]) -> Tensor:
    return Tensor(np.broadcast_to(values.reshape(channel_shape), shape))


# ----------------------------------------------------------------------
# 함수형 레이어
# ----------------------------------------------------------------------
def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    완전연결 변환 x·W + b

    Args:
        x: [..., d_in]
        weight: [d_in, d_out]
        bias: [d_out] 또는 None

    Returns:
        Tensor: [..., d_out]
    """
    d_in, d_out = weight.shape
    if x.shape[-1] != d_in:
        raise ShapeError("linear 입력 차원 불일치", x.shape, weight.shape)
    lead = x.shape[:-1]
    flat = x if x.ndim == 2 else x.reshape(-1, d_in)
    out = flat @ weight
    if bias is not None:
        out = out + F.expand(bias.reshape(1, d_out), out.shape)
    return out if x.ndim == 2 else out.reshape(lead + (d_out,))


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """
    배치 정규화 ([N,C] 특징 축 또는 [N,C,H,W] 채널 축)

    학습 모드에서는 배치 통계로 정규화하고 running_mean/running_var를
    제자리에서 갱신한다 (분산은 불편 추정량). 평가 모드에서는 러닝 통계를 사용한다.
    """
    if x.ndim == 2:
        axes = (0,)
        channel_shape = (1, x.shape[1])
    elif x.ndim == 4:
        axes = (0, 2, 3)
        channel_shape = (1, x.shape[1], 1, 1)
    else:
        raise ShapeError("batch_norm 입력은 [N,C] 또는 [N,C,H,W]", x.shape)
    channels = x.shape[1]
    if gamma.shape != (channels,) or running_mean.shape != (channels,):
        raise ShapeError("batch_norm 채널 수 불일치", x.shape, gamma.shape)

    if training:
        count = x.size // channels
        if count < 2:
            raise ContractError(
                f"학습 모드 batch_norm에는 채널당 2개 이상의 값이 필요합니다: shape {x.shape}"
            )
        mean = x.mean(axis=axes, keepdims=True)
        centered = x - F.expand(mean, x.shape)
        var = (centered * centered).mean(axis=axes, keepdims=True)
        x_hat = centered / F.expand((var + eps) ** 0.5, x.shape)

        batch_mean = mean.data.reshape(channels)
        batch_var = var.data.reshape(channels) * (count / (count - 1))
        running_mean *= 1.0 - momentum
        running_mean += momentum * batch_mean
        running_var *= 1.0 - momentum
        running_var += momentum * batch_var
    else:
        shift = _constant_like(running_mean, channel_shape, x.shape)
        scale = _constant_like(np.sqrt(running_var + eps), channel_shape, x.shape)
        x_hat = (x - shift) / scale

    g = F.expand(gamma.reshape(channel_shape), x.shape)
    b = F.expand(beta.reshape(channel_shape), x.shape)
    return x_hat * g + b


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """마지막 축에 대한 레이어 정규화"""
    d = x.shape[-1]
    if gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeError("layer_norm 정규화 차원 불일치", x.shape, gamma.shape)
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - F.expand(mean, x.shape)
    var = (centered * centered).mean(axis=-1, keepdims=True)
    x_hat = centered / F.expand((var + eps) ** 0.5, x.shape)
    affine_shape = (1,) * (x.ndim - 1) + (d,)
    return x_hat * F.expand(gamma.reshape(affine_shape), x.shape) + F.expand(
        beta.reshape(affine_shape), x.shape
    )


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator) -> Tensor:
    """역 드롭아웃 (평가 모드에서는 입력 그대로 반환)"""
    if not 0.0 <= rate < 1.0:
        raise ConfigurationError(f"dropout rate는 [0, 1) 범위여야 합니다: {rate}")
    if not training or rate == 0.0:
        return x
    keep = rng.random(x.shape) >= rate
    return x * Tensor(keep / (1.0 - rate))


# ----------------------------------------------------------------------
# 레이어 모듈
# ----------------------------------------------------------------------
class Linear(Module):
    """완전연결 레이어 (W: [d_in, d_out])"""

    def __init__(
        self,
        in_features: int,
        out_features: int,
        bias: bool = True,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        rng = _default_rng(rng)
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Parameter(_uniform(rng, (in_features, out_features), in_features))
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return linear(x, self.weight, self.bias)


class Conv2d(Module):
    """2D 합성곱 레이어 (groups == in_channels 이면 depthwise)"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        stride: int = 1,
        padding: int = 0,
        groups: int = 1,
        bias: bool = True,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        if in_channels % groups or out_channels % groups:
            raise ConfigurationError(
                f"채널 수({in_channels}, {out_channels})가 groups={groups}로 나누어지지 않습니다"
            )
        rng = _default_rng(rng)
        fan_in = (in_channels // groups) * kernel_size * kernel_size
        self.stride = stride
        self.padding = padding
        self.groups = groups
        self.weight = Parameter(
            _uniform(rng, (out_channels, in_channels // groups, kernel_size, kernel_size), fan_in)
        )
        self.bias = Parameter(np.zeros(out_channels)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, self.stride, self.padding, self.groups)


class BatchNorm(Module):
    """배치 정규화 레이어 (1-D 특징 / 2-D 채널 공용)"""

    buffer_names = ("running_mean", "running_var")

    def __init__(self, num_features: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__()
        if not 0.0 < momentum < 1.0:
            raise ConfigurationError(f"momentum은 (0, 1) 범위여야 합니다: {momentum}")
        if eps <= 0.0:
            raise ConfigurationError(f"epsilon은 양수여야 합니다: {eps}")
        self.momentum = momentum
        self.eps = eps
        self.gamma = Parameter(np.ones(num_features))
        self.beta = Parameter(np.zeros(num_features))
        self.running_mean = np.zeros(num_features)
        self.running_var = np.ones(num_features)

    def forward(self, x: Tensor) -> Tensor:
        return batch_norm(
            x,
            self.gamma,
            self.beta,
            self.running_mean,
            self.running_var,
            self.training,
            self.momentum,
            self.eps,
        )


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-6):
        super().__init__()
        self.eps = eps
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))

    def forward(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta, self.eps)


class Dropout(Module):
    """
    드롭아웃 레이어

    Args:
        rate: 드롭 확률 [0, 1)
        rng: 마스크 생성기 (모델 안의 드롭아웃 레이어들이 하나를 공유)
    """

    def __init__(self, rate: float = 0.1, rng: Optional[np.random.Generator] = None):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ConfigurationError(f"dropout rate는 [0, 1) 범위여야 합니다: {rate}")
        self.rate = rate
        self.rng = _default_rng(rng)

    def forward(self, x: Tensor) -> Tensor:
        return dropout(x, self.rate, self.training, self.rng)
