"""
백본 구성 블록
잔차 블록, ConvNeXt 블록, 패치 임베딩
"""

from typing import Callable, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, ShapeError
from ..tensor import Tensor
from ..tensor import functional as F
from .layers import BatchNorm, Conv2d, LayerNorm, Linear
from .module import Module, Parameter


def batched(fn: Callable[[Tensor], Tensor], x: Tensor) -> Tensor:
    """[C,H,W] 입력을 배치 1로 감싸서 fn을 적용하고 배치 축을 다시 제거"""
    if x.ndim == 3:
        out = fn(x.reshape((1,) + x.shape))
        return out.reshape(out.shape[1:])
    if x.ndim != 4:
        raise ShapeError("[C,H,W] 또는 [N,C,H,W] 입력이 필요합니다", x.shape)
    return fn(x)


class ResidualBlock(Module):
    """
    잔차 블록: relu(BN(conv3x3(relu(BN(conv3x3(x))))) + skip(x))

    입력/출력 채널이 다르면 skip 경로에 1x1 투영 합성곱을 둔다.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        self.conv1 = Conv2d(in_channels, out_channels, 3, padding=1, bias=False, rng=rng)
        self.bn1 = BatchNorm(out_channels)
        self.conv2 = Conv2d(out_channels, out_channels, 3, padding=1, bias=False, rng=rng)
        self.bn2 = BatchNorm(out_channels)
        self.projection = (
            Conv2d(in_channels, out_channels, 1, bias=False, rng=rng)
            if in_channels != out_channels
            else None
        )

    def _forward(self, x: Tensor) -> Tensor:
        out = self.bn1(self.conv1(x)).relu()
        out = self.bn2(self.conv2(out))
        skip = self.projection(x) if self.projection is not None else x
        if skip.shape != out.shape:
            raise ShapeError("잔차 블록 분기 형상 불일치", out.shape, skip.shape)
        return (out + skip).relu()

    def forward(self, x: Tensor) -> Tensor:
        return batched(self._forward, x)


class ConvNeXtBlock(Module):
    """
    ConvNeXt 블록

    depthwise 7x7 합성곱 -> LayerNorm -> Linear(4배 확장) -> GELU -> Linear(축소) -> + x
    LayerNorm과 pointwise Linear는 채널 마지막 배치([N,H,W,C])에서 적용한다.
    """

    def __init__(
        self,
        dim: int,
        expansion: int = 4,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        self.dim = dim
        self.dwconv = Conv2d(dim, dim, 7, padding=3, groups=dim, bias=True, rng=rng)
        self.norm = LayerNorm(dim)
        self.pwconv1 = Linear(dim, expansion * dim, rng=rng)
        self.pwconv2 = Linear(expansion * dim, dim, rng=rng)

    def _forward(self, x: Tensor) -> Tensor:
        if x.shape[1] != self.dim:
            raise ShapeError(f"ConvNeXt 블록 채널 수는 {self.dim}이어야 합니다", x.shape)
        y = self.dwconv(x).transpose(0, 2, 3, 1)
        y = self.pwconv2(self.pwconv1(self.norm(y)).gelu())
        return x + y.transpose(0, 3, 1, 2)

    def forward(self, x: Tensor) -> Tensor:
        return batched(self._forward, x)


class PatchEmbed(Module):
    """
    패치 임베딩

    겹치지 않는 p x p x C 패치를 (채널, 행, 열) 순서로 펼쳐 선형 투영한 뒤
    위치별 학습 임베딩(0으로 초기화)을 더한다.

    Args:
        in_channels: 입력 채널 수
        image_size: (H, W)
        patch: 패치 한 변 크기 p
        d_model: 토큰 차원
    """

    def __init__(
        self,
        in_channels: int,
        image_size: Tuple[int, int],
        patch: int,
        d_model: int,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        h, w = image_size
        if h % patch or w % patch:
            raise ConfigurationError(f"패치 크기 {patch}가 이미지 크기 {h}x{w}를 나누지 않습니다")
        self.patch = patch
        self.num_tokens = (h // patch) * (w // patch)
        self.proj = Linear(in_channels * patch * patch, d_model, rng=rng)
        self.pos = Parameter(np.zeros((self.num_tokens, d_model)))

    def _forward(self, x: Tensor) -> Tensor:
        n, c, h, w = x.shape
        p = self.patch
        if h % p or w % p:
            raise ConfigurationError(f"패치 크기 {p}가 입력 크기 {h}x{w}를 나누지 않습니다")
        tokens = (h // p) * (w // p)
        if tokens != self.num_tokens:
            raise ShapeError("패치 개수가 위치 임베딩과 다릅니다", (tokens,), (self.num_tokens,))
        patches = x.reshape(n, c, h // p, p, w // p, p).transpose(0, 2, 4, 1, 3, 5)
        patches = patches.reshape(n, tokens, c * p * p)
        embedded = self.proj(patches)
        pos = F.expand(self.pos.reshape((1,) + self.pos.shape), embedded.shape)
        return embedded + pos

    def forward(self, x: Tensor) -> Tensor:
        """
        Args:
            x: [C,H,W] 또는 [N,C,H,W]

        Returns:
            Tensor: [T, d_model] 또는 [N, T, d_model]
        """
        if x.ndim == 3:
            out = self._forward(x.reshape((1,) + x.shape))
            return out.reshape(out.shape[1:])
        if x.ndim != 4:
            raise ShapeError("[C,H,W] 또는 [N,C,H,W] 입력이 필요합니다", x.shape)
        return self._forward(x)
