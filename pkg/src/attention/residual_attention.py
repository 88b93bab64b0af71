"""
잔차 어텐션 (Residual Attention Network)
트렁크 분기와 마스크 분기를 (1 + M) * F 로 결합
"""

from typing import List, Optional

import numpy as np

from ..errors import ShapeError
from ..nn import Conv2d, Module, ResidualBlock
from ..nn.blocks import batched
from ..tensor import Tensor
from ..tensor import functional as F


def residual_attention(trunk: Tensor, mask: Tensor) -> Tensor:
    """
    H = (1 + M) * F

    Args:
        trunk: 트렁크 분기 출력 F
        mask: 시그모이드로 끝나는 마스크 분기 출력 M (F와 같은 형상)
    """
    if trunk.shape != mask.shape:
        raise ShapeError("트렁크/마스크 형상 불일치", trunk.shape, mask.shape)
    return (mask + 1.0) * trunk


class AttentionModule(Module):
    """
    RAN 어텐션 모듈

    트렁크: 잔차 블록 trunk_depth개
    마스크: max-pool 2x2 -> 잔차 블록 -> 최근접 업샘플 2배 -> 1x1 합성곱 -> sigmoid

    Args:
        channels: 입력/출력 채널 수
        trunk_depth: 트렁크 잔차 블록 개수
    """

    def __init__(
        self,
        channels: int,
        trunk_depth: int = 2,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        self.trunk: List[ResidualBlock] = [
            ResidualBlock(channels, channels, rng=rng) for _ in range(trunk_depth)
        ]
        self.mask_block = ResidualBlock(channels, channels, rng=rng)
        self.mask_conv = Conv2d(channels, channels, 1, rng=rng)
        self.last_mask: Optional[np.ndarray] = None

    def trunk_branch(self, x: Tensor) -> Tensor:
        for block in self.trunk:
            x = block(x)
        return x

    def mask_branch(self, x: Tensor) -> Tensor:
        down = F.pool2d("max", x, 2, 2, 2)
        up = F.upsample_nearest(self.mask_block(down), 2)
        return self.mask_conv(up).sigmoid()

    def _forward(self, x: Tensor) -> Tensor:
        trunk = self.trunk_branch(x)
        mask = self.mask_branch(x)
        self.last_mask = mask.data
        return residual_attention(trunk, mask)

    def forward(self, x: Tensor) -> Tensor:
        return batched(self._forward, x)
