"""
FPN (Feature Pyramid Network) 특징 융합
"""

from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..nn import Conv2d, Module
from ..tensor import Tensor
from ..tensor import functional as F


def fpn_fuse(
    features: Sequence[Tensor],
    laterals: Sequence[Conv2d],
    smooths: Sequence[Conv2d],
) -> List[Tensor]:
    """
    상위(저해상도) 레벨부터 하향식으로 특징 융합

    최상위 레벨은 lateral 후 3x3 smooth만 적용하고, 이후 각 레벨은
    lateral(level) + upsample_nearest(이전 출력, 2) 에 3x3 smooth를 적용한다.

    Args:
        features: coarse-to-fine 순서의 [C_i,H_i,W_i] (또는 배치) 특징 목록
        laterals: 레벨별 1x1 합성곱 (C_i -> d)
        smooths: 레벨별 3x3 합성곱 (d -> d, padding 1)

    Returns:
        List[Tensor]: 레벨별 [d,H_i,W_i]
    """
    if not features:
        raise ConfigurationError("FPN에 입력 특징이 없습니다")
    if len(features) != len(laterals) or len(features) != len(smooths):
        raise ConfigurationError(
            f"FPN 레벨 수 불일치: 특징 {len(features)}, lateral {len(laterals)}, smooth {len(smooths)}"
        )
    for level in range(1, len(features)):
        prev_hw = features[level - 1].shape[-2:]
        hw = features[level].shape[-2:]
        if hw != (2 * prev_hw[0], 2 * prev_hw[1]):
            raise ConfigurationError(
                f"FPN 레벨 {level}의 공간 크기 {hw}가 이전 레벨 {prev_hw}의 2배가 아닙니다"
            )

    outputs: List[Tensor] = []
    previous: Optional[Tensor] = None
    for feature, lateral, smooth in zip(features, laterals, smooths):
        merged = lateral(feature)
        if previous is not None:
            merged = merged + F.upsample_nearest(previous, 2)
        previous = smooth(merged)
        outputs.append(previous)
    return outputs


class FPN(Module):
    """
    특징 피라미드 네트워크

    Args:
        in_channels: coarse-to-fine 순서의 레벨별 입력 채널 수
        out_channels: 공통 출력 채널 수 d
    """

    def __init__(
        self,
        in_channels: Sequence[int],
        out_channels: int,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        self.laterals = [Conv2d(c, out_channels, 1, rng=rng) for c in in_channels]
        self.smooths = [
            Conv2d(out_channels, out_channels, 3, padding=1, rng=rng) for _ in in_channels
        ]

    def forward(self, features: Sequence[Tensor]) -> List[Tensor]:
        return fpn_fuse(features, self.laterals, self.smooths)
