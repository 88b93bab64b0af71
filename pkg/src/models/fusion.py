"""
이중 백본 융합 모델
두 분기의 전역 특징을 연결하여 분류기에 입력
"""

from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..nn import BatchNorm, Dropout, Linear, Module
from ..tensor import Tensor
from ..tensor import functional as F
from .backbones import Backbone, TinyConvNeXt, TinyViT
from .spec import ModelSpec


class FusionClassifier(Module):
    """
    융합 분류기: BN1d -> Linear -> ReLU -> Dropout -> BN1d -> Linear(head)

    Args:
        fused_width: 연결된 특징 폭 (첫 Linear 입력 폭)
        hidden: 은닉 폭
        num_classes: 출력 클래스 수
        rate: 드롭아웃 비율
    """

    def __init__(
        self,
        fused_width: int,
        hidden: int,
        num_classes: int,
        rate: float,
        rng: np.random.Generator,
        dropout_rng: np.random.Generator,
    ):
        super().__init__()
        self.bn1 = BatchNorm(fused_width)
        self.fc1 = Linear(fused_width, hidden, rng=rng)
        self.dropout = Dropout(rate, rng=dropout_rng)
        self.bn2 = BatchNorm(hidden)
        self.head = Linear(hidden, num_classes, rng=rng)

    def forward(self, x: Tensor) -> Tensor:
        x = self.dropout(self.fc1(self.bn1(x)).relu())
        return self.head(self.bn2(x))


class FusionModel(Backbone):
    """
    이중 백본 융합 모델

    forward(x) = classifier(concat(features_A(x), features_B(x)))
    기본 구성은 분기 A = tiny-convnext, 분기 B = tiny-vit.
    """

    head_path = "classifier.head"

    def __init__(
        self,
        spec: ModelSpec,
        branch_a: Optional[Backbone] = None,
        branch_b: Optional[Backbone] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        rng = rng if rng is not None else np.random.default_rng(spec.seed)
        branch_a = branch_a or TinyConvNeXt(spec.with_updates(arch="tiny-convnext"), False, rng)
        branch_b = branch_b or TinyViT(spec.with_updates(arch="tiny-vit"), False, rng)
        if branch_a.spec.input_shape != branch_b.spec.input_shape:
            raise ConfigurationError(
                f"분기 입력 사양 불일치: {branch_a.spec.input_shape} vs {branch_b.spec.input_shape}"
            )
        fused = branch_a.feature_width + branch_b.feature_width
        super().__init__(spec, fused, with_head=False, rng=rng)
        self.branch_a = branch_a
        self.branch_b = branch_b
        self.hidden = spec.hidden if spec.hidden is not None else max(1, fused // 2)
        self.classifier = FusionClassifier(
            fused, self.hidden, spec.num_classes, spec.dropout, self._rng, self.dropout_rng
        )

    @property
    def head(self) -> Linear:
        return self.classifier.head

    def features(self, x: Tensor) -> Tensor:
        a = self.branch_a.features(x)
        b = self.branch_b.features(x)
        for prefix, branch in (("branch_a", self.branch_a), ("branch_b", self.branch_b)):
            for name, fmap in branch.feature_maps.items():
                self._record(f"{prefix}.{name}", fmap)
        return F.concat([a, b], axis=1)

    def forward(self, x: Tensor) -> Tensor:
        self.check_input(x)
        self.feature_maps = {}
        return self.classifier(self.features(x))


def build_fusion(
    branch_a: Backbone,
    branch_b: Backbone,
    spec: ModelSpec,
    rng: Optional[np.random.Generator] = None,
) -> FusionModel:
    """
    두 특징 추출기로 융합 모델 구성

    Args:
        branch_a: 분기 A (헤드 없이 생성된 Backbone)
        branch_b: 분기 B
        spec: 융합 모델 사양 (num_classes, hidden, dropout)

    Returns:
        FusionModel: 융합 모델
    """
    return FusionModel(spec, branch_a, branch_b, rng)
