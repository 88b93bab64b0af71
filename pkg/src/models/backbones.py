"""
데스크 규모 백본 모델
tiny-resnet, tiny-convnext, tiny-vit, RAN, FPN 분류기
"""

from abc import abstractmethod
from typing import Dict, List, Optional

import numpy as np

from ..attention import CBAM, FPN, AttentionModule, EncoderLayer
from ..errors import ContractError, ShapeError
from ..nn import BatchNorm, Conv2d, ConvNeXtBlock, LayerNorm, Linear, Module, PatchEmbed, ResidualBlock
from ..tensor import Tensor
from ..tensor import functional as F
from .spec import ModelSpec


class Backbone(Module):
    """
    분류 모델 기본 클래스

    features()가 [N, feature_width] 전역 특징을 만들고 head(Linear)가 로짓을 만든다.
    합성곱 특징 맵은 이름과 함께 feature_maps에 기록되어 Grad-CAM에서 참조된다.
    """

    head_path = "head"

    def __init__(self, spec: ModelSpec, feature_width: int, with_head: bool = True,
                 rng: Optional[np.random.Generator] = None):
        super().__init__()
        self.spec = spec
        self.feature_width = feature_width
        self.feature_maps: Dict[str, Tensor] = {}
        self.dropout_rng = np.random.default_rng(spec.seed + 2)
        self._rng = rng if rng is not None else np.random.default_rng(spec.seed)
        self._with_head = with_head

    def _attach_head(self) -> None:
        # 헤드는 백본 파라미터 뒤에 등록되어 state_dict 순서의 마지막에 온다
        self.head: Optional[Linear] = (
            Linear(self.feature_width, self.spec.num_classes, rng=self._rng)
            if self._with_head
            else None
        )

    def _record(self, name: str, t: Tensor) -> Tensor:
        self.feature_maps[name] = t
        return t

    def feature_map_names(self) -> List[str]:
        return list(self.feature_maps)

    def check_input(self, x: Tensor) -> None:
        if x.ndim != 4 or x.shape[1:] != self.spec.input_shape:
            raise ShapeError(
                "입력 배치가 모델 입력 사양과 다릅니다", x.shape, (-1,) + self.spec.input_shape
            )

    @abstractmethod
    def features(self, x: Tensor) -> Tensor:
        """
        전역 특징 추출 (추상 메서드)

        Args:
            x: [N,C,H,W]

        Returns:
            Tensor: [N, feature_width]
        """
        pass

    def forward(self, x: Tensor) -> Tensor:
        head = getattr(self, "head", None)
        if head is None:
            raise ContractError(f"{type(self).__name__}에 분류 헤드가 없습니다")
        self.check_input(x)
        self.feature_maps = {}
        return head(self.features(x))


class TinyResNet(Backbone):
    """stem(conv3x3-BN-relu) + 잔차 블록 depth개 (+선택적 CBAM) + GAP"""

    def __init__(self, spec: ModelSpec, with_head: bool = True,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(spec, spec.channels, with_head, rng)
        rng = self._rng
        w = spec.channels
        self.stem_conv = Conv2d(spec.in_channels, w, 3, padding=1, bias=False, rng=rng)
        self.stem_bn = BatchNorm(w)
        self.blocks = [ResidualBlock(w, w, rng=rng) for _ in range(spec.depth)]
        self.attention = (
            [CBAM(w, spec.reduction, rng=rng) for _ in range(spec.depth)] if spec.cbam else []
        )
        self._attach_head()

    def features(self, x: Tensor) -> Tensor:
        x = self._record("stem", self.stem_bn(self.stem_conv(x)).relu())
        for i, block in enumerate(self.blocks):
            x = block(x)
            if self.attention:
                x = self.attention[i](x)
            x = self._record(f"block{i + 1}", x)
        return F.global_pool("avg", x)


class TinyConvNeXt(Backbone):
    """2x2 stride-2 stem + ConvNeXt 블록 depth개 + GAP + LayerNorm"""

    def __init__(self, spec: ModelSpec, with_head: bool = True,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(spec, spec.channels, with_head, rng)
        rng = self._rng
        w = spec.channels
        self.stem = Conv2d(spec.in_channels, w, 2, stride=2, rng=rng)
        self.blocks = [ConvNeXtBlock(w, rng=rng) for _ in range(spec.depth)]
        self.norm = LayerNorm(w)
        self._attach_head()

    def features(self, x: Tensor) -> Tensor:
        x = self._record("stem", self.stem(x))
        for i, block in enumerate(self.blocks):
            x = self._record(f"block{i + 1}", block(x))
        return self.norm(F.global_pool("avg", x))


class TinyViT(Backbone):
    """패치 임베딩 + pre-norm 인코더 depth개 + LayerNorm + 토큰 평균"""

    def __init__(self, spec: ModelSpec, with_head: bool = True,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(spec, spec.d_model, with_head, rng)
        rng = self._rng
        self.embed = PatchEmbed(
            spec.in_channels, (spec.height, spec.width), spec.patch, spec.d_model, rng=rng
        )
        self.encoders = [
            EncoderLayer(spec.d_model, spec.heads, spec.mlp_ratio, rng=rng)
            for _ in range(spec.depth)
        ]
        self.norm = LayerNorm(spec.d_model)
        self._attach_head()

    def features(self, x: Tensor) -> Tensor:
        tokens = self.embed(x)
        for encoder in self.encoders:
            tokens = encoder(tokens)
        return self.norm(tokens).mean(axis=1)


class RANClassifier(Backbone):
    """stem + RAN 어텐션 모듈 ran_modules개 + GAP"""

    def __init__(self, spec: ModelSpec, with_head: bool = True,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(spec, spec.channels, with_head, rng)
        rng = self._rng
        w = spec.channels
        self.stem_conv = Conv2d(spec.in_channels, w, 3, padding=1, bias=False, rng=rng)
        self.stem_bn = BatchNorm(w)
        self.attention_modules = [
            AttentionModule(w, spec.depth, rng=rng) for _ in range(spec.ran_modules)
        ]
        self._attach_head()

    def features(self, x: Tensor) -> Tensor:
        x = self._record("stem", self.stem_bn(self.stem_conv(x)).relu())
        for i, module in enumerate(self.attention_modules):
            x = self._record(f"attention{i + 1}", module(x))
        return F.global_pool("avg", x)


class FPNClassifier(Backbone):
    """
    3단 피라미드(stem, 1/2, 1/4) + FPN 융합 + 레벨별 GAP 연결

    출력 특징 폭은 3 * fpn_dim.
    """

    def __init__(self, spec: ModelSpec, with_head: bool = True,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(spec, 3 * spec.fpn_dim, with_head, rng)
        rng = self._rng
        w = spec.channels
        self.stem_conv = Conv2d(spec.in_channels, w, 3, padding=1, bias=False, rng=rng)
        self.stem_bn = BatchNorm(w)
        self.down1 = Conv2d(w, 2 * w, 2, stride=2, rng=rng)
        self.down2 = Conv2d(2 * w, 4 * w, 2, stride=2, rng=rng)
        self.fpn = FPN([4 * w, 2 * w, w], spec.fpn_dim, rng=rng)
        self._attach_head()

    def features(self, x: Tensor) -> Tensor:
        c1 = self._record("stem", self.stem_bn(self.stem_conv(x)).relu())
        c2 = self._record("down1", self.down1(c1).relu())
        c3 = self._record("down2", self.down2(c2).relu())
        levels = self.fpn([c3, c2, c1])
        for i, level in enumerate(levels):
            self._record(f"fpn{i + 1}", level)
        return F.concat([F.global_pool("avg", level) for level in levels], axis=1)
