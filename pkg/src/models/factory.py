"""
모델 팩토리
"""

import logging
from typing import Dict, Optional, Type

import numpy as np

from ..nn import count_parameters
from .backbones import Backbone, FPNClassifier, RANClassifier, TinyConvNeXt, TinyResNet, TinyViT
from .fusion import FusionModel
from .spec import ModelSpec

logger = logging.getLogger(__name__)

MODEL_REGISTRY: Dict[str, Type[Backbone]] = {
    "tiny-resnet": TinyResNet,
    "tiny-convnext": TinyConvNeXt,
    "tiny-vit": TinyViT,
    "ran": RANClassifier,
    "fpn": FPNClassifier,
    "fusion": FusionModel,
}


def build_model(spec: ModelSpec, rng: Optional[np.random.Generator] = None) -> Backbone:
    """
    사양에 맞는 모델 생성

    Args:
        spec: 모델 사양
        rng: 초기화 생성기 (None이면 spec.seed로 생성)

    Returns:
        Backbone: 초기화된 모델
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    model_cls = MODEL_REGISTRY[spec.arch]
    model = model_cls(spec, rng=rng)
    logger.info(f"모델 생성: {spec.arch}, 파라미터 {count_parameters(model):,}개")
    return model
