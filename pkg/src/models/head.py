"""
전이 학습용 헤드 교체와 백본 동결/해제
"""

import logging
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, ContractError
from ..nn import Linear, Module
from .backbones import Backbone

logger = logging.getLogger(__name__)


def replace_head(
    model: Module,
    new_num_classes: int,
    freeze_backbone: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Module:
    """
    최종 선형 레이어를 새 클래스 수의 레이어로 교체

    Args:
        model: head_path로 지정된 최종 Linear를 가진 모델
        new_num_classes: 새 출력 노드 수
        freeze_backbone: True면 헤드 이외 파라미터를 옵티마이저 갱신에서 제외
        rng: 새 헤드 초기화 생성기

    Returns:
        Module: 헤드가 교체된 모델 (같은 객체)
    """
    head_path = getattr(model, "head_path", None)
    if not isinstance(model, Backbone) or head_path is None:
        raise ContractError(f"{type(model).__name__}에는 지정된 분류 헤드가 없습니다")
    if new_num_classes < 2:
        raise ConfigurationError(f"클래스 수는 2 이상이어야 합니다: {new_num_classes}")
    old = model.get_submodule(head_path)
    if not isinstance(old, Linear):
        raise ContractError(f"'{head_path}'가 Linear 레이어가 아닙니다")

    rng = rng if rng is not None else np.random.default_rng(model.spec.seed + 3)
    model.set_submodule(head_path, Linear(old.in_features, new_num_classes, rng=rng))
    model.spec = model.spec.with_updates(num_classes=new_num_classes)

    head_prefix = f"{head_path}."
    for name, p in model.named_parameters():
        p.trainable = name.startswith(head_prefix) or not freeze_backbone
    logger.info(
        f"헤드 교체: {old.out_features} -> {new_num_classes} 클래스"
        + (" (백본 동결)" if freeze_backbone else "")
    )
    return model


def unfreeze(model: Module) -> Module:
    """모든 파라미터를 다시 학습 대상으로 설정 (미세 조정 단계)"""
    for p in model.parameters():
        p.trainable = True
    return model
