"""
Grad-CAM 히트맵 계산
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from ..data.image_io import write_pgm
from ..errors import ConfigurationError, ShapeError
from ..tensor import Tensor
from .backbones import Backbone

logger = logging.getLogger(__name__)


def normalize_heatmap(cam: np.ndarray) -> np.ndarray:
    """
    min-max 정규화로 [0, 1] 범위로 변환

    값이 모두 같은 맵은 0이면 전부 0, 양수면 전부 1로 둔다.
    """
    lo, hi = float(cam.min()), float(cam.max())
    if hi > lo:
        return (cam - lo) / (hi - lo)
    return np.zeros_like(cam) if hi == 0.0 else np.ones_like(cam)


def grad_cam(model: Backbone, image, target_class: int, layer_name: str) -> Tensor:
    """
    Grad-CAM 히트맵

    alpha_c = 목표 클래스 점수의 feature_c 그래디언트 전역 평균,
    heatmap = relu(sum_c alpha_c * feature_c) 를 [0, 1]로 정규화한다.

    Args:
        model: 이름 있는 특징 맵을 기록하는 모델
        image: [C,H,W] 이미지 (ndarray 또는 Tensor)
        target_class: 목표 클래스
        layer_name: feature_maps 이름 (예: 'block2')

    Returns:
        Tensor: [H', W'] 히트맵
    """
    data = image.data if isinstance(image, Tensor) else np.asarray(image, dtype=np.float64)
    if data.ndim == 3:
        data = data[None]
    if data.ndim != 4 or data.shape[0] != 1:
        raise ShapeError("grad_cam 입력은 이미지 한 장이어야 합니다", data.shape)
    if not 0 <= target_class < model.spec.num_classes:
        raise ConfigurationError(
            f"목표 클래스 {target_class}가 범위 [0, {model.spec.num_classes})를 벗어났습니다"
        )

    was_training = model.training
    model.eval()
    try:
        logits = model(Tensor(data))
        if layer_name not in model.feature_maps:
            raise ConfigurationError(
                f"알 수 없는 레이어 '{layer_name}' (가능: {', '.join(model.feature_map_names())})"
            )
        fmap = model.feature_maps[layer_name]
        if fmap.ndim != 4:
            raise ConfigurationError(f"'{layer_name}'는 합성곱 특징 맵이 아닙니다: shape {fmap.shape}")
        selector = np.zeros(logits.shape)
        selector[0, target_class] = 1.0
        score = (logits * Tensor(selector)).sum()
        score.backward()
        grads = fmap.grad[0]
        feature = fmap.data[0]
        alpha = grads.mean(axis=(1, 2))
        cam = np.maximum(np.tensordot(alpha, feature, axes=(0, 0)), 0.0)
    finally:
        model.zero_grad()
        model.train(was_training)
    return Tensor(normalize_heatmap(cam))


def save_heatmap(heatmap: Union[Tensor, np.ndarray], path: Union[str, Path]) -> Path:
    """히트맵을 8비트 PGM(P5)으로 저장 (값 v -> round(255 v))"""
    values = heatmap.data if isinstance(heatmap, Tensor) else np.asarray(heatmap)
    path = write_pgm(values, path)
    logger.info(f"Grad-CAM 히트맵 저장: {path}")
    return path
