"""
이미지 변환 모듈
정규화, 양선형 리사이즈, 데이터 증강 (뒤집기/회전/전단)
"""

import math
from dataclasses import dataclass, fields
from typing import Any, Dict, List

import numpy as np
from scipy import ndimage

from ..errors import ConfigurationError, ShapeError

IMAGENET_MEAN = np.array([0.485, 0.456, 0.406])
IMAGENET_STD = np.array([0.229, 0.224, 0.225])


@dataclass
class AugmentSpec:
    """
    데이터 증강 설정

    Attributes:
        horizontal_flip: 좌우 뒤집기 동전 던지기 사용
        vertical_flip: 상하 뒤집기 동전 던지기 사용
        rotation_degrees: 회전 각도 범위 [-r, +r] (도)
        shear: 전단 계수 범위 [-s, +s]
        apply_to_validation: 검증 데이터에도 증강 적용
    """

    horizontal_flip: bool = True
    vertical_flip: bool = True
    rotation_degrees: float = 10.0
    shear: float = 0.2
    apply_to_validation: bool = True

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    def problems(self) -> List[str]:
        problems = []
        if not 0.0 <= self.rotation_degrees < 180.0:
            problems.append(f"augment.rotation_degrees는 [0, 180) 범위여야 합니다: {self.rotation_degrees}")
        if self.shear < 0.0:
            problems.append(f"augment.shear는 0 이상이어야 합니다: {self.shear}")
        return problems

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "AugmentSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError([f"알 수 없는 augment 키: {k}" for k in unknown])
        return cls(**values)


def _check_rgb(image: np.ndarray) -> None:
    if image.ndim != 3 or image.shape[0] != 3:
        raise ShapeError("[3,H,W] 컬러 이미지가 필요합니다", image.shape)


def normalize(image: np.ndarray) -> np.ndarray:
    """채널별 (x - mean) / std (ImageNet 평균/표준편차)"""
    _check_rgb(image)
    return (image - IMAGENET_MEAN[:, None, None]) / IMAGENET_STD[:, None, None]


def denormalize(image: np.ndarray) -> np.ndarray:
    _check_rgb(image)
    return image * IMAGENET_STD[:, None, None] + IMAGENET_MEAN[:, None, None]


def resize(image: np.ndarray, height: int, width: int) -> np.ndarray:
    """
    양선형 리사이즈 (align_corners=False 샘플링, 가장자리 값 복제)

    Args:
        image: [C,H,W]
        height, width: 출력 크기

    Returns:
        np.ndarray: [C,height,width]
    """
    if image.ndim != 3 or image.shape[1] == 0 or image.shape[2] == 0:
        raise ShapeError("크기가 0이 아닌 [C,H,W] 이미지가 필요합니다", image.shape)
    if height < 1 or width < 1:
        raise ConfigurationError(f"리사이즈 출력 크기는 양수여야 합니다: {height}x{width}")
    _, h, w = image.shape
    if (h, w) == (height, width):
        return image.copy()
    rows = (np.arange(height) + 0.5) * (h / height) - 0.5
    cols = (np.arange(width) + 0.5) * (w / width) - 0.5
    grid = np.meshgrid(rows, cols, indexing="ij")
    return np.stack(
        [ndimage.map_coordinates(channel, grid, order=1, mode="nearest") for channel in image]
    )


def hflip(image: np.ndarray) -> np.ndarray:
    return image[..., ::-1].copy()


def vflip(image: np.ndarray) -> np.ndarray:
    return image[..., ::-1, :].copy()


def affine(image: np.ndarray, angle_degrees: float, shear: float) -> np.ndarray:
    """
    이미지 중심 기준 회전 + 전단 (양선형, 원본 밖은 0)

    출력 좌표 p에 대해 원본 좌표 = A^-1 (p - c) + c, A = R(angle) @ [[1, 0], [shear, 1]]
    좌표는 (행, 열) 순서.
    """
    _, h, w = image.shape
    theta = math.radians(angle_degrees)
    rotation = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    shear_matrix = np.array([[1.0, 0.0], [shear, 1.0]])
    inverse = np.linalg.inv(rotation @ shear_matrix)
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    offset = center - inverse @ center
    return np.stack(
        [
            ndimage.affine_transform(
                channel, inverse, offset=offset, order=1, mode="grid-constant", cval=0.0
            )
            for channel in image
        ]
    )


def augment(image: np.ndarray, spec: AugmentSpec, rng: np.random.Generator) -> np.ndarray:
    """
    무작위 증강

    난수는 좌우 동전, 상하 동전, 회전 각도, 전단 계수 순서로 (활성화된 항목만) 뽑는다.
    회전 각도와 전단 계수가 모두 0이면 리샘플링을 건너뛴다.
    """
    out = image
    if spec.horizontal_flip and rng.random() < 0.5:
        out = hflip(out)
    if spec.vertical_flip and rng.random() < 0.5:
        out = vflip(out)
    angle = rng.uniform(-spec.rotation_degrees, spec.rotation_degrees) if spec.rotation_degrees > 0 else 0.0
    shear = rng.uniform(-spec.shear, spec.shear) if spec.shear > 0 else 0.0
    if angle != 0.0 or shear != 0.0:
        out = affine(out, angle, shear)
    return out if out is not image else image.copy()
