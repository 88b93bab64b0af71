"""
이미지 입출력 (PPM P6 / PGM P5, 8비트)
"""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from ..errors import ManifestError, ShapeError

PathLike = Union[str, Path]


def to_uint8(values: np.ndarray) -> np.ndarray:
    """[0, 1] 실수를 round(255 v) 8비트로 변환"""
    return np.rint(255.0 * np.clip(values, 0.0, 1.0)).astype(np.uint8)


def read_ppm(path: PathLike) -> np.ndarray:
    """
    컬러 이미지 읽기

    Returns:
        np.ndarray: [3,H,W] float64, 값 범위 [0, 1]
    """
    try:
        with Image.open(path) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError) as e:
        raise ManifestError(f"이미지를 읽을 수 없습니다: {path} ({e})") from None
    return np.ascontiguousarray(pixels.transpose(2, 0, 1) / 255.0)


def write_ppm(image: np.ndarray, path: PathLike) -> Path:
    """[3,H,W] 이미지를 바이너리 PPM(P6)으로 저장"""
    if image.ndim != 3 or image.shape[0] != 3:
        raise ShapeError("PPM 저장에는 [3,H,W] 이미지가 필요합니다", image.shape)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(to_uint8(image).transpose(1, 2, 0))).save(path, format="PPM")
    return path


def read_pgm(path: PathLike) -> np.ndarray:
    """그레이스케일 PGM을 정수 맵 [H,W]로 읽기 (세그멘테이션 라벨 맵)"""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("L"), dtype=np.int64)
    except (OSError, ValueError) as e:
        raise ManifestError(f"마스크를 읽을 수 없습니다: {path} ({e})") from None


def write_pgm(values: np.ndarray, path: PathLike) -> Path:
    """[H,W] 값(범위 [0, 1])을 바이너리 PGM(P5)으로 저장"""
    if values.ndim != 2:
        raise ShapeError("PGM 저장에는 [H,W] 배열이 필요합니다", values.shape)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(values)).save(path, format="PPM")
    return path
