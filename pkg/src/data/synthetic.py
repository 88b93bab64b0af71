"""
합성 데이터셋 생성기
클래스별 기하 패턴(원판/막대/체커) 이미지, 검출 박스, 매니페스트
"""

import colorsys
import logging
import math
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.linear_model import LinearRegression

from ..errors import ConfigurationError
from .image_io import write_ppm
from .manifest import DatasetManifest, DetectionBox, Sample, save_manifest, split_dataset

logger = logging.getLogger(__name__)

PATTERNS = ("disk", "bar", "checker")


def _class_layout(k: int, num_classes: int, size: int) -> Tuple[str, Tuple[int, int, int, int], np.ndarray]:
    """클래스 k의 패턴 종류, 셀 경계 (y0, y1, x0, x1), 색상"""
    pattern = PATTERNS[k % 3]
    slots = math.ceil(num_classes / 3)
    grid = math.ceil(math.sqrt(slots))
    cell = size // grid
    if cell < 2:
        raise ConfigurationError(f"이미지 크기 {size}가 클래스 {num_classes}개 배치에 너무 작습니다")
    slot = k // 3
    y0, x0 = (slot // grid) * cell, (slot % grid) * cell
    color = np.array(colorsys.hsv_to_rgb(k / num_classes, 0.8, 0.9))
    return pattern, (y0, y0 + cell, x0, x0 + cell), color


def _draw(pattern: str, cell: int) -> np.ndarray:
    yy, xx = np.mgrid[0:cell, 0:cell]
    center = (cell - 1) / 2.0
    if pattern == "disk":
        return ((yy - center) ** 2 + (xx - center) ** 2 <= (cell / 2.5) ** 2).astype(np.float64)
    if pattern == "bar":
        return (np.abs(xx - center) <= max(cell / 8.0, 0.5)).astype(np.float64)
    block = max(cell // 4, 1)
    return (((yy // block) + (xx // block)) % 2 == 0).astype(np.float64)


def render_class_image(
    k: int, num_classes: int, size: int, rng: np.random.Generator, noise: float = 0.03
) -> Tuple[np.ndarray, DetectionBox]:
    """
    클래스 k의 이미지 한 장과 정답 박스

    Returns:
        (이미지 [3,size,size], 패턴 셀을 감싸는 박스)
    """
    pattern, (y0, y1, x0, x1), color = _class_layout(k, num_classes, size)
    image = np.zeros((3, size, size))
    shape = _draw(pattern, y1 - y0)
    image[:, y0:y1, x0:x1] = color[:, None, None] * shape[None]
    image = np.clip(image + rng.normal(0.0, noise, image.shape), 0.0, 1.0)
    box = DetectionBox(
        class_id=k,
        cx=(x0 + x1) / 2.0 / size,
        cy=(y0 + y1) / 2.0 / size,
        w=(x1 - x0) / size,
        h=(y1 - y0) / size,
        confidence=1.0,
    )
    return image, box


def generate_synthetic(
    out_dir: Union[str, Path],
    num_classes: int = 3,
    per_class: int = 100,
    size: int = 16,
    seed: int = 0,
    ratios: Sequence[float] = (6, 1, 3),
) -> DatasetManifest:
    """
    합성 데이터셋 생성

    <out_dir>/images/*.ppm, <out_dir>/annotations/*.txt, <out_dir>/manifest.csv 를 기록한다.

    Args:
        out_dir: 출력 디렉토리
        num_classes: 클래스 수
        per_class: 클래스당 샘플 수
        size: 이미지 한 변 크기
        seed: 난수 시드

    Returns:
        DatasetManifest: 층화 분할된 매니페스트
    """
    if num_classes < 2 or per_class < 1 or size < 2:
        raise ConfigurationError(
            f"합성 데이터 파라미터가 잘못되었습니다: classes={num_classes}, per_class={per_class}, size={size}"
        )
    out_dir = Path(out_dir)
    image_dir = out_dir / "images"
    ann_dir = out_dir / "annotations"
    ann_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    samples = []
    for k in range(num_classes):
        for i in range(per_class):
            sample_id = f"c{k:03d}_{i:05d}"
            image, box = render_class_image(k, num_classes, size, rng)
            write_ppm(image, image_dir / f"{sample_id}.ppm")
            line = " ".join(
                [str(box.class_id)] + [f"{v:.17g}" for v in (box.cx, box.cy, box.w, box.h, box.confidence)]
            )
            (ann_dir / f"{sample_id}.txt").write_text(line + "\n", encoding="utf-8")
            samples.append(
                Sample(label=k, split="train", path=f"images/{sample_id}.ppm", sample_id=sample_id)
            )

    samples = split_dataset(samples, ratios, seed)
    manifest = DatasetManifest(samples, out_dir, num_classes)
    save_manifest(manifest, out_dir / "manifest.csv")
    logger.info(f"합성 데이터 생성: {out_dir} ({len(samples)}개, {manifest.counts()})")
    return manifest


def linear_probe_accuracy(manifest: DatasetManifest, split: str = "train") -> float:
    """
    원시 픽셀 위 최소제곱 선형 프로브의 정확도 (선형 분리 가능성 확인용)

    one-hot 타깃에 LinearRegression을 맞춘 뒤 같은 split에서 argmax 정확도를 잰다.
    """
    samples = manifest.split(split)
    if not samples:
        raise ConfigurationError(f"'{split}' split이 비어 있습니다")
    features = np.stack([manifest.load_image(s).reshape(-1) for s in samples])
    labels = np.array([s.label for s in samples])
    targets = pd.get_dummies(pd.Categorical(labels, categories=range(manifest.num_classes))).to_numpy(float)
    probe = LinearRegression().fit(features, targets)
    predicted = probe.predict(features).argmax(axis=1)
    return float(np.mean(predicted == labels))
