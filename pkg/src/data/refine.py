"""
ROI 정제 모듈
검출 주석을 이용한 데이터셋 정제 전략과 세그멘테이션 마스크 후처리
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd
from scipy import ndimage

from ..errors import ConfigurationError, ManifestError, ShapeError
from .manifest import SPLITS, DatasetManifest, DetectionBox, Sample

logger = logging.getLogger(__name__)

STRATEGIES = ("croginal-train", "crop-train", "crop-all-splits", "discard-all-splits")


def parse_annotations(path: Union[str, Path]) -> List[DetectionBox]:
    """
    YOLO 형식 주석 파일 파싱 (`class_id cx cy w h [confidence]`, 공백 구분)

    파일이 없거나 비어 있으면 검출 없음으로 본다.
    """
    path = Path(path)
    if not path.exists():
        return []
    try:
        df = pd.read_csv(path, sep=r"\s+", header=None, comment="#", dtype=str)
    except pd.errors.EmptyDataError:
        return []
    if df.shape[1] not in (5, 6):
        raise ManifestError(f"주석은 5개 또는 6개 열이어야 합니다: {path} ({df.shape[1]}개)")
    if df.shape[1] == 5:
        df[5] = "1.0"
    boxes = []
    for i, row in enumerate(df.itertuples(index=False)):
        try:
            class_id = int(row[0])
            cx, cy, w, h, confidence = (float(v) for v in row[1:6])
        except ValueError:
            raise ManifestError(f"주석 값을 해석할 수 없습니다: {path}", i + 1) from None
        boxes.append(DetectionBox(class_id, cx, cy, w, h, confidence))
    return boxes


def attach_annotations(manifest: DatasetManifest, ann_dir: Union[str, Path]) -> DatasetManifest:
    """각 샘플에 `<ann_dir>/<이미지 이름>.txt` 주석을 붙인 새 매니페스트"""
    ann_dir = Path(ann_dir)
    samples = [
        replace(s, annotations=parse_annotations(ann_dir / f"{s.sample_id}.txt"))
        for s in manifest.samples
    ]
    total = sum(len(s.annotations) for s in samples)
    logger.info(f"주석 로드: {ann_dir} (박스 {total}개)")
    return manifest.with_samples(samples)


def crop_sample(manifest: DatasetManifest, sample: Sample, boxes: List[DetectionBox]) -> List[Sample]:
    """
    박스마다 잘라낸 샘플 생성 (라벨 유지, 인라인 픽셀)

    경계를 이미지 가장자리로 자른 뒤 면적이 0이면 경고 후 건너뛴다.
    """
    image = manifest.load_image(sample)
    _, h, w = image.shape
    crops = []
    for k, box in enumerate(boxes):
        y0, y1, x0, x1 = box.to_pixels(h, w)
        if y1 <= y0 or x1 <= x0:
            logger.warning(f"'{sample.sample_id}' 박스 {k}가 면적 0으로 잘려 건너뜁니다: {box}")
            continue
        crops.append(
            Sample(
                label=sample.label,
                split=sample.split,
                pixels=image[:, y0:y1, x0:x1].copy(),
                sample_id=f"{sample.sample_id}_crop{k}",
            )
        )
    return crops


def refine(
    manifest: DatasetManifest,
    strategy: str,
    confidence_threshold: float = 0.5,
) -> DatasetManifest:
    """
    검출 박스 기반 데이터셋 정제

    신뢰도가 threshold 이상인 박스만 유효한 검출로 본다.

    Args:
        manifest: 주석이 붙은 매니페스트
        strategy: croginal-train | crop-train | crop-all-splits | discard-all-splits
        confidence_threshold: 신뢰도 기준 [0, 1]

    Returns:
        DatasetManifest: 정제된 매니페스트
    """
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"알 수 없는 정제 전략 '{strategy}' (가능: {', '.join(STRATEGIES)})")
    if not 0.0 <= confidence_threshold <= 1.0:
        raise ConfigurationError(f"신뢰도 기준은 [0, 1] 범위여야 합니다: {confidence_threshold}")

    crop_splits = {"croginal-train": ("train",), "crop-train": ("train",),
                   "crop-all-splits": SPLITS, "discard-all-splits": ()}[strategy]
    output: List[Sample] = []
    for sample in manifest.samples:
        boxes = [b for b in sample.annotations if b.confidence >= confidence_threshold]
        if strategy == "discard-all-splits":
            if boxes:
                output.append(sample)
            continue
        if sample.split not in crop_splits:
            output.append(sample)
            continue
        if strategy == "croginal-train":
            output.append(sample)
        output.extend(crop_sample(manifest, sample, boxes))

    refined = manifest.with_samples(output)
    logger.info(f"정제 완료 ({strategy}): {manifest.counts()} -> {refined.counts()}")
    return refined


@dataclass
class RefineSummary:
    strategy: str
    before: Dict[str, int]
    after: Dict[str, int]

    def print_summary(self) -> None:
        print("\n" + "=" * 60)
        print(f"정제 결과: {self.strategy}")
        print("=" * 60)
        for name in SPLITS:
            print(f"{name:.<30} {self.before[name]:>10,} -> {self.after[name]:>10,}")
        print(f"{'합계':.<30} {sum(self.before.values()):>10,} -> {sum(self.after.values()):>10,}")
        print("=" * 60 + "\n")


def mask_overlay(image: np.ndarray, label_image: np.ndarray) -> np.ndarray:
    """
    세그멘테이션 라벨 맵에서 가장 큰 영역만 남기기

    0을 포함한 모든 0 이상 라벨 값을 후보로 보고, 라벨별 4-연결 영역 중 픽셀 수가
    가장 큰 영역 하나만 남긴다 (동률이면 작은 라벨, 먼저 찾은 영역). 음수 라벨은
    명시적 배경으로 어떤 영역에도 속하지 않는다. 모든 픽셀이 음수면 결과는 0.

    Args:
        image: [3,H,W]
        label_image: [H,W] 정수 라벨 맵

    Returns:
        np.ndarray: image * mask (채널 방향 브로드캐스트)
    """
    if label_image.ndim != 2 or image.shape[-2:] != label_image.shape:
        raise ShapeError("라벨 맵 공간 크기 불일치", image.shape, label_image.shape)
    best_mask = np.zeros(label_image.shape, dtype=bool)
    best_size = 0
    for value in np.unique(label_image):
        if value < 0:
            continue
        components, count = ndimage.label(label_image == value)
        if count == 0:
            continue
        sizes = np.bincount(components.ravel())[1:]
        k = int(np.argmax(sizes))
        if sizes[k] > best_size:
            best_size = int(sizes[k])
            best_mask = components == k + 1
    return image * best_mask[None, :, :]
