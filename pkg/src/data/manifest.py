"""
데이터셋 매니페스트 모듈
샘플/검출 박스 타입, CSV 로드/저장, 층화 분할, 클래스 분포
"""

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import ConfigurationError, ManifestError
from .image_io import read_ppm, write_ppm

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class DetectionBox:
    """
    YOLO 형식 검출 박스 (중심 정규화 좌표)

    Attributes:
        class_id: 검출 클래스
        cx, cy, w, h: [0, 1] 범위의 중심/크기
        confidence: 신뢰도 [0, 1]
    """

    class_id: int
    cx: float
    cy: float
    w: float
    h: float
    confidence: float = 1.0

    def __post_init__(self):
        left, right = max(self.cx - self.w / 2, 0.0), min(self.cx + self.w / 2, 1.0)
        top, bottom = max(self.cy - self.h / 2, 0.0), min(self.cy + self.h / 2, 1.0)
        if self.w <= 0 or self.h <= 0 or right <= left or bottom <= top:
            raise ManifestError(f"박스가 단위 정사각형과 겹치지 않습니다: {self}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ManifestError(f"신뢰도는 [0, 1] 범위여야 합니다: {self.confidence}")

    def to_pixels(self, height: int, width: int) -> Tuple[int, int, int, int]:
        """픽셀 경계 (y0, y1, x0, x1), 이미지 가장자리로 잘라냄"""
        x0 = max(0, math.floor((self.cx - self.w / 2) * width))
        x1 = min(width, math.ceil((self.cx + self.w / 2) * width))
        y0 = max(0, math.floor((self.cy - self.h / 2) * height))
        y1 = min(height, math.ceil((self.cy + self.h / 2) * height))
        return y0, y1, x0, x1


@dataclass
class Sample:
    """
    라벨이 있는 이미지 레코드

    path가 None이면 pixels(인라인 [3,H,W] 버퍼)를 사용한다 (잘라낸 샘플).
    """

    label: int
    split: str
    path: Optional[str] = None
    pixels: Optional[np.ndarray] = None
    annotations: List[DetectionBox] = field(default_factory=list)
    sample_id: str = ""

    def load(self, root: Optional[Path] = None) -> np.ndarray:
        if self.pixels is not None:
            return self.pixels
        if self.path is None:
            raise ManifestError(f"샘플 '{self.sample_id}'에 이미지가 없습니다")
        path = Path(self.path)
        if root is not None and not path.is_absolute():
            path = root / path
        return read_ppm(path)


@dataclass
class DatasetManifest:
    """샘플 목록과 이미지 경로 기준 디렉토리"""

    samples: List[Sample]
    root: Path = field(default_factory=Path)
    num_classes: Optional[int] = None

    def __post_init__(self):
        if self.num_classes is None:
            self.num_classes = max((s.label for s in self.samples), default=-1) + 1

    def split(self, name: str) -> List[Sample]:
        return [s for s in self.samples if s.split == name]

    def counts(self) -> Dict[str, int]:
        return {name: sum(1 for s in self.samples if s.split == name) for name in SPLITS}

    def load_image(self, sample: Sample) -> np.ndarray:
        return sample.load(self.root)

    def with_samples(self, samples: List[Sample]) -> "DatasetManifest":
        return DatasetManifest(samples, self.root, self.num_classes)

    def print_summary(self, title: str = "데이터셋 요약") -> None:
        counts = self.counts()
        total = sum(counts.values())
        print("\n" + "=" * 60)
        print(title)
        print("=" * 60)
        print(f"{'클래스 수':.<30} {self.num_classes:>10}")
        for name in SPLITS:
            share = counts[name] / total * 100 if total else 0.0
            print(f"{name:.<30} {counts[name]:>10,} ({share:5.1f}%)")
        print(f"{'합계':.<30} {total:>10,}")
        print("=" * 60 + "\n")


def load_manifest(
    path: Union[str, Path],
    num_classes: Optional[int] = None,
    check_images: bool = True,
) -> DatasetManifest:
    """
    매니페스트 CSV 로드 (헤더 `path,label,split`)

    Args:
        path: CSV 경로 (이미지 상대 경로의 기준 디렉토리)
        num_classes: 클래스 수 (None이면 라벨 최댓값 + 1)
        check_images: 이미지 파일 존재 확인 여부

    Returns:
        DatasetManifest: 로드된 매니페스트
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ManifestError(f"매니페스트를 읽을 수 없습니다: {path} ({e})") from None
    missing = [c for c in ("path", "label", "split") if c not in df.columns]
    if missing:
        raise ManifestError(f"매니페스트 헤더에 {', '.join(missing)} 열이 없습니다", 1)

    root = path.parent
    samples = []
    seen_dirs: Dict[Path, set] = {}
    for i, row in enumerate(df.itertuples(index=False)):
        line = i + 2
        if row.split not in SPLITS:
            raise ManifestError(f"알 수 없는 split '{row.split}'", line)
        try:
            label = int(row.label)
        except ValueError:
            raise ManifestError(f"라벨이 정수가 아닙니다: '{row.label}'", line) from None
        if label < 0 or (num_classes is not None and label >= num_classes):
            raise ManifestError(f"라벨 {label}이 범위를 벗어났습니다", line)
        if check_images:
            image_path = root / row.path
            # 디렉토리 목록을 한 번만 읽어 존재 여부를 확인
            listing = seen_dirs.get(image_path.parent)
            if listing is None:
                parent = image_path.parent
                listing = {p.name for p in parent.iterdir()} if parent.is_dir() else set()
                seen_dirs[parent] = listing
            if image_path.name not in listing:
                raise ManifestError(f"이미지를 찾을 수 없습니다: {row.path}", line)
        samples.append(Sample(label=label, split=row.split, path=row.path, sample_id=Path(row.path).stem))

    manifest = DatasetManifest(samples, root, num_classes)
    logger.info(f"매니페스트 로드: {path} ({len(samples)}개 샘플, {manifest.counts()})")
    return manifest


def save_manifest(
    manifest: DatasetManifest,
    path: Union[str, Path],
    image_dir: Optional[Union[str, Path]] = None,
) -> Path:
    """
    매니페스트 CSV 저장

    인라인 픽셀 샘플(잘라낸 이미지)은 image_dir(기본: CSV 옆 images/)에 PPM으로 기록한다.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    image_dir = Path(image_dir) if image_dir is not None else path.parent / "images"
    rows = []
    for sample in manifest.samples:
        if sample.pixels is not None:
            target = write_ppm(sample.pixels, image_dir / f"{sample.sample_id}.ppm")
            ref = Path(target).resolve().relative_to(path.parent.resolve()).as_posix()
        else:
            source = Path(sample.path)
            if not source.is_absolute():
                source = manifest.root / source
            try:
                ref = source.resolve().relative_to(path.parent.resolve()).as_posix()
            except ValueError:
                ref = source.resolve().as_posix()
        rows.append({"path": ref, "label": sample.label, "split": sample.split})
    pd.DataFrame(rows, columns=["path", "label", "split"]).to_csv(path, index=False)
    logger.info(f"매니페스트 저장: {path} ({len(rows)}개 샘플)")
    return path


def split_dataset(
    samples: Sequence[Sample],
    ratios: Sequence[float] = (6, 1, 3),
    seed: int = 0,
) -> List[Sample]:
    """
    클래스별 층화 분할 (train:val:test)

    전체 val/test 개수는 floor(N * 비율)로 정하고 나머지는 train에 둔다.
    각 클래스의 val/test 몫은 내림 후 남은 개수를 소수부가 큰 클래스부터
    하나씩 배분하므로 클래스별 개수는 전체 비율에서 1개 이내로 벗어난다.
    한 클래스의 val+test 합이 ceil(크기 * (val+test 비율))에 이르면 더 배분하지
    않고 남는 몫은 train에 둔다.
    클래스 내부 순서는 시드로 섞은 뒤 train, val, test 순으로 연속 배정한다.

    Args:
        samples: 분할할 샘플
        ratios: (train, val, test) 비율
        seed: 셔플 시드

    Returns:
        List[Sample]: split이 채워진 샘플 (입력 순서 유지)
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or sum(ratios) <= 0:
        raise ConfigurationError(f"분할 비율은 음수가 아닌 3개 값이어야 합니다: {tuple(ratios)}")
    # 소수 비율도 정확히 계산하도록 유리수로 변환
    exact = [Fraction(str(r)) for r in ratios]
    total_ratio = sum(exact)
    n = len(samples)
    labels = np.array([s.label for s in samples], dtype=np.int64)
    classes = sorted(set(labels.tolist()))
    class_sizes = [int(np.sum(labels == c)) for c in classes]

    # val, test 순서로 배분 (train은 나머지)
    # 클래스별 val+test 합은 ceil(크기 * (val+test 몫))을 넘지 않는다
    holdout_share = (exact[1] + exact[2]) / total_ratio
    caps = [math.ceil(size * holdout_share) for size in class_sizes]
    held = [0] * len(classes)
    per_class = {}
    for split_index in (1, 2):
        share = exact[split_index] / total_ratio
        target = math.floor(n * share)
        quotas = [size * share for size in class_sizes]
        counts = [math.floor(q) for q in quotas]
        deficit = target - sum(counts)
        order = sorted(range(len(classes)), key=lambda k: (-(quotas[k] - counts[k]), k))
        for k in order:
            if deficit <= 0:
                break
            if held[k] + counts[k] < caps[k]:
                counts[k] += 1
                deficit -= 1
        for k, count in enumerate(counts):
            held[k] += count
        per_class[split_index] = counts

    rng = np.random.default_rng(seed)
    assigned = [None] * n
    for k, c in enumerate(classes):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(members.size)]
        n_val, n_test = int(per_class[1][k]), int(per_class[2][k])
        n_train = members.size - n_val - n_test
        for j, idx in enumerate(members):
            assigned[idx] = "train" if j < n_train else "val" if j < n_train + n_val else "test"

    result = [replace(s, split=split) for s, split in zip(samples, assigned)]
    counts = {name: assigned.count(name) for name in SPLITS}
    logger.info(f"층화 분할 완료: {counts}")
    return result


def class_distribution(manifest: DatasetManifest) -> pd.DataFrame:
    """클래스별/split별 샘플 수 표 (행: 클래스, 열: train/val/test/total)"""
    df = pd.DataFrame(
        {"label": [s.label for s in manifest.samples], "split": [s.split for s in manifest.samples]}
    )
    table = pd.crosstab(df["label"], df["split"]).reindex(
        index=range(manifest.num_classes), columns=list(SPLITS), fill_value=0
    )
    table["total"] = table.sum(axis=1)
    table.index.name = "class"
    return table
