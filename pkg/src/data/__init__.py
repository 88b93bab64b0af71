"""
데이터 파이프라인 모듈
매니페스트, 이미지 입출력, 변환/증강, ROI 정제, 합성 데이터, 배치 로더
"""

from .image_io import read_pgm, read_ppm, write_pgm, write_ppm
from .loader import BatchLoader
from .manifest import (
    SPLITS,
    DatasetManifest,
    DetectionBox,
    Sample,
    class_distribution,
    load_manifest,
    save_manifest,
    split_dataset,
)
from .refine import (
    STRATEGIES,
    RefineSummary,
    attach_annotations,
    mask_overlay,
    parse_annotations,
    refine,
)
from .synthetic import generate_synthetic, linear_probe_accuracy
from .transforms import AugmentSpec, augment, denormalize, hflip, normalize, resize, vflip

__all__ = [
    "SPLITS",
    "Sample",
    "DetectionBox",
    "DatasetManifest",
    "load_manifest",
    "save_manifest",
    "split_dataset",
    "class_distribution",
    "read_ppm",
    "write_ppm",
    "read_pgm",
    "write_pgm",
    "AugmentSpec",
    "normalize",
    "denormalize",
    "resize",
    "hflip",
    "vflip",
    "augment",
    "STRATEGIES",
    "RefineSummary",
    "parse_annotations",
    "attach_annotations",
    "refine",
    "mask_overlay",
    "generate_synthetic",
    "linear_probe_accuracy",
    "BatchLoader",
]
