"""
미니배치 로더
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from .manifest import DatasetManifest
from .transforms import AugmentSpec, augment, normalize, resize

logger = logging.getLogger(__name__)


class BatchLoader:
    """
    split 하나에 대한 미니배치 생성기

    디코딩 + 리사이즈 결과는 캐시된다. 샘플별 증강 난수는 (seed, 샘플 인덱스, epoch)로
    만든 생성기에서 뽑으므로 workers 수와 관계없이 같은 텐서가 나온다.
    마지막 배치 크기가 1이면 직전 배치에 합친다 (학습 모드 BatchNorm 요건).
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        split: str,
        batch_size: int = 32,
        image_size: Tuple[int, int] = (16, 16),
        augment_spec: Optional[AugmentSpec] = None,
        seed: int = 0,
        shuffle: bool = False,
        workers: int = 0,
        shuffle_rng: Optional[np.random.Generator] = None,
    ):
        if batch_size < 1:
            raise ConfigurationError(f"배치 크기는 1 이상이어야 합니다: {batch_size}")
        if workers < 0:
            raise ConfigurationError(f"workers는 0 이상이어야 합니다: {workers}")
        self.manifest = manifest
        self.split = split
        self.samples = manifest.split(split)
        self.batch_size = batch_size
        self.image_size = image_size
        self.augment_spec = augment_spec
        self.seed = seed
        self.shuffle = shuffle
        self.workers = workers
        self.shuffle_rng = shuffle_rng
        if shuffle and shuffle_rng is None:
            self.shuffle_rng = np.random.default_rng(seed + 1)
        self._cache: Dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        n = len(self.samples)
        if n == 0:
            return 0
        count = -(-n // self.batch_size)
        if count > 1 and n % self.batch_size == 1:
            count -= 1
        return count

    @property
    def num_samples(self) -> int:
        return len(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    @property
    def sample_ids(self) -> List[str]:
        return [s.sample_id for s in self.samples]

    def _decoded(self, index: int) -> np.ndarray:
        image = self._cache.get(index)
        if image is None:
            image = resize(self.manifest.load_image(self.samples[index]), *self.image_size)
            self._cache[index] = image
        return image

    def prepare(self, index: int, epoch: int) -> np.ndarray:
        """샘플 하나의 최종 입력 (증강 후 정규화)"""
        image = self._decoded(index)
        if self.augment_spec is not None:
            rng = np.random.default_rng([self.seed, index, epoch])
            image = augment(image, self.augment_spec, rng)
        return normalize(image)

    def _chunks(self, order: np.ndarray) -> List[np.ndarray]:
        chunks = [order[i : i + self.batch_size] for i in range(0, order.size, self.batch_size)]
        if len(chunks) > 1 and chunks[-1].size == 1:
            chunks[-2] = np.concatenate([chunks[-2], chunks.pop()])
        return chunks

    def batches(self, epoch: int = 0) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """
        (images [B,3,H,W], labels [B]) 배치 순회

        shuffle이면 순회를 시작할 때 shuffle_rng로 순서를 한 번 뽑는다.
        """
        n = len(self.samples)
        order = self.shuffle_rng.permutation(n) if self.shuffle else np.arange(n)
        labels = self.labels
        executor = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 0 else None
        try:
            for chunk in self._chunks(order):
                indices = chunk.tolist()
                if executor is not None:
                    images = list(executor.map(lambda i: self.prepare(i, epoch), indices))
                else:
                    images = [self.prepare(i, epoch) for i in indices]
                yield np.stack(images), labels[chunk]
        finally:
            if executor is not None:
                executor.shutdown(wait=True)
