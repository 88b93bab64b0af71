"""
공용 테스트 픽스처
"""

import numpy as np
import pytest

from src.data import generate_synthetic, load_manifest
from src.models import ModelSpec
from src.training import TrainConfig


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    """3클래스 x 20장, 16px 합성 데이터셋 (36/6/18 분할)"""
    out = tmp_path_factory.mktemp("synthetic")
    generate_synthetic(out, num_classes=3, per_class=20, size=16, seed=7)
    return out


@pytest.fixture
def synthetic_manifest(synthetic_dir):
    return load_manifest(synthetic_dir / "manifest.csv")


@pytest.fixture
def tiny_spec():
    def make(arch: str = "tiny-resnet", **changes) -> ModelSpec:
        values = dict(arch=arch, num_classes=3, height=16, width=16, channels=8, depth=1, d_model=16)
        values.update(changes)
        return ModelSpec(**values)

    return make


@pytest.fixture
def fast_train_config():
    return TrainConfig(
        batch_size=12,
        lr0=1e-2,
        lr_patience_epochs=2,
        early_stop_patience=3,
        min_epochs=1,
        max_epochs=3,
        seed=0,
    )
