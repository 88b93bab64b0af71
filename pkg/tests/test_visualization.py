"""
시각화 테스트 (파일 저장만 확인)
"""

import numpy as np
import pandas as pd
import pytest

from src.errors import ShapeError
from src.utils import Visualizer


@pytest.fixture(scope="module")
def visualizer():
    return Visualizer()


def test_training_history_figure(tmp_path, visualizer):
    history = pd.DataFrame({
        "epoch": [1, 2, 3],
        "train_loss": [1.1, 0.8, 0.6],
        "val_accuracy": [0.4, 0.6, 0.7],
        "lr": [1e-3, 1e-3, 1e-4],
        "train_accuracy": [0.5, 0.7, 0.8],
    })
    path = visualizer.plot_training_history(history, tmp_path / "plots" / "history.png")
    assert path.exists() and path.stat().st_size > 0


@pytest.mark.parametrize("normalize", [False, True])
def test_confusion_matrix_figure(tmp_path, visualizer, normalize):
    cm = np.array([[3, 1, 0], [0, 4, 0], [0, 0, 0]])
    path = visualizer.plot_confusion_matrix(cm, tmp_path / "cm.png", normalize=normalize)
    assert path.exists()


def test_gradcam_overlay_figure(tmp_path, visualizer, rng):
    path = visualizer.plot_gradcam_overlay(rng.random((3, 16, 16)), rng.random((4, 4)), tmp_path / "cam.png")
    assert path.exists()
    with pytest.raises(ShapeError):
        visualizer.plot_gradcam_overlay(rng.random((16, 16)), rng.random((4, 4)), tmp_path / "bad.png")
