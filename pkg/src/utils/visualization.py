"""
시각화 모듈
matplotlib, seaborn을 활용한 학습 곡선, 혼동 행렬, Grad-CAM 그림 생성
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from ..data.transforms import resize  # noqa: E402
from ..errors import ShapeError  # noqa: E402

PathLike = Union[str, Path]


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


class Visualizer:
    """학습/평가 결과 시각화 클래스 (파일로 저장)"""

    def __init__(self, style: str = "seaborn-v0_8-darkgrid"):
        """
        Visualizer 초기화

        Args:
            style: matplotlib 스타일
        """
        try:
            plt.style.use(style)
        except OSError:
            plt.style.use("default")

        sns.set_palette("husl")

    @staticmethod
    def plot_training_history(
        history: pd.DataFrame,
        path: PathLike,
        title: str = "Training History",
        figsize: Tuple[int, int] = (12, 8),
    ) -> Path:
        """
        학습 곡선 (손실, 정확도, 학습률)

        Args:
            history: epoch, train_loss, val_accuracy, lr, train_accuracy 열을 가진 메트릭 기록
            path: 저장 경로
        """
        fig, (ax1, ax2, ax3) = plt.subplots(3, 1, figsize=figsize, sharex=True)

        ax1.plot(history["epoch"], history["train_loss"], label="train loss", linewidth=2)
        ax1.set_ylabel("Loss")
        ax1.set_title(title)
        ax1.legend()
        ax1.grid(True, alpha=0.3)

        ax2.plot(history["epoch"], history["val_accuracy"], label="val accuracy", linewidth=2)
        if "train_accuracy" in history.columns:
            ax2.plot(history["epoch"], history["train_accuracy"], label="train accuracy", alpha=0.7)
        ax2.set_ylabel("Accuracy")
        ax2.legend()
        ax2.grid(True, alpha=0.3)

        ax3.plot(history["epoch"], history["lr"], drawstyle="steps-post", color="gray")
        ax3.set_yscale("log")
        ax3.set_ylabel("LR")
        ax3.set_xlabel("Epoch")
        ax3.grid(True, alpha=0.3)

        fig.tight_layout()
        return _save(fig, path)

    @staticmethod
    def plot_confusion_matrix(
        cm: np.ndarray,
        path: PathLike,
        title: str = "Confusion Matrix",
        normalize: bool = False,
    ) -> Path:
        """
        혼동 행렬 히트맵

        Args:
            cm: [K, K] 혼동 행렬 (행: 정답, 열: 예측)
            path: 저장 경로
            normalize: 행 단위 비율로 표시
        """
        cm = np.asarray(cm)
        values = cm.astype(np.float64)
        if normalize:
            rows = values.sum(axis=1, keepdims=True)
            values = np.divide(values, rows, out=np.zeros_like(values), where=rows > 0)
        k = cm.shape[0]
        size = min(4 + 0.5 * k, 20)
        fig, ax = plt.subplots(figsize=(size, size))
        sns.heatmap(
            values,
            annot=k <= 20,
            fmt=".2f" if normalize else ".0f",
            cmap="Blues",
            square=True,
            linewidths=0.5,
            cbar=True,
            ax=ax,
        )
        ax.set_xlabel("Predicted")
        ax.set_ylabel("True")
        ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)

    @staticmethod
    def plot_gradcam_overlay(
        image: np.ndarray,
        heatmap: np.ndarray,
        path: PathLike,
        alpha: float = 0.5,
        title: Optional[str] = None,
    ) -> Path:
        """
        이미지 위에 Grad-CAM 히트맵 겹쳐 그리기

        Args:
            image: [3,H,W] 값 범위 [0, 1]
            heatmap: [H',W'] 값 범위 [0, 1] (이미지 크기로 양선형 확대)
            path: 저장 경로
        """
        if image.ndim != 3 or image.shape[0] != 3 or heatmap.ndim != 2:
            raise ShapeError("[3,H,W] 이미지와 [H,W] 히트맵이 필요합니다", image.shape, heatmap.shape)
        _, h, w = image.shape
        upsampled = resize(heatmap[None], h, w)[0]
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.imshow(np.clip(image.transpose(1, 2, 0), 0.0, 1.0))
        ax.imshow(upsampled, cmap="jet", alpha=alpha, vmin=0.0, vmax=1.0)
        ax.axis("off")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)
