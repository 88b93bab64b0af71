"""
분류 지표
혼동 행렬, 정확도, 클래스별/매크로 정밀도·재현율·F1
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from ..errors import DomainError, ShapeError


def confusion(true_labels: Sequence[int], pred_labels: Sequence[int], num_classes: int) -> np.ndarray:
    """
    혼동 행렬 counts[t][p] (정답 t, 예측 p)

    Returns:
        np.ndarray: [K, K] int64
    """
    true_labels = np.asarray(true_labels, dtype=np.int64)
    pred_labels = np.asarray(pred_labels, dtype=np.int64)
    if true_labels.shape != pred_labels.shape or true_labels.ndim != 1:
        raise ShapeError("정답과 예측 라벨 개수가 다릅니다", true_labels.shape, pred_labels.shape)
    for name, values in (("정답", true_labels), ("예측", pred_labels)):
        bad = values[(values < 0) | (values >= num_classes)]
        if bad.size:
            raise DomainError(f"{name} 라벨 {int(bad[0])}이 범위 [0, {num_classes})를 벗어났습니다")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (true_labels, pred_labels), 1)
    return counts


def _safe_divide(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros(numerator.shape, dtype=np.float64)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


@dataclass
class ClassificationReport:
    """
    분류 성능 보고

    분모가 0인 클래스의 precision/recall/f1은 0으로 둔다.
    """

    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion_matrix: np.ndarray

    @property
    def accuracy_percent(self) -> float:
        return self.accuracy * 100.0

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision))

    @property
    def macro_recall(self) -> float:
        return float(np.mean(self.recall))

    @property
    def macro_f1(self) -> float:
        return float(np.mean(self.f1))

    @property
    def num_classes(self) -> int:
        return int(self.confusion_matrix.shape[0])

    def per_class(self) -> List[Dict[str, Any]]:
        return [
            {
                "class": c,
                "precision": float(self.precision[c]),
                "recall": float(self.recall[c]),
                "f1": float(self.f1[c]),
                "support": int(self.support[c]),
            }
            for c in range(self.num_classes)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accuracy_percent": self.accuracy_percent,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": self.per_class(),
            "confusion_matrix": self.confusion_matrix.tolist(),
        }


def metrics(cm: np.ndarray) -> ClassificationReport:
    """
    혼동 행렬에서 지표 계산 (one-vs-all)

    TP_c = cm[c, c], FN_c = 행 합 - TP_c, FP_c = 열 합 - TP_c
    """
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] == 0:
        raise ShapeError("혼동 행렬은 정사각 [K, K] 여야 합니다", cm.shape)
    total = int(cm.sum())
    if total <= 0:
        raise DomainError("혼동 행렬이 비어 있습니다 (샘플 0개)")
    tp = np.diag(cm).astype(np.float64)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    recall = _safe_divide(tp, support.astype(np.float64))
    precision = _safe_divide(tp, predicted.astype(np.float64))
    f1 = _safe_divide(2.0 * precision * recall, precision + recall)
    return ClassificationReport(
        accuracy=float(tp.sum() / total),
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        confusion_matrix=cm,
    )
