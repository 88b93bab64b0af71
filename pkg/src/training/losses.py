"""
손실 함수
"""

from typing import Sequence

import numpy as np

from ..errors import DomainError, ShapeError
from ..tensor import Tensor
from ..tensor import functional as F


def _check_labels(labels: Sequence[int], n: int, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ShapeError("라벨 개수가 배치 크기와 다릅니다", labels.shape, (n,))
    bad = labels[(labels < 0) | (labels >= num_classes)]
    if bad.size:
        raise DomainError(f"라벨 {int(bad[0])}이 범위 [0, {num_classes})를 벗어났습니다")
    return labels


def cross_entropy(probabilities: Tensor, labels: Sequence[int]) -> Tensor:
    """
    교차 엔트로피 -mean_i log Q[i, label_i]

    Args:
        probabilities: 각 행의 합이 1인 [n, K] 확률 (소프트맥스 출력)
        labels: 정답 클래스 [n]

    Returns:
        Tensor: 스칼라 손실
    """
    n, k = probabilities.shape
    labels = _check_labels(labels, n, k)
    row_sums = probabilities.data.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > 1e-9):
        raise DomainError("확률 행의 합이 1이 아닙니다")
    picked = (probabilities * Tensor(F.one_hot(labels, k))).sum(axis=1)
    return -picked.log().mean()


def cross_entropy_with_logits(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """로짓에서 log-softmax로 계산하는 수치적으로 안정한 교차 엔트로피"""
    n, k = logits.shape
    labels = _check_labels(labels, n, k)
    log_q = F.log_softmax(logits, axis=1)
    return -(log_q * Tensor(F.one_hot(labels, k))).sum(axis=1).mean()
