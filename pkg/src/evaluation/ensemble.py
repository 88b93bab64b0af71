"""
앙상블 투표
소프트 투표(확률 평균)와 하드 투표(다수결), 모델 조합 탐색
"""

import logging
from itertools import combinations
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)

VOTING_MODES = ("soft", "hard")


def _stack(predictions: Sequence[np.ndarray]) -> np.ndarray:
    if len(predictions) == 0:
        raise ConfigurationError("앙상블할 모델이 없습니다")
    shapes = [np.shape(p) for p in predictions]
    if any(len(s) != 2 for s in shapes) or len(set(shapes)) != 1:
        raise ShapeError("모델별 예측 형상이 다릅니다", *shapes)
    return np.stack([np.asarray(p, dtype=np.float64) for p in predictions])


def soft_vote(predictions: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    소프트 투표: 모델별 확률의 평균과 argmax 라벨

    모델 축을 값 기준으로 정렬한 뒤 더하므로 모델 순서와 무관하게 같은 비트가 나온다.
    모든 모델의 값이 같은 칸은 그 값을 그대로 쓴다.

    Args:
        predictions: 모델별 [n, K] 확률

    Returns:
        (평균 확률 [n, K], 라벨 [n] 동률이면 작은 인덱스)
    """
    stacked = _stack(predictions)
    ordered = np.sort(stacked, axis=0)
    mean = ordered.sum(axis=0) / stacked.shape[0]
    mean = np.where(ordered[0] == ordered[-1], ordered[0], mean)
    return mean, mean.argmax(axis=1)


def hard_vote(labels: Sequence[np.ndarray]) -> np.ndarray:
    """
    하드 투표: 샘플별 최빈 라벨 (동률이면 가장 작은 라벨)

    Args:
        labels: 모델별 [n] 예측 라벨

    Returns:
        np.ndarray: [n] 라벨
    """
    if len(labels) == 0:
        raise ConfigurationError("앙상블할 모델이 없습니다")
    shapes = [np.shape(v) for v in labels]
    if any(len(s) != 1 for s in shapes) or len(set(shapes)) != 1:
        raise ShapeError("모델별 라벨 개수가 다릅니다", *shapes)
    votes = np.stack([np.asarray(v, dtype=np.int64) for v in labels])
    result, _ = stats.mode(votes, axis=0, keepdims=False)
    return np.asarray(result, dtype=np.int64)


def vote(predictions: Sequence[np.ndarray], mode: str = "soft") -> Tuple[np.ndarray, np.ndarray]:
    """
    모드에 따른 투표

    Returns:
        (확률 [n, K], 라벨 [n]). 하드 투표의 확률은 득표 비율.
    """
    if mode == "soft":
        return soft_vote(predictions)
    if mode == "hard":
        stacked = _stack(predictions)
        labels = hard_vote([p.argmax(axis=1) for p in stacked])
        m, n, k = stacked.shape
        shares = np.zeros((n, k))
        for p in stacked:
            shares[np.arange(n), p.argmax(axis=1)] += 1.0
        return shares / m, labels
    raise ConfigurationError(f"알 수 없는 투표 모드 '{mode}' (가능: {', '.join(VOTING_MODES)})")


def search_ensembles(
    predictions: Dict[str, np.ndarray],
    truth: np.ndarray,
    min_size: int = 2,
    mode: str = "soft",
) -> pd.DataFrame:
    """
    모델 조합 전수 탐색

    크기 min_size 이상의 모든 부분집합을 투표로 평가해 정확도 순으로 정렬한다.

    Args:
        predictions: 모델 이름 -> [n, K] 확률
        truth: 정답 라벨 [n]
        min_size: 최소 조합 크기
        mode: soft | hard

    Returns:
        DataFrame: models, size, accuracy 열 (정확도 내림차순, 크기 오름차순)
    """
    names = list(predictions)
    if len(names) < min_size:
        raise ConfigurationError(f"조합 탐색에는 모델이 {min_size}개 이상 필요합니다: {len(names)}개")
    truth = np.asarray(truth, dtype=np.int64)
    rows = []
    for size in range(min_size, len(names) + 1):
        for subset in combinations(names, size):
            _, labels = vote([predictions[name] for name in subset], mode)
            if labels.shape != truth.shape:
                raise ShapeError("예측과 정답 개수가 다릅니다", labels.shape, truth.shape)
            rows.append(
                {"models": "+".join(subset), "size": size, "accuracy": float(np.mean(labels == truth))}
            )
    ranking = pd.DataFrame(rows, columns=["models", "size", "accuracy"])
    ranking = ranking.sort_values(
        ["accuracy", "size", "models"], ascending=[False, True, True], kind="mergesort"
    ).reset_index(drop=True)
    logger.info(f"앙상블 조합 {len(ranking)}개 평가 ({mode}), 최고: {ranking.iloc[0]['models']}")
    return ranking
