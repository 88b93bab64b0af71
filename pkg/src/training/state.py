"""
학습 설정과 학습 상태
학습률 plateau 감소와 조기 종료 상태 기계
"""

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Dict, List, Optional

from ..errors import ConfigurationError


@dataclass
class TrainConfig:
    """
    학습 설정

    Attributes:
        batch_size: 미니배치 크기
        lr0: 초기 학습률
        lr_decay_factor: 정체 시 학습률 감소 배율 (0, 1)
        lr_patience_epochs: 학습률 감소까지 허용하는 연속 정체 에폭 수
        early_stop_patience: 조기 종료까지 허용하는 연속 정체 에폭 수
        improvement_threshold: 개선으로 인정하는 최소 증가량 (초과해야 개선)
        min_epochs: 조기 종료가 허용되는 최소 에폭
        max_epochs: 최대 에폭
        seed: 난수 시드
    """

    batch_size: int = 32
    lr0: float = 1e-3
    lr_decay_factor: float = 0.1
    lr_patience_epochs: int = 7
    early_stop_patience: int = 10
    improvement_threshold: float = 1e-4
    min_epochs: int = 25
    max_epochs: int = 100
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    def problems(self) -> List[str]:
        problems = []
        if self.batch_size < 1:
            problems.append(f"train.batch_size는 1 이상이어야 합니다: {self.batch_size}")
        if self.lr0 <= 0:
            problems.append(f"train.lr0은 양수여야 합니다: {self.lr0}")
        if not 0.0 < self.lr_decay_factor < 1.0:
            problems.append(f"train.lr_decay_factor는 (0, 1) 범위여야 합니다: {self.lr_decay_factor}")
        if self.lr_patience_epochs < 1:
            problems.append(f"train.lr_patience_epochs는 1 이상이어야 합니다: {self.lr_patience_epochs}")
        if self.early_stop_patience < 1:
            problems.append(f"train.early_stop_patience는 1 이상이어야 합니다: {self.early_stop_patience}")
        if self.improvement_threshold <= 0:
            problems.append(f"train.improvement_threshold는 양수여야 합니다: {self.improvement_threshold}")
        if self.min_epochs < 0:
            problems.append(f"train.min_epochs는 0 이상이어야 합니다: {self.min_epochs}")
        if self.max_epochs < 1:
            problems.append(f"train.max_epochs는 1 이상이어야 합니다: {self.max_epochs}")
        if self.seed < 0:
            problems.append(f"train.seed는 0 이상이어야 합니다: {self.seed}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            problems.append(f"Adam beta는 [0, 1) 범위여야 합니다: ({self.beta1}, {self.beta2})")
        return problems

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError([f"알 수 없는 train 키: {k}" for k in unknown])
        return cls(**values)


class Decision(Enum):
    CONTINUE = "continue"
    STOP = "stop"


HISTORY_COLUMNS = ("train_loss", "val_accuracy", "lr", "train_accuracy")


@dataclass
class TrainState:
    """
    학습 상태

    학습률 스케줄과 조기 종료는 각자의 최고값/정체 카운터를 독립적으로 가진다.
    학습률은 lr0 * factor ** num_decays 로 매번 다시 계산한다.
    """

    lr0: float = 1e-3
    lr_decay_factor: float = 0.1
    epoch: int = 0
    num_decays: int = 0
    lr_best: float = -math.inf
    lr_stale: int = 0
    stop_best: float = -math.inf
    stop_stale: int = 0
    best_val_accuracy: float = -math.inf
    best_epoch: int = 0
    history: Dict[str, List[float]] = field(
        default_factory=lambda: {name: [] for name in HISTORY_COLUMNS}
    )

    @classmethod
    def from_config(cls, config: TrainConfig) -> "TrainState":
        return cls(lr0=config.lr0, lr_decay_factor=config.lr_decay_factor)

    @property
    def lr(self) -> float:
        return self.lr0 * self.lr_decay_factor**self.num_decays

    def record(self, train_loss: float, val_accuracy: float, train_accuracy: float) -> None:
        self.history["train_loss"].append(train_loss)
        self.history["val_accuracy"].append(val_accuracy)
        self.history["lr"].append(self.lr)
        self.history["train_accuracy"].append(train_accuracy)

    def update_best(self, val_accuracy: float) -> bool:
        """최고 검증 정확도 갱신 여부 (단순 초과 비교)"""
        if val_accuracy > self.best_val_accuracy:
            self.best_val_accuracy = val_accuracy
            self.best_epoch = self.epoch
            return True
        return False

    def counters(self) -> Dict[str, float]:
        return {
            "lr0": self.lr0,
            "lr_decay_factor": self.lr_decay_factor,
            "epoch": float(self.epoch),
            "num_decays": float(self.num_decays),
            "lr_best": self.lr_best,
            "lr_stale": float(self.lr_stale),
            "stop_best": self.stop_best,
            "stop_stale": float(self.stop_stale),
            "best_val_accuracy": self.best_val_accuracy,
            "best_epoch": float(self.best_epoch),
        }

    @classmethod
    def from_counters(
        cls, counters: Dict[str, float], history: Optional[Dict[str, List[float]]] = None
    ) -> "TrainState":
        missing = [k for k in cls().counters() if k not in counters]
        if missing:
            raise ConfigurationError([f"체크포인트에 카운터 '{k}'가 없습니다" for k in missing])
        state = cls(
            lr0=counters["lr0"],
            lr_decay_factor=counters["lr_decay_factor"],
            epoch=int(counters["epoch"]),
            num_decays=int(counters["num_decays"]),
            lr_best=counters["lr_best"],
            lr_stale=int(counters["lr_stale"]),
            stop_best=counters["stop_best"],
            stop_stale=int(counters["stop_stale"]),
            best_val_accuracy=counters["best_val_accuracy"],
            best_epoch=int(counters["best_epoch"]),
        )
        if history is not None:
            state.history = {name: list(history.get(name, [])) for name in HISTORY_COLUMNS}
        return state


def lr_schedule_update(state: TrainState, val_metric: float, config: TrainConfig) -> TrainState:
    """
    학습률 plateau 감소

    val_metric > lr_best + threshold 이면 개선으로 보고 카운터를 초기화한다.
    연속 lr_patience_epochs 에폭 동안 개선이 없으면 학습률을 감소시키고 카운터를 초기화한다.
    """
    if val_metric > state.lr_best + config.improvement_threshold:
        state.lr_best = val_metric
        state.lr_stale = 0
        return state
    state.lr_stale += 1
    if state.lr_stale >= config.lr_patience_epochs:
        state.num_decays += 1
        state.lr_stale = 0
    return state


def early_stop_check(state: TrainState, val_metric: float, config: TrainConfig) -> Decision:
    """
    조기 종료 판단 (lr_schedule_update 이후 에폭당 한 번 호출)

    연속 early_stop_patience 에폭 동안 개선이 없으면 종료하되,
    state.epoch < min_epochs 인 동안에는 종료하지 않는다 (max_epochs 도달 제외).
    """
    if val_metric > state.stop_best + config.improvement_threshold:
        state.stop_best = val_metric
        state.stop_stale = 0
    else:
        state.stop_stale += 1

    if state.epoch >= config.max_epochs:
        return Decision.STOP
    if state.stop_stale >= config.early_stop_patience and state.epoch >= config.min_epochs:
        return Decision.STOP
    return Decision.CONTINUE
