"""
학습 루프
미니배치 학습, 검증, 학습률 스케줄, 조기 종료, 체크포인트, 메트릭 기록
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import ConfigurationError
from ..data.loader import BatchLoader
from ..models.backbones import Backbone
from ..tensor import Tensor, no_grad
from ..tensor import functional as F
from .checkpoint import checkpoint_load, checkpoint_save, restore_training, warm_start
from .losses import cross_entropy_with_logits
from .optimizer import Adam
from .state import (
    HISTORY_COLUMNS,
    Decision,
    TrainConfig,
    TrainState,
    early_stop_check,
    lr_schedule_update,
)

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"


def evaluate(model: Backbone, loader: BatchLoader, epoch: int = 0) -> Tuple[float, np.ndarray]:
    """
    평가 모드 순전파

    Returns:
        (정확도 [0, 1], 확률 [n, K] loader 샘플 순서)
    """
    if loader.num_samples == 0:
        raise ConfigurationError(f"'{loader.split}' split이 비어 있습니다")
    if loader.shuffle:
        raise ConfigurationError("평가용 로더는 shuffle=False 여야 합니다")
    was_training = model.training
    model.eval()
    probabilities = []
    labels = []
    try:
        with no_grad():
            for images, batch_labels in loader.batches(epoch):
                logits = model(Tensor(images))
                probabilities.append(F.softmax(logits, axis=1).data)
                labels.append(batch_labels)
    finally:
        model.train(was_training)
    probabilities = np.concatenate(probabilities)
    labels = np.concatenate(labels)
    accuracy = float(np.mean(probabilities.argmax(axis=1) == labels))
    return accuracy, probabilities


@dataclass
class TrainResult:
    state: TrainState
    best_checkpoint: Optional[Path]
    last_checkpoint: Optional[Path]

    def print_summary(self) -> None:
        print("\n" + "=" * 60)
        print("학습 결과 요약")
        print("=" * 60)
        print(f"{'완료 에폭':.<30} {self.state.epoch:>10}")
        print(f"{'최고 검증 정확도':.<30} {self.state.best_val_accuracy:>10.4f}")
        print(f"{'최고 에폭':.<30} {self.state.best_epoch:>10}")
        print(f"{'학습률 감소 횟수':.<30} {self.state.num_decays:>10}")
        print(f"{'최종 학습률':.<30} {self.state.lr:>10.2e}")
        print("=" * 60 + "\n")


class Trainer:
    """
    학습 엔진 클래스

    한 에폭: 학습 패스 -> 검증 정확도 -> 학습률 스케줄 -> 조기 종료 판단 ->
    last.ckpt 저장 (개선 시 best.ckpt) -> metrics.csv 갱신.
    """

    def __init__(
        self,
        model: Backbone,
        train_loader: BatchLoader,
        val_loader: BatchLoader,
        config: TrainConfig,
        out_dir: Optional[Union[str, Path]] = None,
        meta: Optional[Dict[str, Any]] = None,
    ):
        """
        Trainer 초기화

        Args:
            model: 학습할 모델
            train_loader: 학습 로더 (shuffle=True)
            val_loader: 검증 로더 (shuffle=False)
            config: 학습 설정
            out_dir: 체크포인트/메트릭 출력 디렉토리 (None이면 기록하지 않음)
            meta: 체크포인트 meta 섹션 (None이면 모델 사양)
        """
        self.model = model
        self.train_loader = train_loader
        self.val_loader = val_loader
        self.config = config
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.meta = meta if meta is not None else {
            "model": model.spec.to_dict(),
            "num_classes": model.spec.num_classes,
        }
        self.optimizer = Adam(
            model.named_parameters(),
            lr=config.lr0,
            betas=(config.beta1, config.beta2),
            eps=config.adam_eps,
        )
        self.state = TrainState.from_config(config)
        rngs = {"shuffle": train_loader.shuffle_rng, "dropout": model.dropout_rng}
        self.rngs = {name: rng for name, rng in rngs.items() if rng is not None}

    def resume(self, path: Union[str, Path]) -> TrainState:
        """체크포인트에서 파라미터, 모멘트, 카운터, RNG 상태를 모두 복원"""
        checkpoint = checkpoint_load(path)
        self.state = restore_training(checkpoint, self.model, self.optimizer, self.rngs)
        logger.info(f"학습 재개: {path} (에폭 {self.state.epoch}, lr {self.state.lr:.2e})")
        return self.state

    def warm_start(self, path: Union[str, Path]) -> None:
        """파라미터만 불러온 뒤 새 학습 상태로 시작"""
        warm_start(self.model, path)
        logger.info(f"파라미터 초기화: {path}")

    def train_epoch(self) -> Tuple[float, float]:
        """
        학습 패스 한 번

        Returns:
            (평균 손실, 학습 모드 정확도)
        """
        self.model.train()
        self.optimizer.lr = self.state.lr
        total_loss = 0.0
        correct = 0
        seen = 0
        for images, labels in self.train_loader.batches(self.state.epoch):
            logits = self.model(Tensor(images))
            loss = cross_entropy_with_logits(logits, labels)
            self.optimizer.zero_grad()
            loss.backward()
            self.optimizer.step()
            total_loss += loss.item() * labels.size
            correct += int(np.sum(logits.data.argmax(axis=1) == labels))
            seen += labels.size
        return total_loss / seen, correct / seen

    def history_frame(self) -> pd.DataFrame:
        history = self.state.history
        df = pd.DataFrame({name: history[name] for name in HISTORY_COLUMNS})
        df.insert(0, "epoch", np.arange(1, len(df) + 1))
        return df

    def write_metrics(self) -> Optional[Path]:
        if self.out_dir is None:
            return None
        path = self.out_dir / METRICS_FILE
        self.history_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    def _save(self, name: str) -> Optional[Path]:
        if self.out_dir is None:
            return None
        return checkpoint_save(
            self.out_dir / name, self.model, self.optimizer, self.state, self.rngs, self.meta
        )

    def fit(self) -> TrainResult:
        """
        조기 종료 또는 max_epochs까지 학습

        Returns:
            TrainResult: 최종 상태와 best/last 체크포인트 경로
        """
        if self.train_loader.num_samples == 0 or self.val_loader.num_samples == 0:
            raise ConfigurationError(
                f"학습/검증 split이 비어 있습니다 "
                f"(train {self.train_loader.num_samples}, val {self.val_loader.num_samples})"
            )
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)

        best_path = self.out_dir / BEST_CHECKPOINT if self.out_dir is not None else None
        last_path = None
        while self.state.epoch < self.config.max_epochs:
            epoch = self.state.epoch
            train_loss, train_accuracy = self.train_epoch()
            val_accuracy, _ = evaluate(self.model, self.val_loader, epoch)

            self.state.epoch += 1
            self.state.record(train_loss, val_accuracy, train_accuracy)
            improved = self.state.update_best(val_accuracy)
            lr_schedule_update(self.state, val_accuracy, self.config)
            decision = early_stop_check(self.state, val_accuracy, self.config)

            last_path = self._save(LAST_CHECKPOINT)
            if improved:
                self._save(BEST_CHECKPOINT)
            self.write_metrics()

            logger.info(
                f"에폭 {self.state.epoch:>3}: loss {train_loss:.6f}, "
                f"train_acc {train_accuracy:.4f}, val_acc {val_accuracy:.4f}, "
                f"lr {self.state.history['lr'][-1]:.2e}{' *' if improved else ''}"
            )
            if decision is Decision.STOP:
                logger.info(f"학습 종료: 에폭 {self.state.epoch} (최고 {self.state.best_val_accuracy:.4f})")
                break

        if best_path is not None and not best_path.exists():
            best_path = None
        return TrainResult(self.state, best_path, last_path)
