"""
학습 모듈
손실, Adam, 학습률 스케줄과 조기 종료, 체크포인트, 학습 루프
"""

from .checkpoint import (
    Checkpoint,
    checkpoint_load,
    checkpoint_save,
    decode_checkpoint,
    encode_checkpoint,
    load_model,
    restore_training,
    warm_start,
)
from .losses import cross_entropy, cross_entropy_with_logits
from .optimizer import Adam, adam_step
from .state import Decision, TrainConfig, TrainState, early_stop_check, lr_schedule_update
from .trainer import TrainResult, Trainer, evaluate

__all__ = [
    "cross_entropy",
    "cross_entropy_with_logits",
    "adam_step",
    "Adam",
    "TrainConfig",
    "TrainState",
    "Decision",
    "lr_schedule_update",
    "early_stop_check",
    "Checkpoint",
    "encode_checkpoint",
    "decode_checkpoint",
    "checkpoint_save",
    "checkpoint_load",
    "restore_training",
    "warm_start",
    "load_model",
    "Trainer",
    "TrainResult",
    "evaluate",
]
