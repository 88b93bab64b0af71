"""
손실, Adam, 학습률 스케줄/조기 종료 상태 기계, 학습 루프 테스트
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.data import BatchLoader
from src.errors import ConfigurationError, DomainError
from src.models import build_model
from src.nn import Linear, Parameter
from src.tensor import Tensor
from src.training import (
    Adam,
    Decision,
    TrainConfig,
    Trainer,
    TrainState,
    adam_step,
    cross_entropy,
    cross_entropy_with_logits,
    early_stop_check,
    evaluate,
    lr_schedule_update,
)


# ----------------------------------------------------------------------
# 손실
# ----------------------------------------------------------------------
@pytest.mark.parametrize("k", [2, 10, 102])
def test_uniform_prediction_loss_is_log_k(k):
    q = Tensor(np.full((4, k), 1.0 / k))
    assert cross_entropy(q, [0, 1, 0, 1]).item() == pytest.approx(math.log(k), abs=1e-12)


def test_cross_entropy_reference_value():
    loss = cross_entropy(Tensor([[0.7, 0.3]]), [0])
    assert loss.item() == pytest.approx(0.356675, abs=1e-6)


def test_cross_entropy_rejects_bad_inputs():
    with pytest.raises(DomainError):
        cross_entropy(Tensor([[0.7, 0.4]]), [0])
    with pytest.raises(DomainError):
        cross_entropy(Tensor([[0.7, 0.3]]), [2])


def test_logit_loss_matches_probability_loss(rng):
    logits = rng.normal(size=(5, 4))
    labels = [0, 3, 1, 2, 2]
    q = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    expected = cross_entropy(Tensor(q), labels).item()
    assert cross_entropy_with_logits(Tensor(logits), labels).item() == pytest.approx(expected, abs=1e-12)


# ----------------------------------------------------------------------
# Adam
# ----------------------------------------------------------------------
def test_first_adam_step_moves_by_lr():
    param = np.array([1.0, -1.0])
    m, v = np.zeros(2), np.zeros(2)
    adam_step(param, np.array([0.5, -2.0]), m, v, step=1, lr=0.1)
    np.testing.assert_allclose(param, [0.9, -0.9], atol=1e-6)


def test_adam_skips_frozen_parameters(rng):
    fc = Linear(2, 2, rng=rng)
    fc.weight.trainable = False
    before = fc.weight.data.copy()
    opt = Adam(fc.named_parameters(), lr=0.1)
    fc(Tensor(rng.normal(size=(3, 2)))).sum().backward()
    opt.step()
    np.testing.assert_array_equal(fc.weight.data, before)
    assert np.any(fc.bias.data != 0.0)
    assert opt.step_count == 1


def test_adam_state_dict_order():
    p = Parameter(np.zeros(2))
    q = Parameter(np.zeros(3))
    keys = list(Adam([("a", p), ("b", q)]).state_dict())
    assert keys == ["adam/m/a", "adam/m/b", "adam/v/a", "adam/v/b"]


# ----------------------------------------------------------------------
# 학습률 스케줄 / 조기 종료
# ----------------------------------------------------------------------
def test_seven_stale_epochs_decay_lr():
    config = TrainConfig()
    state = TrainState.from_config(config)
    lr_schedule_update(state, 0.5, config)
    for _ in range(7):
        lr_schedule_update(state, 0.5, config)
    assert state.num_decays == 1
    assert state.lr == pytest.approx(0.0001, rel=1e-12)


def test_flat_trace_from_existing_best_decays_once():
    config = TrainConfig()
    state = TrainState.from_config(config)
    state.lr_best = 0.5
    for _ in range(8):
        lr_schedule_update(state, 0.5, config)
    assert state.num_decays == 1
    assert state.lr_stale == 1


def test_improvement_resets_schedule_counter():
    config = TrainConfig()
    state = TrainState.from_config(config)
    for metric in (0.5, 0.5, 0.5, 0.5, 0.5, 0.6):
        lr_schedule_update(state, metric, config)
    assert state.lr_stale == 0
    assert state.num_decays == 0
    assert state.lr == config.lr0


def test_lr_is_recomputed_from_decay_count():
    config = TrainConfig()
    state = TrainState.from_config(config)
    for d in range(5):
        state.num_decays = d
        assert state.lr == config.lr0 * config.lr_decay_factor**d


def test_improvement_of_exactly_threshold_is_stale():
    config = TrainConfig()
    state = TrainState.from_config(config)
    state.stop_best = 0.5
    early_stop_check(state, 0.5 + config.improvement_threshold, config)
    assert state.stop_stale == 1
    assert state.stop_best == 0.5


def test_stale_streak_before_min_epochs_continues():
    config = TrainConfig()
    state = TrainState.from_config(config)
    state.stop_best = 0.9
    decision = None
    for epoch in range(11, 21):
        state.epoch = epoch
        decision = early_stop_check(state, 0.5, config)
    assert state.stop_stale == 10
    assert decision is Decision.CONTINUE


def test_stale_streak_after_min_epochs_stops():
    config = TrainConfig()
    state = TrainState.from_config(config)
    state.stop_best = 0.9
    decisions = []
    for epoch in range(26, 36):
        state.epoch = epoch
        decisions.append(early_stop_check(state, 0.5, config))
    assert decisions[:-1] == [Decision.CONTINUE] * 9
    assert decisions[-1] is Decision.STOP


def test_max_epochs_overrides_min_epochs():
    config = TrainConfig(min_epochs=25, max_epochs=5)
    state = TrainState.from_config(config)
    state.epoch = 5
    assert early_stop_check(state, 0.9, config) is Decision.STOP


def test_schedule_and_stop_counters_are_independent():
    config = TrainConfig()
    state = TrainState.from_config(config)
    for metric in [0.5] + [0.5] * 8:
        lr_schedule_update(state, metric, config)
        early_stop_check(state, metric, config)
    assert state.lr_stale == 1
    assert state.stop_stale == 8


def test_train_config_collects_problems():
    with pytest.raises(ConfigurationError) as excinfo:
        TrainConfig(lr_decay_factor=1.5, lr_patience_epochs=0, improvement_threshold=0.0)
    assert len(excinfo.value.problems) == 3


# ----------------------------------------------------------------------
# 학습 루프
# ----------------------------------------------------------------------
def _loaders(manifest, config):
    train = BatchLoader(manifest, "train", config.batch_size, seed=config.seed, shuffle=True)
    val = BatchLoader(manifest, "val", config.batch_size, seed=config.seed)
    return train, val


def test_trainer_writes_metrics_and_checkpoints(synthetic_manifest, tiny_spec, fast_train_config, tmp_path):
    model = build_model(tiny_spec())
    trainer = Trainer(model, *_loaders(synthetic_manifest, fast_train_config), fast_train_config, tmp_path)
    result = trainer.fit()

    assert result.state.epoch == 3
    assert result.last_checkpoint == tmp_path / "last.ckpt"
    assert result.best_checkpoint == tmp_path / "best.ckpt"
    metrics = pd.read_csv(tmp_path / "metrics.csv")
    assert list(metrics.columns) == ["epoch", "train_loss", "val_accuracy", "lr", "train_accuracy"]
    assert metrics["epoch"].tolist() == [1, 2, 3]
    assert metrics["val_accuracy"].max() == pytest.approx(result.state.best_val_accuracy)


def test_training_reduces_loss(synthetic_manifest, tiny_spec, fast_train_config):
    model = build_model(tiny_spec())
    trainer = Trainer(model, *_loaders(synthetic_manifest, fast_train_config), fast_train_config)
    result = trainer.fit()
    losses = result.state.history["train_loss"]
    assert losses[-1] < losses[0]


def test_resumed_training_matches_uninterrupted_run(synthetic_manifest, tiny_spec, tmp_path):
    full_config = TrainConfig(batch_size=12, lr0=1e-2, min_epochs=1, max_epochs=2)
    full = Trainer(build_model(tiny_spec()), *_loaders(synthetic_manifest, full_config), full_config)
    full.fit()

    first_config = TrainConfig(batch_size=12, lr0=1e-2, min_epochs=1, max_epochs=1)
    first = Trainer(
        build_model(tiny_spec()), *_loaders(synthetic_manifest, first_config), first_config, tmp_path
    )
    first.fit()

    resumed = Trainer(build_model(tiny_spec()), *_loaders(synthetic_manifest, full_config), full_config)
    resumed.resume(tmp_path / "last.ckpt")
    assert resumed.state.epoch == 1
    resumed.fit()

    assert resumed.state.history == full.state.history
    for name, value in full.model.state_dict().items():
        np.testing.assert_array_equal(resumed.model.state_dict()[name], value)


def test_evaluate_requires_ordered_loader(synthetic_manifest, tiny_spec):
    model = build_model(tiny_spec())
    shuffled = BatchLoader(synthetic_manifest, "test", 8, shuffle=True)
    with pytest.raises(ConfigurationError):
        evaluate(model, shuffled)
    accuracy, probabilities = evaluate(model, BatchLoader(synthetic_manifest, "test", 8))
    assert probabilities.shape == (18, 3)
    np.testing.assert_allclose(probabilities.sum(axis=1), np.ones(18))
    assert 0.0 <= accuracy <= 1.0


@pytest.mark.slow
def test_tiny_resnet_overfits_separable_data(synthetic_manifest, tiny_spec):
    config = TrainConfig(
        batch_size=12, lr0=1e-2, early_stop_patience=200, lr_patience_epochs=200,
        min_epochs=0, max_epochs=200,
    )
    model = build_model(tiny_spec())
    trainer = Trainer(model, *_loaders(synthetic_manifest, config), config)
    trainer.fit()
    accuracy, _ = evaluate(model, BatchLoader(synthetic_manifest, "train", 12))
    assert accuracy == 1.0
