"""
설정 로더 테스트
"""

from pathlib import Path

import pytest
import yaml

from src.errors import ConfigurationError
from src.utils import Config, load_config, split_overrides

PROJECT_CONFIG = Path(__file__).resolve().parent.parent / "config.yaml"


def test_project_config_is_valid():
    config = load_config(PROJECT_CONFIG)
    assert config.get("train.lr0") == 0.001
    assert config.get_train_config().early_stop_patience == 10
    assert config.get_model_spec().arch == "tiny-resnet"
    assert config.get_augment_spec().apply_to_validation is True


def test_dot_notation_get_with_default():
    config = Config(values={"train": {"lr0": 0.01}})
    assert config.get("train.lr0") == 0.01
    assert config.get("train.seed", 7) == 7
    assert config.get("missing.key") is None


def test_overrides_are_parsed_as_yaml_scalars():
    config = Config(values={}).apply_overrides(
        {"train.lr0": "1e-3", "train.max_epochs": "5", "augment.horizontal_flip": "false"}
    )
    assert config.get("train.lr0") == 0.001
    assert config.get("train.max_epochs") == 5
    assert config.get("augment.horizontal_flip") is False
    assert config.get_train_config().max_epochs == 5


def test_validation_collects_every_problem():
    config = Config(values={
        "train": {"lr0": -1.0, "batch_size": "big"},
        "model": {"arch": "alexnet"},
        "extra": {},
    })
    with pytest.raises(ConfigurationError) as excinfo:
        config.validate()
    problems = excinfo.value.problems
    assert len(problems) == 3
    assert any("extra" in p for p in problems)
    assert any("batch_size" in p for p in problems)
    assert any("alexnet" in p for p in problems)


def test_unknown_key_is_reported():
    with pytest.raises(ConfigurationError):
        Config(values={"data": {"image_sz": 16}}).validate()


def test_missing_explicit_file(tmp_path):
    with pytest.raises(ConfigurationError):
        Config(tmp_path / "nope.yaml")


def test_integers_are_accepted_for_float_fields():
    config = Config(values={"data": {"split_ratios": [6, 1, 3]}, "train": {"lr0": 1}})
    assert config.get_data_config().split_ratios == [6.0, 1.0, 3.0]
    assert config.get_train_config().lr0 == 1.0


def test_write_resolved_fills_defaults(tmp_path):
    config = Config(values={"train": {"max_epochs": 4}})
    path = config.write_resolved(tmp_path)
    resolved = yaml.safe_load(path.read_text(encoding="utf-8"))
    assert path.name == "resolved_config.yaml"
    assert set(resolved) == {"data", "model", "train", "augment", "ensemble"}
    assert resolved["train"]["max_epochs"] == 4
    assert resolved["train"]["min_epochs"] == 25
    assert resolved["ensemble"]["mode"] == "soft"


def test_split_overrides_separates_dotted_flags():
    overrides, rest = split_overrides(
        ["train", "--train.lr0", "0.01", "--model.arch=tiny-vit", "--out", "runs"]
    )
    assert overrides == {"train.lr0": "0.01", "model.arch": "tiny-vit"}
    assert rest == ["train", "--out", "runs"]
    with pytest.raises(ConfigurationError):
        split_overrides(["--train.lr0"])
