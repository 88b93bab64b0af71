"""
체크포인트 바이너리 포맷 테스트
"""

import struct

import numpy as np
import pytest

from src.errors import CheckpointFormatError
from src.models import build_model
from src.tensor import Tensor
from src.training import (
    Adam,
    Checkpoint,
    TrainState,
    checkpoint_load,
    checkpoint_save,
    decode_checkpoint,
    encode_checkpoint,
    load_model,
    restore_training,
)
from src.training.checkpoint import array_to_rng_state, rng_to_array


def _sample_checkpoint():
    ckpt = Checkpoint()
    ckpt.parameters["w"] = np.arange(6.0).reshape(2, 3)
    ckpt.parameters["scalar"] = np.array(2.5)
    ckpt.counters["epoch"] = np.array(3.0)
    ckpt.meta = {"model": {"arch": "tiny-resnet"}}
    return ckpt


def test_encode_layout_header():
    blob = encode_checkpoint(_sample_checkpoint())
    assert blob[:4] == b"PGCK"
    assert struct.unpack("<I", blob[4:8]) == (1,)
    assert struct.unpack("<Q", blob[8:16]) == (2,)


def test_decode_restores_records_exactly():
    decoded = decode_checkpoint(encode_checkpoint(_sample_checkpoint()))
    assert list(decoded.parameters) == ["w", "scalar"]
    np.testing.assert_array_equal(decoded.parameters["w"], np.arange(6.0).reshape(2, 3))
    assert decoded.parameters["scalar"].shape == ()
    assert decoded.meta == {"model": {"arch": "tiny-resnet"}}


def test_bad_magic_reports_offset_zero():
    blob = encode_checkpoint(_sample_checkpoint())
    with pytest.raises(CheckpointFormatError) as excinfo:
        decode_checkpoint(b"XXXX" + blob[4:])
    assert excinfo.value.offset == 0


def test_unknown_version_reports_offset_four():
    blob = encode_checkpoint(_sample_checkpoint())
    with pytest.raises(CheckpointFormatError) as excinfo:
        decode_checkpoint(blob[:4] + struct.pack("<I", 9) + blob[8:])
    assert excinfo.value.offset == 4


def test_truncated_and_trailing_bytes_are_rejected():
    blob = encode_checkpoint(_sample_checkpoint())
    with pytest.raises(CheckpointFormatError):
        decode_checkpoint(blob[:-3])
    with pytest.raises(CheckpointFormatError) as excinfo:
        decode_checkpoint(blob + b"\x00")
    assert excinfo.value.offset == len(blob)


@pytest.mark.parametrize("dims", [(2**32, 2**32), (2**63,), (4, 4)])
def test_oversized_record_shape_reports_dims_offset(dims):
    blob = (
        b"PGCK"
        + struct.pack("<I", 1)
        + struct.pack("<Q", 1)
        + struct.pack("<I", 1)
        + b"w"
        + struct.pack("<I", len(dims))
        + struct.pack(f"<{len(dims)}Q", *dims)
        + b"\x00" * 16
    )
    with pytest.raises(CheckpointFormatError) as excinfo:
        decode_checkpoint(blob)
    assert excinfo.value.offset == 25


def test_rng_state_round_trip():
    rng = np.random.default_rng(42)
    rng.random(5)
    saved = rng_to_array(rng)
    expected = rng.random(3)
    restored = np.random.default_rng(0)
    restored.bit_generator.state = array_to_rng_state(saved)
    np.testing.assert_array_equal(restored.random(3), expected)


def test_save_and_restore_training_state(tiny_spec, rng, tmp_path):
    model = build_model(tiny_spec())
    opt = Adam(model.named_parameters(), lr=1e-2)
    model(Tensor(rng.normal(size=(4, 3, 16, 16)))).sum().backward()
    opt.step()
    state = TrainState(lr0=1e-2, epoch=4, num_decays=1, lr_best=0.75, lr_stale=2, best_val_accuracy=0.75)
    state.record(1.25, 0.75, 0.5)
    shuffle = np.random.default_rng(5)
    shuffle.random(4)
    path = checkpoint_save(tmp_path / "a.ckpt", model, opt, state, {"shuffle": shuffle})
    expected_draw = shuffle.random()

    other = build_model(tiny_spec(seed=9))
    other_opt = Adam(other.named_parameters(), lr=1e-2)
    other_shuffle = np.random.default_rng(0)
    restored = restore_training(checkpoint_load(path), other, other_opt, {"shuffle": other_shuffle})

    assert restored.counters() == state.counters()
    assert restored.history == state.history
    assert other_opt.step_count == 1
    for key, value in opt.state_dict().items():
        np.testing.assert_array_equal(other_opt.state_dict()[key], value)
    for key, value in model.state_dict().items():
        np.testing.assert_array_equal(other.state_dict()[key], value)
    assert other_shuffle.random() == expected_draw


def test_load_model_rebuilds_from_meta(tiny_spec, rng, tmp_path):
    model = build_model(tiny_spec("tiny-vit"))
    path = checkpoint_save(tmp_path / "m.ckpt", model, meta={"model": model.spec.to_dict()})
    loaded = load_model(path)
    x = Tensor(rng.normal(size=(2, 3, 16, 16)))
    assert loaded.spec == model.spec
    assert not loaded.training
    np.testing.assert_array_equal(loaded(x).data, model.eval()(x).data)


def test_load_model_without_meta(tiny_spec, tmp_path):
    path = checkpoint_save(tmp_path / "m.ckpt", build_model(tiny_spec()))
    with pytest.raises(CheckpointFormatError):
        load_model(path)
