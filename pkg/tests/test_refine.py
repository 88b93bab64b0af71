"""
ROI 정제 전략과 마스크 오버레이 테스트
"""

import numpy as np
import pytest

from src.data import (
    DatasetManifest,
    DetectionBox,
    Sample,
    attach_annotations,
    mask_overlay,
    parse_annotations,
    refine,
)
from src.errors import ConfigurationError, ManifestError, ShapeError


def _image(seed=0):
    return np.random.default_rng(seed).random((3, 8, 8))


def _box(confidence=0.9, cx=0.25):
    return DetectionBox(0, cx, 0.5, 0.5, 0.5, confidence)


@pytest.fixture
def annotated():
    samples = [
        Sample(0, "train", pixels=_image(0), annotations=[_box(), _box(cx=0.75)], sample_id="two"),
        Sample(1, "train", pixels=_image(1), annotations=[], sample_id="none"),
        Sample(1, "train", pixels=_image(2), annotations=[_box(0.3)], sample_id="weak"),
        Sample(0, "val", pixels=_image(3), annotations=[_box()], sample_id="val_box"),
        Sample(1, "test", pixels=_image(4), annotations=[], sample_id="test_none"),
    ]
    return DatasetManifest(samples, num_classes=2)


def _ids(manifest):
    return [s.sample_id for s in manifest.samples]


def test_crop_train_splits_multi_box_sample(annotated):
    refined = refine(annotated, "crop-train")
    assert _ids(refined) == ["two_crop0", "two_crop1", "val_box", "test_none"]
    crop = refined.samples[0]
    assert crop.label == 0
    assert crop.split == "train"
    np.testing.assert_array_equal(crop.pixels, _image(0)[:, 2:6, 0:4])


def test_croginal_train_keeps_originals(annotated):
    refined = refine(annotated, "croginal-train")
    assert _ids(refined) == ["two", "two_crop0", "two_crop1", "none", "weak", "val_box", "test_none"]
    assert refined.counts()["train"] == annotated.counts()["train"] + 2


def test_crop_all_splits_drops_boxless_samples(annotated):
    refined = refine(annotated, "crop-all-splits")
    assert _ids(refined) == ["two_crop0", "two_crop1", "val_box_crop0"]


def test_discard_all_splits_keeps_uncropped_survivors(annotated):
    refined = refine(annotated, "discard-all-splits")
    assert _ids(refined) == ["two", "val_box"]
    assert refined.samples[0].pixels.shape == (3, 8, 8)


def test_threshold_is_inclusive(annotated):
    refined = refine(annotated, "discard-all-splits", confidence_threshold=0.3)
    assert "weak" in _ids(refined)


def test_discard_is_noop_when_every_sample_has_a_box():
    samples = [Sample(0, split, pixels=_image(i), annotations=[_box()], sample_id=f"s{i}")
               for i, split in enumerate(["train", "val", "test"])]
    manifest = DatasetManifest(samples, num_classes=2)
    assert refine(manifest, "discard-all-splits").counts() == manifest.counts()


def test_refine_rejects_unknown_strategy(annotated):
    with pytest.raises(ConfigurationError):
        refine(annotated, "crop-everything")
    with pytest.raises(ConfigurationError):
        refine(annotated, "crop-train", confidence_threshold=1.5)


def test_parse_annotations(tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("0 0.5 0.5 0.2 0.2\n1 0.25 0.25 0.1 0.1 0.4\n")
    boxes = parse_annotations(path)
    assert [b.class_id for b in boxes] == [0, 1]
    assert boxes[0].confidence == 1.0
    assert boxes[1].confidence == 0.4
    assert parse_annotations(tmp_path / "missing.txt") == []

    path.write_text("0 0.5 0.5\n")
    with pytest.raises(ManifestError):
        parse_annotations(path)


def test_attach_annotations_from_synthetic_dataset(synthetic_dir, synthetic_manifest):
    manifest = attach_annotations(synthetic_manifest, synthetic_dir / "annotations")
    assert all(len(s.annotations) == 1 for s in manifest.samples)
    refined = refine(manifest, "crop-train")
    assert refined.counts() == synthetic_manifest.counts()


def test_mask_overlay_keeps_largest_region():
    labels = np.zeros((10, 10), dtype=int)
    labels[:7, :] = 1
    labels[7:, :] = 2
    image = np.ones((3, 10, 10))
    out = mask_overlay(image, labels)
    assert out[0].sum() == 70
    np.testing.assert_array_equal(out[:, 7:, :], 0.0)


def test_mask_overlay_keeps_larger_zero_labelled_region():
    labels = np.zeros((10, 10), dtype=int)
    labels[7:, :] = 1
    out = mask_overlay(np.ones((3, 10, 10)), labels)
    assert out[0].sum() == 70
    np.testing.assert_array_equal(out[:, :7, :], 1.0)
    np.testing.assert_array_equal(out[:, 7:, :], 0.0)


@pytest.mark.parametrize("value", [0, 1])
def test_mask_overlay_single_region_is_identity(rng, value):
    image = rng.random((3, 6, 5))
    out = mask_overlay(image, np.full((6, 5), value))
    np.testing.assert_array_equal(out, image)


def test_mask_overlay_all_background_is_zero(rng):
    out = mask_overlay(rng.random((3, 6, 5)), np.full((6, 5), -1))
    np.testing.assert_array_equal(out, np.zeros((3, 6, 5)))


def test_mask_overlay_uses_four_connectivity():
    labels = np.full((4, 4), -1)
    labels[0, 0] = labels[1, 1] = 1
    labels[2:, 2:] = 1
    out = mask_overlay(np.ones((3, 4, 4)), labels)
    assert out[0].sum() == 4
    assert out[0, 0, 0] == 0.0


def test_mask_overlay_shape_mismatch():
    with pytest.raises(ShapeError):
        mask_overlay(np.ones((3, 4, 4)), np.ones((5, 5), dtype=int))
