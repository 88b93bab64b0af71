"""
백본, 융합 모델, 헤드 교체, Grad-CAM 테스트
"""

import numpy as np
import pytest

from src.data.image_io import read_pgm
from src.errors import ConfigurationError, ContractError, ShapeError
from src.models import (
    ARCHITECTURES,
    FusionModel,
    ModelSpec,
    TinyConvNeXt,
    TinyViT,
    build_fusion,
    build_model,
    count_parameters,
    grad_cam,
    normalize_heatmap,
    replace_head,
    save_heatmap,
    unfreeze,
)
from src.nn import Linear
from src.tensor import Tensor


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_every_architecture_produces_logits(arch, tiny_spec, rng):
    model = build_model(tiny_spec(arch))
    logits = model(Tensor(rng.normal(size=(2, 3, 16, 16))))
    assert logits.shape == (2, 3)
    assert np.all(np.isfinite(logits.data))


def test_model_rejects_wrong_input_shape(tiny_spec, rng):
    model = build_model(tiny_spec())
    with pytest.raises(ShapeError):
        model(Tensor(rng.normal(size=(2, 3, 8, 8))))


def test_spec_collects_all_problems():
    with pytest.raises(ConfigurationError) as excinfo:
        ModelSpec(arch="alexnet", num_classes=1)
    assert len(excinfo.value.problems) == 2


def test_spec_alias_and_patch_divisibility():
    assert ModelSpec(arch="fpn-classifier").arch == "fpn"
    with pytest.raises(ConfigurationError):
        ModelSpec(arch="tiny-vit", height=18, width=18, patch=4)


def test_same_seed_builds_identical_models(tiny_spec):
    a = build_model(tiny_spec("tiny-convnext")).state_dict()
    b = build_model(tiny_spec("tiny-convnext")).state_dict()
    assert list(a) == list(b)
    for key in a:
        np.testing.assert_array_equal(a[key], b[key])


def test_head_is_last_in_state_dict(tiny_spec):
    keys = list(build_model(tiny_spec()).state_dict())
    assert [k for k in keys if k.startswith("head.")] == ["head.weight", "head.bias"]


def test_feature_maps_are_recorded(tiny_spec, rng):
    model = build_model(tiny_spec("fpn"))
    model(Tensor(rng.normal(size=(2, 3, 16, 16))))
    assert model.feature_map_names() == ["stem", "down1", "down2", "fpn1", "fpn2", "fpn3"]


def test_fusion_width_is_sum_of_branch_widths():
    spec = ModelSpec(arch="fusion", channels=16, d_model=24, depth=1)
    model = FusionModel(spec)
    assert model.feature_width == 40
    assert model.hidden == 20
    assert model.classifier.fc1.in_features == 40


def test_build_fusion_from_explicit_branches(rng):
    spec = ModelSpec(arch="fusion", channels=8, d_model=16, depth=1, hidden=12)
    branch_a = TinyConvNeXt(spec.with_updates(arch="tiny-convnext"), with_head=False, rng=rng)
    branch_b = TinyViT(spec.with_updates(arch="tiny-vit"), with_head=False, rng=rng)
    model = build_fusion(branch_a, branch_b, spec, rng=rng)
    assert model.classifier.fc1.out_features == 12
    assert model(Tensor(rng.normal(size=(3, 3, 16, 16)))).shape == (3, 3)
    assert "branch_a.stem" in model.feature_map_names()


def test_replace_head_freezes_backbone(tiny_spec):
    model = build_model(tiny_spec())
    before = count_parameters(model)
    replace_head(model, 102, freeze_backbone=True)
    assert model.head.out_features == 102
    assert model.spec.num_classes == 102
    trainable = {name for name, p in model.named_parameters() if p.trainable}
    assert trainable == {"head.weight", "head.bias"}
    assert count_parameters(model) == before + (8 + 1) * (102 - 3)

    unfreeze(model)
    assert all(p.trainable for p in model.parameters())


def test_replace_head_on_fusion_model():
    model = FusionModel(ModelSpec(arch="fusion", channels=8, d_model=16, depth=1))
    replace_head(model, 5)
    assert model.classifier.head.out_features == 5


def test_replace_head_requires_a_head():
    with pytest.raises(ContractError):
        replace_head(Linear(3, 2), 4)


def test_grad_cam_heatmap_is_normalized(tiny_spec, rng):
    model = build_model(tiny_spec())
    heatmap = grad_cam(model, rng.random((3, 16, 16)), target_class=1, layer_name="block1")
    assert heatmap.shape == (16, 16)
    assert heatmap.data.min() >= 0.0
    assert heatmap.data.max() <= 1.0
    assert model.training


def test_grad_cam_follows_single_channel_head(tiny_spec, rng):
    model = build_model(tiny_spec())
    image = rng.random((3, 16, 16))
    model.eval()
    model(Tensor(image[None]))
    fmap = model.feature_maps["block1"].data[0]
    k = int(np.argmax(fmap.reshape(fmap.shape[0], -1).std(axis=1)))

    # 목표 로짓 = 채널 k의 전역 평균
    weight = np.zeros_like(model.head.weight.data)
    weight[k, 2] = 1.0
    model.head.weight.data = weight
    model.head.bias.data = np.zeros_like(model.head.bias.data)

    heatmap = grad_cam(model, image, target_class=2, layer_name="block1")
    expected = normalize_heatmap(np.maximum(fmap[k], 0.0))
    np.testing.assert_allclose(heatmap.data, expected, atol=1e-9)


def test_grad_cam_unknown_layer_or_class(tiny_spec, rng):
    model = build_model(tiny_spec())
    image = rng.random((3, 16, 16))
    with pytest.raises(ConfigurationError):
        grad_cam(model, image, 0, "block9")
    with pytest.raises(ConfigurationError):
        grad_cam(model, image, 3, "block1")


def test_normalize_heatmap_constant_maps():
    np.testing.assert_array_equal(normalize_heatmap(np.zeros((2, 2))), np.zeros((2, 2)))
    np.testing.assert_array_equal(normalize_heatmap(np.full((2, 2), 3.0)), np.ones((2, 2)))


def test_save_heatmap_writes_pgm(tmp_path):
    heatmap = np.array([[0.0, 0.5], [1.0, 0.25]])
    path = save_heatmap(heatmap, tmp_path / "cam.pgm")
    np.testing.assert_array_equal(read_pgm(path), [[0, 128], [255, 64]])
