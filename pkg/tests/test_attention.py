"""
어텐션 모듈 테스트
"""

import numpy as np
import pytest

from src.attention import (
    CBAM,
    FPN,
    AttentionModule,
    EncoderLayer,
    MultiHeadSelfAttention,
    cbam,
    channel_attention,
    residual_attention,
    scaled_dot_product_attention,
    spatial_attention,
)
from src.errors import ConfigurationError, ShapeError
from src.tensor import Tensor


def _zeros(*shape):
    return Tensor(np.zeros(shape))


def test_channel_attention_gate_in_unit_interval(rng):
    features = Tensor(rng.normal(size=(2, 4, 5, 5)))
    gate = channel_attention(features, Tensor(rng.normal(size=(4, 2))), Tensor(rng.normal(size=(2, 4))))
    assert gate.shape == (2, 4)
    assert np.all((gate.data > 0.0) & (gate.data < 1.0))


def test_spatial_attention_map_shape(rng):
    features = Tensor(rng.normal(size=(4, 6, 6)))
    out = spatial_attention(features, Tensor(rng.normal(size=(1, 2, 7, 7))), _zeros(1))
    assert out.shape == (1, 6, 6)


def test_cbam_with_zero_parameters_quarters_features(rng):
    features = rng.normal(size=(4, 5, 5))
    out = cbam(Tensor(features), _zeros(4, 2), _zeros(2, 4), _zeros(1, 2, 7, 7), _zeros(1))
    np.testing.assert_allclose(out.data, 0.25 * features, atol=1e-12)


def test_cbam_module_preserves_shape(rng):
    module = CBAM(4, reduction=2, rng=rng)
    assert module(Tensor(rng.normal(size=(2, 4, 6, 6)))).shape == (2, 4, 6, 6)
    with pytest.raises(ConfigurationError):
        CBAM(5, reduction=2)


def test_residual_attention_reference_values():
    out = residual_attention(Tensor([1.0, 2.0]), Tensor([0.5, 0.25]))
    np.testing.assert_allclose(out.data, [1.5, 2.5])
    with pytest.raises(ShapeError):
        residual_attention(Tensor([1.0, 2.0]), Tensor([0.5]))


def test_attention_module_records_mask_in_unit_interval(rng):
    module = AttentionModule(4, trunk_depth=1, rng=rng)
    out = module(Tensor(rng.normal(size=(2, 4, 8, 8))))
    assert out.shape == (2, 4, 8, 8)
    assert module.last_mask.shape == (2, 4, 8, 8)
    assert np.all((module.last_mask > 0.0) & (module.last_mask < 1.0))


def test_identical_tokens_attend_uniformly(rng):
    token = rng.normal(size=(1, 4))
    tokens = Tensor(np.repeat(token, 2, axis=0))
    _, scores = scaled_dot_product_attention(tokens, tokens, tokens)
    np.testing.assert_allclose(scores.data, np.full((2, 2), 0.5))


def test_self_attention_scores_are_row_stochastic(rng):
    mhsa = MultiHeadSelfAttention(6, heads=3, rng=rng)
    out = mhsa(Tensor(rng.normal(size=(2, 5, 6))))
    assert out.shape == (2, 5, 6)
    assert len(mhsa.last_scores) == 3
    for scores in mhsa.last_scores:
        np.testing.assert_allclose(scores.sum(axis=-1), np.ones((2, 5)))
    with pytest.raises(ConfigurationError):
        MultiHeadSelfAttention(6, heads=4)


def test_encoder_layer_keeps_token_shape(rng):
    layer = EncoderLayer(8, heads=2, mlp_ratio=2, rng=rng)
    assert layer(Tensor(rng.normal(size=(3, 8)))).shape == (3, 8)


def test_fpn_levels_share_output_width(rng):
    fpn = FPN([8, 4], 6, rng=rng)
    outputs = fpn([Tensor(rng.normal(size=(2, 8, 2, 2))), Tensor(rng.normal(size=(2, 4, 4, 4)))])
    assert [o.shape for o in outputs] == [(2, 6, 2, 2), (2, 6, 4, 4)]


def test_fpn_rejects_non_doubling_pyramid(rng):
    fpn = FPN([8, 4], 6, rng=rng)
    with pytest.raises(ConfigurationError):
        fpn([Tensor(rng.normal(size=(8, 2, 2))), Tensor(rng.normal(size=(4, 6, 6)))])
