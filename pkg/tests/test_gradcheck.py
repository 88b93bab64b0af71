"""
수치 미분 대비 역전파 검증
"""

import numpy as np
import pytest

from src.errors import ContractError
from src.gradient_suite import TOLERANCE, build_cases, run_suite
from src.nn import Linear
from src.tensor import Tensor, grad_check
from src.tensor import functional as F
from src.training.losses import cross_entropy_with_logits

CASE_NAMES = sorted(build_cases(0))


@pytest.mark.parametrize("name", CASE_NAMES)
def test_registered_op_gradients(name):
    f, params = build_cases(0)[name]
    assert grad_check(f, params) <= TOLERANCE


def test_two_layer_network_gradients():
    rng = np.random.default_rng(1)
    fc1 = Linear(4, 5, rng=rng)
    fc2 = Linear(5, 3, rng=rng)
    x = Tensor(rng.normal(size=(6, 4)))
    labels = np.array([0, 1, 2, 0, 1, 2])

    def loss():
        return cross_entropy_with_logits(fc2(F.elementwise("gelu", fc1(x))), labels)

    params = [fc1.weight, fc1.bias, fc2.weight, fc2.bias]
    assert grad_check(loss, params) <= TOLERANCE


def test_grad_check_rejects_non_scalar():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with pytest.raises(ContractError):
        grad_check(lambda: x * 2.0, [x])


def test_run_suite_filters_by_prefix():
    results = run_suite(seed=0, only=["elementwise."])
    assert len(results) > 0
    assert results["op"].str.startswith("elementwise.").all()
    assert results["passed"].all()


def test_suite_covers_attention_and_blocks():
    expected = {"cbam", "residual_attention", "self_attention", "fpn", "residual_block", "patch_embed"}
    assert expected <= set(CASE_NAMES)
