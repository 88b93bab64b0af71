"""
그래디언트 검증 스위트
미분 가능한 모든 연산을 고정 시드 입력에서 중앙 차분과 비교
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .attention import CBAM, FPN, AttentionModule, MultiHeadSelfAttention, channel_attention, spatial_attention
from .nn import (
    BatchNorm,
    ConvNeXtBlock,
    Module,
    PatchEmbed,
    ResidualBlock,
    batch_norm,
    dropout,
    layer_norm,
    linear,
)
from .tensor import Tensor, grad_check
from .tensor import functional as F
from .training.losses import cross_entropy, cross_entropy_with_logits

logger = logging.getLogger(__name__)

TOLERANCE = 1e-4

Case = Tuple[Callable[[], Tensor], List[Tensor]]


def _weighted(out: Tensor, rng: np.random.Generator) -> Callable[[Tensor], Tensor]:
    """출력과 같은 형상의 고정 가중치로 스칼라 손실을 만드는 함수"""
    weights = Tensor(rng.normal(size=out.shape))
    return lambda y: (y * weights).sum()


def _leaf(values: np.ndarray) -> Tensor:
    return Tensor(values, requires_grad=True)


def _away_from_zero(rng: np.random.Generator, shape: Sequence[int], margin: float = 0.1) -> np.ndarray:
    """|x| >= margin 인 값 (relu 꺾임 회피)"""
    magnitude = rng.uniform(margin, 1.0, shape)
    return magnitude * rng.choice([-1.0, 1.0], size=shape)


def _distinct(rng: np.random.Generator, shape: Sequence[int]) -> np.ndarray:
    """서로 0.1 이상 떨어진 값 (max 동률 회피)"""
    size = int(np.prod(shape))
    return (rng.permutation(size).reshape(shape) - size / 2.0) * 0.1


def _case(fn: Callable[..., Tensor], inputs: List[Tensor], rng: np.random.Generator,
          extra: Sequence[Tensor] = ()) -> Case:
    loss = _weighted(fn(*inputs), rng)
    return (lambda: loss(fn(*inputs))), list(inputs) + list(extra)


def _module_case(module: Module, x: Tensor, rng: np.random.Generator) -> Case:
    loss = _weighted(module(x), rng)
    return (lambda: loss(module(x))), [x] + module.parameters()


# ----------------------------------------------------------------------
# 연산별 케이스
# ----------------------------------------------------------------------
def _elementwise_cases(rng: np.random.Generator) -> Dict[str, Case]:
    shape = (3, 4)
    a = _leaf(rng.normal(size=shape))
    b = _leaf(rng.uniform(0.5, 1.5, shape) * rng.choice([-1.0, 1.0], size=shape))
    positive = _leaf(rng.uniform(0.5, 2.0, shape))
    kinked = _leaf(_away_from_zero(rng, shape))
    cases = {
        f"elementwise.{kind}": _case(lambda x, y, k=kind: F.elementwise(k, x, y), [a, b], rng)
        for kind in ("add", "sub", "mul", "div")
    }
    cases["elementwise.relu"] = _case(lambda x: F.elementwise("relu", x), [kinked], rng)
    cases["elementwise.sigmoid"] = _case(lambda x: F.elementwise("sigmoid", x), [a], rng)
    cases["elementwise.gelu"] = _case(lambda x: F.elementwise("gelu", x), [a], rng)
    cases["elementwise.exp"] = _case(lambda x: F.elementwise("exp", x), [a], rng)
    cases["elementwise.log"] = _case(lambda x: F.elementwise("log", x), [positive], rng)
    cases["pow"] = _case(lambda x: x**3, [a], rng)
    return cases


def _tensor_cases(rng: np.random.Generator) -> Dict[str, Case]:
    x = _leaf(rng.normal(size=(2, 3, 4)))
    distinct = _leaf(_distinct(rng, (2, 3, 4)))
    m1 = _leaf(rng.normal(size=(3, 4)))
    m2 = _leaf(rng.normal(size=(4, 5)))
    small = _leaf(rng.normal(size=(2, 1, 4)))
    return {
        "sum": _case(lambda t: t.sum(axis=1), [x], rng),
        "mean": _case(lambda t: t.mean(axis=(0, 2), keepdims=True), [x], rng),
        "max": _case(lambda t: t.max(axis=-1), [distinct], rng),
        "matmul": _case(F.matmul, [m1, m2], rng),
        "reshape": _case(lambda t: F.reshape(t, (6, 4)) * F.reshape(t, (6, 4)), [x], rng),
        "transpose": _case(lambda t: F.transpose(t, (2, 0, 1)) * 2.0, [x], rng),
        "concat": _case(lambda s, t: F.concat([s, t], axis=1), [small, x], rng),
        "expand": _case(lambda s: F.expand(s, (2, 3, 4)) * x.detach(), [small], rng),
        "softmax": _case(lambda t: F.softmax(t, axis=-1), [x], rng),
        "log_softmax": _case(lambda t: F.log_softmax(t, axis=1), [x], rng),
        "upsample_nearest": _case(lambda t: F.upsample_nearest(t, 2), [x], rng),
    }


def _conv_cases(rng: np.random.Generator) -> Dict[str, Case]:
    x = _leaf(rng.normal(size=(2, 4, 6, 6)))
    w = _leaf(rng.normal(size=(3, 4, 3, 3)) * 0.3)
    b = _leaf(rng.normal(size=(3,)))
    dw = _leaf(rng.normal(size=(4, 1, 3, 3)) * 0.3)
    pooled = _leaf(_distinct(rng, (2, 3, 4, 4)))
    return {
        "conv2d": _case(lambda t, k, c: F.conv2d(t, k, c, stride=1, padding=1), [x, w, b], rng),
        "conv2d.strided": _case(lambda t, k: F.conv2d(t, k, None, stride=2, padding=0), [x, w], rng),
        "conv2d.depthwise": _case(lambda t, k: F.conv2d(t, k, None, padding=1, groups=4), [x, dw], rng),
        "avg_pool2d": _case(lambda t: F.pool2d("avg", t, 2), [pooled], rng),
        "max_pool2d": _case(lambda t: F.pool2d("max", t, 2), [pooled], rng),
        "global_avg_pool": _case(lambda t: F.global_pool("avg", t), [pooled], rng),
        "global_max_pool": _case(lambda t: F.global_pool("max", t), [pooled], rng),
    }


def _layer_cases(rng: np.random.Generator) -> Dict[str, Case]:
    x = _leaf(rng.normal(size=(4, 5)))
    w = _leaf(rng.normal(size=(5, 3)))
    b = _leaf(rng.normal(size=(3,)))
    images = _leaf(rng.normal(size=(3, 2, 3, 3)))
    gamma = _leaf(rng.uniform(0.5, 1.5, 2))
    beta = _leaf(rng.normal(size=2))
    ln_gamma = _leaf(rng.uniform(0.5, 1.5, 5))
    ln_beta = _leaf(rng.normal(size=5))
    running_mean = rng.normal(size=2)
    running_var = rng.uniform(0.5, 1.5, 2)

    def bn(training: bool):
        def fn(t, g, c):
            # 러닝 통계는 복사본을 넘겨 반복 호출에도 결정적으로 유지
            return batch_norm(t, g, c, running_mean.copy(), running_var.copy(), training)

        return fn

    def frozen_dropout(t):
        return dropout(t, 0.3, True, np.random.default_rng(7))

    return {
        "linear": _case(linear, [x, w, b], rng),
        "batch_norm.train": _case(bn(True), [images, gamma, beta], rng),
        "batch_norm.eval": _case(bn(False), [images, gamma, beta], rng),
        "layer_norm": _case(lambda t, g, c: layer_norm(t, g, c), [x, ln_gamma, ln_beta], rng),
        "dropout": _case(frozen_dropout, [x], rng),
    }


def _block_cases(rng: np.random.Generator) -> Dict[str, Case]:
    init = np.random.default_rng(11)
    images = _leaf(rng.normal(size=(2, 4, 6, 6)))
    block_stack = [ResidualBlock(4, 4, rng=init), ResidualBlock(4, 6, rng=init)]

    def stack(t):
        for block in block_stack:
            t = block(t)
        return t

    stack_params = [p for block in block_stack for p in block.parameters()]
    cases = {
        "residual_block": _case(stack, [images], rng, stack_params),
        "convnext_block": _module_case(ConvNeXtBlock(4, expansion=2, rng=init), images, rng),
        "patch_embed": _module_case(PatchEmbed(4, (6, 6), 3, 5, rng=init), images, rng),
    }
    bn = BatchNorm(4)
    cases["batch_norm.module"] = _module_case(bn, images, rng)
    return cases


def _attention_cases(rng: np.random.Generator) -> Dict[str, Case]:
    init = np.random.default_rng(13)
    features = _leaf(rng.normal(size=(2, 4, 4, 4)))
    w0 = _leaf(rng.normal(size=(4, 2)))
    w1 = _leaf(rng.normal(size=(2, 4)))
    kernel = _leaf(rng.normal(size=(1, 2, 7, 7)) * 0.2)
    bias = _leaf(rng.normal(size=(1,)))
    tokens = _leaf(rng.normal(size=(2, 4, 6)))
    coarse = _leaf(rng.normal(size=(2, 6, 2, 2)))
    fine = _leaf(rng.normal(size=(2, 3, 4, 4)))
    fpn = FPN([6, 3], 4, rng=init)
    fpn_weights = [Tensor(rng.normal(size=(2, 4, 2, 2))), Tensor(rng.normal(size=(2, 4, 4, 4)))]

    def fpn_loss() -> Tensor:
        outs = fpn([coarse, fine])
        return (outs[0] * fpn_weights[0]).sum() + (outs[1] * fpn_weights[1]).sum()

    return {
        "channel_attention": _case(channel_attention, [features, w0, w1], rng),
        "spatial_attention": _case(spatial_attention, [features, kernel, bias], rng),
        "cbam": _module_case(CBAM(4, reduction=2, rng=init), features, rng),
        "residual_attention": _module_case(AttentionModule(4, trunk_depth=1, rng=init), features, rng),
        "self_attention": _module_case(MultiHeadSelfAttention(6, heads=2, rng=init), tokens, rng),
        "fpn": (fpn_loss, [coarse, fine] + fpn.parameters()),
    }


def _loss_cases(rng: np.random.Generator) -> Dict[str, Case]:
    logits = _leaf(rng.normal(size=(5, 4)))
    labels = rng.integers(0, 4, size=5)
    return {
        "cross_entropy": ((lambda: cross_entropy(F.softmax(logits, axis=1), labels)), [logits]),
        "cross_entropy_with_logits": ((lambda: cross_entropy_with_logits(logits, labels)), [logits]),
    }


SUITES = (
    _elementwise_cases,
    _tensor_cases,
    _conv_cases,
    _layer_cases,
    _block_cases,
    _attention_cases,
    _loss_cases,
)


def build_cases(seed: int = 0) -> Dict[str, Case]:
    rng = np.random.default_rng(seed)
    cases: Dict[str, Case] = {}
    for suite in SUITES:
        cases.update(suite(rng))
    return cases


def run_suite(
    seed: int = 0,
    tolerance: float = TOLERANCE,
    only: Optional[Sequence[str]] = None,
) -> pd.DataFrame:
    """
    전체 그래디언트 검증 실행

    Args:
        seed: 입력 생성 시드
        tolerance: 통과 기준 최대 상대 오차
        only: 실행할 연산 이름 접두사 목록 (None이면 전체)

    Returns:
        DataFrame: op, max_relative_error, passed
    """
    rows = []
    for name, (f, params) in build_cases(seed).items():
        if only and not any(name.startswith(prefix) for prefix in only):
            continue
        error = grad_check(f, params)
        rows.append({"op": name, "max_relative_error": error, "passed": error <= tolerance})
        logger.debug(f"{name}: {error:.3e}")
    return pd.DataFrame(rows, columns=["op", "max_relative_error", "passed"])


def print_results(results: pd.DataFrame, tolerance: float = TOLERANCE) -> None:
    print("\n" + "=" * 60)
    print(f"그래디언트 검증 (기준 {tolerance:.0e})")
    print("=" * 60)
    for row in results.itertuples(index=False):
        mark = "" if row.passed else "  FAIL"
        print(f"{row.op:.<30} {row.max_relative_error:>12.3e}{mark}")
    failed = int((~results["passed"]).sum())
    print("=" * 60)
    print(f"{'통과':.<30} {len(results) - failed:>12} / {len(results)}")
    print("=" * 60 + "\n")
