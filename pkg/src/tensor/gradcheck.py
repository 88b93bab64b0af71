"""
수치 미분 기반 그래디언트 검증
"""

import logging
from typing import Callable, Sequence

import numpy as np

from ..errors import ContractError
from .tensor import Tensor, no_grad

logger = logging.getLogger(__name__)


def grad_check(
    f: Callable[[], Tensor],
    params: Sequence[Tensor],
    epsilon: float = 1e-5,
) -> float:
    """
    해석적 그래디언트와 중앙 차분 그래디언트 비교

    f는 인자 없이 스칼라 손실을 반환하는 결정적 함수여야 하며,
    params의 데이터를 제자리에서 바꿔가며 (f(p+e) - f(p-e)) / 2e 를 계산한다.

    Args:
        f: 스칼라 손실 Tensor를 반환하는 함수
        params: 검사 대상 텐서 목록 (requires_grad=True)
        epsilon: 차분 간격

    Returns:
        float: 모든 파라미터에 대한 max |analytic - numeric| / max(1, |numeric|)
    """
    loss = f()
    if loss.size != 1:
        raise ContractError(f"grad_check 대상 함수는 스칼라를 반환해야 합니다: shape {loss.shape}")
    loss.backward()
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params
    ]

    worst = 0.0
    with no_grad():
        for p, grad in zip(params, analytic):
            flat = p.data.reshape(-1)
            grad_flat = grad.reshape(-1)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + epsilon
                plus = f().item()
                flat[i] = original - epsilon
                minus = f().item()
                flat[i] = original
                numeric = (plus - minus) / (2.0 * epsilon)
                error = abs(grad_flat[i] - numeric) / max(1.0, abs(numeric))
                worst = max(worst, error)

    logger.debug(f"grad_check: 파라미터 {len(params)}개, 최대 상대 오차 {worst:.3e}")
    return worst
