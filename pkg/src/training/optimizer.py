"""
Adam 옵티마이저
"""

from collections import OrderedDict
from typing import Dict, Iterable, Tuple

import numpy as np

from ..errors import ConfigurationError, ShapeError
from ..nn import Parameter


def adam_step(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    step: int,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> None:
    """
    편향 보정 Adam 갱신 한 번 (param, m, v를 제자리에서 갱신)

    Args:
        param: 파라미터 값
        grad: 그래디언트
        m, v: 1차/2차 모멘트
        step: 이번 갱신 번호 (1부터)
        lr: 학습률
    """
    if not (param.shape == grad.shape == m.shape == v.shape):
        raise ShapeError("Adam 모멘트 형상 불일치", param.shape, grad.shape, m.shape)
    beta1, beta2 = betas
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**step)
    v_hat = v / (1.0 - beta2**step)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    """
    Adam 옵티마이저

    trainable이 False인 파라미터(동결된 백본)는 건너뛴다.
    모멘트는 파라미터 이름으로 관리되어 체크포인트에 저장된다.
    """

    def __init__(
        self,
        named_parameters: Iterable[Tuple[str, Parameter]],
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ConfigurationError(f"학습률은 양수여야 합니다: {lr}")
        self.params: Dict[str, Parameter] = OrderedDict(named_parameters)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.step_count = 0
        self.m: Dict[str, np.ndarray] = OrderedDict(
            (name, np.zeros_like(p.data)) for name, p in self.params.items()
        )
        self.v: Dict[str, np.ndarray] = OrderedDict(
            (name, np.zeros_like(p.data)) for name, p in self.params.items()
        )

    def step(self) -> None:
        self.step_count += 1
        for name, p in self.params.items():
            if not p.trainable or p.grad is None:
                continue
            adam_step(
                p.data, p.grad, self.m[name], self.v[name], self.step_count, self.lr,
                self.betas, self.eps,
            )

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        state: Dict[str, np.ndarray] = OrderedDict()
        for name in self.params:
            state[f"adam/m/{name}"] = self.m[name].copy()
        for name in self.params:
            state[f"adam/v/{name}"] = self.v[name].copy()
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        problems = []
        for kind, store in (("m", self.m), ("v", self.v)):
            for name in self.params:
                key = f"adam/{kind}/{name}"
                if key not in state:
                    problems.append(f"누락된 옵티마이저 키: {key}")
                    continue
                if state[key].shape != store[name].shape:
                    raise ShapeError(f"'{key}' 형상 불일치", store[name].shape, state[key].shape)
                store[name][...] = state[key]
        if problems:
            raise ConfigurationError(problems)
