"""
텐서 코어 모듈
자동 미분 텐서, 함수형 연산, 그래디언트 검증
"""

from . import functional
from .gradcheck import grad_check
from .tensor import Tensor, is_grad_enabled, no_grad

__all__ = ["Tensor", "no_grad", "is_grad_enabled", "grad_check", "functional"]
