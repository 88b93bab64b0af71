"""
자동 미분 텐서 모듈
64비트 부동소수점 N차원 텐서와 역전파(reverse-mode autodiff) 구현
"""

import math
import numbers
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, ndtr

from ..errors import ContractError, DomainError, ShapeError

Scalar = Union[int, float]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_grad_enabled = True


@contextmanager
def no_grad() -> Iterator[None]:
    """연산 그래프 기록을 일시적으로 끄는 컨텍스트 (평가/수치 미분용)"""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


def _normalize_axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, numbers.Integral):
        axis = (axis,)
    axes = []
    for a in axis:
        if not -ndim <= a < ndim:
            raise ShapeError(f"axis {a} out of range for rank {ndim}")
        axes.append(a % ndim)
    return tuple(sorted(set(axes)))


class Tensor:
    """
    역전파를 지원하는 N차원 float64 텐서

    연산 결과 텐서는 피연산자(parents)와 그래디언트 규칙(backward 함수)을
    기록하며, 스칼라 손실에서 backward()를 호출하면 위상 정렬 역순으로
    한 번씩 방문하면서 grad를 채운다.
    """

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        """
        Tensor 초기화

        Args:
            data: 배열로 변환 가능한 값 (float64로 저장)
            requires_grad: 그래디언트 계산 여부
            name: 디버깅용 이름
        """
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents: Tuple["Tensor", ...] = ()
        self._backward_fn: Optional[BackwardFn] = None
        self._op = "leaf"

    # ------------------------------------------------------------------
    # 기본 속성
    # ------------------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._backward_fn is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item()은 원소가 하나인 텐서에만 가능합니다: shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, op={self._op}{grad})"

    # ------------------------------------------------------------------
    # 그래프 구성
    # ------------------------------------------------------------------
    @staticmethod
    def _make(
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward: BackwardFn,
        op: str,
    ) -> "Tensor":
        """연산 결과 텐서 생성 (필요할 때만 그래프에 기록)"""
        requires = _grad_enabled and any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=requires)
        if requires:
            out._parents = tuple(parents)
            out._backward_fn = backward
            out._op = op
        return out

    def _topological_order(self) -> List["Tensor"]:
        order: List[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self) -> None:
        """
        스칼라 손실에서 역전파 수행

        호출 시작 시 그래프에 도달 가능한 모든 노드의 grad를 0으로
        초기화한다 (손실 하나당 테이프 하나 모델).
        """
        if self.data.size != 1 or self.ndim > 1:
            raise ContractError(f"backward()는 스칼라 손실에만 가능합니다: shape {self.shape}")
        if not self.requires_grad:
            raise ContractError("그래디언트가 필요한 텐서에 연결되지 않은 손실입니다")

        order = self._topological_order()
        for node in order:
            if node.requires_grad:
                node.grad = np.zeros_like(node.data)
        self.grad = np.ones_like(self.data)

        for node in reversed(order):
            if node._backward_fn is None:
                continue
            parent_grads = node._backward_fn(node.grad)
            for parent, g in zip(node._parents, parent_grads):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad += g

    # ------------------------------------------------------------------
    # 이항 원소별 연산 (브로드캐스팅 없음: 형상 동일 또는 스칼라)
    # ------------------------------------------------------------------
    def _operand(self, other, op: str) -> Union["Tensor", float]:
        if isinstance(other, Tensor):
            if other.shape != self.shape:
                raise ShapeError(f"'{op}' 피연산자 형상 불일치", self.shape, other.shape)
            return other
        if isinstance(other, numbers.Real):
            return float(other)
        raise TypeError(f"'{op}'에 지원하지 않는 피연산자 타입: {type(other).__name__}")

    def __add__(self, other) -> "Tensor":
        b = self._operand(other, "add")
        if isinstance(b, Tensor):
            return Tensor._make(self.data + b.data, (self, b), lambda g: (g, g), "add")
        return Tensor._make(self.data + b, (self,), lambda g: (g,), "add")

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        b = self._operand(other, "sub")
        if isinstance(b, Tensor):
            return Tensor._make(self.data - b.data, (self, b), lambda g: (g, -g), "sub")
        return Tensor._make(self.data - b, (self,), lambda g: (g,), "sub")

    def __rsub__(self, other) -> "Tensor":
        b = self._operand(other, "sub")
        return Tensor._make(b - self.data, (self,), lambda g: (-g,), "sub")

    def __mul__(self, other) -> "Tensor":
        b = self._operand(other, "mul")
        if isinstance(b, Tensor):
            a_data, b_data = self.data, b.data
            return Tensor._make(
                a_data * b_data, (self, b), lambda g: (g * b_data, g * a_data), "mul"
            )
        return Tensor._make(self.data * b, (self,), lambda g: (g * b,), "mul")

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        b = self._operand(other, "div")
        if isinstance(b, Tensor):
            if np.any(b.data == 0.0):
                raise DomainError("0으로 나누기")
            a_data, b_data = self.data, b.data
            return Tensor._make(
                a_data / b_data,
                (self, b),
                lambda g: (g / b_data, -g * a_data / (b_data * b_data)),
                "div",
            )
        if b == 0.0:
            raise DomainError("0으로 나누기")
        return Tensor._make(self.data / b, (self,), lambda g: (g / b,), "div")

    def __rtruediv__(self, other) -> "Tensor":
        b = self._operand(other, "div")
        if np.any(self.data == 0.0):
            raise DomainError("0으로 나누기")
        a_data = self.data
        return Tensor._make(b / a_data, (self,), lambda g: (-g * b / (a_data * a_data),), "div")

    def __neg__(self) -> "Tensor":
        return Tensor._make(-self.data, (self,), lambda g: (-g,), "neg")

    def __pow__(self, exponent: Scalar) -> "Tensor":
        if not isinstance(exponent, numbers.Real):
            raise TypeError("지수는 스칼라만 지원합니다")
        if exponent < 1 and np.any(self.data < 0):
            raise DomainError(f"음수의 {exponent} 거듭제곱")
        x = self.data
        return Tensor._make(
            x**exponent, (self,), lambda g: (g * exponent * x ** (exponent - 1),), "pow"
        )

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return self.matmul(other)

    # ------------------------------------------------------------------
    # 단항 연산
    # ------------------------------------------------------------------
    def relu(self) -> "Tensor":
        mask = self.data > 0
        return Tensor._make(np.where(mask, self.data, 0.0), (self,), lambda g: (g * mask,), "relu")

    def sigmoid(self) -> "Tensor":
        s = expit(self.data)
        return Tensor._make(s, (self,), lambda g: (g * s * (1.0 - s),), "sigmoid")

    def gelu(self) -> "Tensor":
        # 정확한 가우시안 CDF 형태: x * Phi(x)
        x = self.data
        cdf = ndtr(x)
        pdf = np.exp(-0.5 * x * x) / _SQRT_2PI
        return Tensor._make(x * cdf, (self,), lambda g: (g * (cdf + x * pdf),), "gelu")

    def exp(self) -> "Tensor":
        e = np.exp(self.data)
        return Tensor._make(e, (self,), lambda g: (g * e,), "exp")

    def log(self) -> "Tensor":
        if np.any(self.data <= 0.0):
            raise DomainError("0 이하 값의 log")
        x = self.data
        return Tensor._make(np.log(x), (self,), lambda g: (g / x,), "log")

    # ------------------------------------------------------------------
    # 축소 연산
    # ------------------------------------------------------------------
    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        axes = _normalize_axes(axis, self.ndim)
        shape = self.shape
        kept_shape = tuple(1 if i in axes else d for i, d in enumerate(shape))

        def backward(g):
            return (np.broadcast_to(g.reshape(kept_shape), shape).copy(),)

        return Tensor._make(self.data.sum(axis=axes, keepdims=keepdims), (self,), backward, "sum")

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        axes = _normalize_axes(axis, self.ndim)
        count = 1
        for a in axes:
            count *= self.shape[a]
        return self.sum(axis=axes, keepdims=keepdims) * (1.0 / count)

    def max(self, axis=None, keepdims: bool = False) -> "Tensor":
        """최댓값 축소 (동률이면 행 우선 순서상 첫 원소로 그래디언트 전달)"""
        axes = _normalize_axes(axis, self.ndim)
        kept = [i for i in range(self.ndim) if i not in axes]
        perm = kept + list(axes)
        moved = self.data.transpose(perm)
        flat = moved.reshape(moved.shape[: len(kept)] + (-1,))
        idx = flat.argmax(axis=-1)[..., None]
        reduced = np.take_along_axis(flat, idx, axis=-1)[..., 0]
        out_shape = tuple(1 if i in axes else d for i, d in enumerate(self.shape))
        data = reduced.reshape(out_shape) if keepdims else reduced
        inverse = np.argsort(perm)

        def backward(g):
            grad_flat = np.zeros_like(flat)
            np.put_along_axis(grad_flat, idx, g.reshape(reduced.shape)[..., None], axis=-1)
            return (grad_flat.reshape(moved.shape).transpose(inverse),)

        return Tensor._make(data, (self,), backward, "max")

    # ------------------------------------------------------------------
    # 행렬곱 및 구조 변경
    # ------------------------------------------------------------------
    def matmul(self, other: "Tensor") -> "Tensor":
        """
        행렬곱 (선행 배치 차원은 동일해야 함)

        Args:
            other: [..., k, n] 텐서

        Returns:
            Tensor: [..., m, n]
        """
        a, b = self.data, other.data
        if a.ndim < 2 or b.ndim != a.ndim or a.shape[:-2] != b.shape[:-2] or a.shape[-1] != b.shape[-2]:
            raise ShapeError("matmul 내부 차원 불일치", a.shape, b.shape)

        def backward(g):
            return (g @ np.swapaxes(b, -1, -2), np.swapaxes(a, -1, -2) @ g)

        return Tensor._make(a @ b, (self, other), backward, "matmul")

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        try:
            data = self.data.reshape(shape)
        except ValueError:
            raise ShapeError("reshape 원소 개수 불일치", self.shape, shape) from None
        original = self.shape
        return Tensor._make(data, (self,), lambda g: (g.reshape(original),), "reshape")

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        if sorted(axes) != list(range(self.ndim)):
            raise ShapeError(f"잘못된 transpose 축 {axes}", self.shape)
        inverse = tuple(np.argsort(axes))
        return Tensor._make(
            self.data.transpose(axes), (self,), lambda g: (g.transpose(inverse),), "transpose"
        )

    @property
    def T(self) -> "Tensor":
        return self.transpose()
