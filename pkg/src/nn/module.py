"""
신경망 모듈 기본 클래스
파라미터 수집, 학습/평가 모드, state_dict 직렬화
"""

from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, ContractError, ShapeError
from ..tensor import Tensor


class Parameter(Tensor):
    """
    학습 가능한 파라미터 텐서

    trainable이 False이면 그래디언트는 계산되지만 옵티마이저가 갱신하지 않는다.
    """

    def __init__(self, data, name: Optional[str] = None):
        super().__init__(data, requires_grad=True, name=name)
        self.trainable = True

    def __repr__(self):
        return f"Parameter(shape={self.shape}, trainable={self.trainable})"


class Module(ABC):
    """
    추상 신경망 모듈 클래스
    모든 레이어/블록/모델은 이 클래스를 상속받아야 함

    속성에 할당된 Parameter, Module, 그리고 그 리스트는 할당 순서대로
    점(.) 경로 이름을 가진 파라미터로 수집된다. 배치 정규화 러닝 통계처럼
    학습되지 않는 상태는 buffer_names에 이름을 등록한다.
    """

    buffer_names: Tuple[str, ...] = ()

    def __init__(self):
        self.training = True

    @abstractmethod
    def forward(self, x: Tensor) -> Tensor:
        """
        순전파 (추상 메서드)

        Args:
            x: 입력 텐서

        Returns:
            Tensor: 출력 텐서
        """
        pass

    def __call__(self, x: Tensor) -> Tensor:
        return self.forward(x)

    # ------------------------------------------------------------------
    # 순회
    # ------------------------------------------------------------------
    def _children(self) -> Iterator[Tuple[str, object]]:
        for key, value in vars(self).items():
            if isinstance(value, (Parameter, Module)):
                yield key, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, (Parameter, Module)):
                        yield f"{key}.{i}", item

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for key, value in self._children():
            name = f"{prefix}{key}"
            if isinstance(value, Parameter):
                yield name, value
            else:
                yield from value.named_parameters(prefix=f"{name}.")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_modules(self, prefix: str = "") -> Iterator[Tuple[str, "Module"]]:
        yield prefix.rstrip("."), self
        for key, value in self._children():
            if isinstance(value, Module):
                yield from value.named_modules(prefix=f"{prefix}{key}.")

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        for name in self.buffer_names:
            yield f"{prefix}{name}", getattr(self, name)
        for key, value in self._children():
            if isinstance(value, Module):
                yield from value.named_buffers(prefix=f"{prefix}{key}.")

    # ------------------------------------------------------------------
    # 모드 / 그래디언트
    # ------------------------------------------------------------------
    def train(self, mode: bool = True) -> "Module":
        for _, module in self.named_modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    # ------------------------------------------------------------------
    # 하위 모듈 접근 (헤드 교체용)
    # ------------------------------------------------------------------
    def get_submodule(self, path: str) -> "Module":
        target = self
        for part in path.split("."):
            if part.isdigit() and isinstance(target, (list, tuple)):
                target = target[int(part)]
            else:
                if not hasattr(target, part):
                    raise ContractError(f"하위 모듈을 찾을 수 없습니다: {path}")
                target = getattr(target, part)
        if not isinstance(target, Module):
            raise ContractError(f"'{path}'는 모듈이 아닙니다")
        return target

    def set_submodule(self, path: str, module: "Module") -> None:
        parent_path, _, leaf = path.rpartition(".")
        parent = self.get_submodule(parent_path) if parent_path else self
        if not hasattr(parent, leaf):
            raise ContractError(f"하위 모듈을 찾을 수 없습니다: {path}")
        setattr(parent, leaf, module)

    # ------------------------------------------------------------------
    # 직렬화
    # ------------------------------------------------------------------
    def state_dict(self) -> Dict[str, np.ndarray]:
        """파라미터와 버퍼의 사본 (이름 순서는 등록 순서)"""
        state: Dict[str, np.ndarray] = OrderedDict()
        for name, p in self.named_parameters():
            state[name] = p.data.copy()
        for name, buf in self.named_buffers():
            state[name] = np.array(buf, dtype=np.float64)
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True) -> None:
        """
        state_dict 복원 (파라미터 객체는 유지하고 값만 덮어씀)

        Args:
            state: 이름 -> 배열
            strict: True면 누락/초과 키를 오류로 처리
        """
        params = dict(self.named_parameters())
        buffers = {name for name, _ in self.named_buffers()}
        expected = set(params) | buffers
        if strict:
            problems = [f"누락된 키: {k}" for k in params if k not in state]
            problems += [f"누락된 키: {k}" for k in sorted(buffers) if k not in state]
            problems += [f"알 수 없는 키: {k}" for k in state if k not in expected]
            if problems:
                raise ConfigurationError(problems)

        for name, value in state.items():
            value = np.asarray(value, dtype=np.float64)
            if name in params:
                p = params[name]
                if p.shape != value.shape:
                    raise ShapeError(f"'{name}' 형상 불일치", p.shape, value.shape)
                p.data[...] = value
            elif name in buffers:
                owner_path, _, attr = name.rpartition(".")
                owner = self.get_submodule(owner_path) if owner_path else self
                current = getattr(owner, attr)
                if current.shape != value.shape:
                    raise ShapeError(f"'{name}' 형상 불일치", current.shape, value.shape)
                setattr(owner, attr, value.copy())


def count_parameters(model: Module, trainable_only: bool = False) -> int:
    """모델 파라미터 원소 수"""
    return int(
        sum(p.size for p in model.parameters() if p.trainable or not trainable_only)
    )
