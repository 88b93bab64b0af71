"""
텐서 함수형 연산 모듈
원소별 연산 디스패처, 소프트맥스, 구조 변경, 합성곱/풀링 구현
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigurationError, ShapeError
from .tensor import Tensor

_UNARY_OPS = {
    "relu": Tensor.relu,
    "gelu": Tensor.gelu,
    "sigmoid": Tensor.sigmoid,
    "log": Tensor.log,
    "exp": Tensor.exp,
}

_BINARY_OPS = {
    "add": Tensor.__add__,
    "sub": Tensor.__sub__,
    "mul": Tensor.__mul__,
    "div": Tensor.__truediv__,
}


def elementwise(kind: str, a: Tensor, b: Union[Tensor, float, None] = None) -> Tensor:
    """
    원소별 연산 디스패처

    Args:
        kind: 'add', 'sub', 'mul', 'div' 또는 단항 'relu', 'gelu', 'sigmoid', 'log', 'exp'
        a: 첫 번째 피연산자
        b: 두 번째 피연산자 (동일 형상 텐서 또는 스칼라, 단항 연산이면 None)

    Returns:
        Tensor: 연산 결과
    """
    if kind in _UNARY_OPS:
        if b is not None:
            raise ConfigurationError(f"단항 연산 '{kind}'에 두 번째 피연산자가 주어졌습니다")
        return _UNARY_OPS[kind](a)
    if kind in _BINARY_OPS:
        if b is None:
            raise ConfigurationError(f"이항 연산 '{kind}'에 두 번째 피연산자가 필요합니다")
        return _BINARY_OPS[kind](a, b)
    raise ConfigurationError(f"알 수 없는 원소별 연산: {kind}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return a.matmul(b)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """최댓값을 빼서 안정화한 소프트맥스"""
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(f"softmax axis {axis} out of range", x.shape)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return Tensor._make(y, (x,), backward, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(f"log_softmax axis {axis} out of range", x.shape)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - log_norm
    probs = np.exp(out)

    def backward(g):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return Tensor._make(out, (x,), backward, "log_softmax")


# ----------------------------------------------------------------------
# 구조 변경 연산
# ----------------------------------------------------------------------
def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    return x.reshape(tuple(shape))


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    return x.transpose(tuple(axes) if axes is not None else ())


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """
    지정 축으로 텐서 연결

    Args:
        tensors: 축 이외의 차원이 모두 같은 텐서 목록
        axis: 연결 축

    Returns:
        Tensor: 연결된 텐서
    """
    if not tensors:
        raise ShapeError("concat에 빈 텐서 목록이 주어졌습니다")
    ndim = tensors[0].ndim
    axis = axis % ndim
    reference = tensors[0].shape
    for t in tensors[1:]:
        if t.ndim != ndim or any(
            d != r for i, (d, r) in enumerate(zip(t.shape, reference)) if i != axis
        ):
            raise ShapeError("concat 비연결 축 차원 불일치", reference, t.shape)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    data = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor._make(data, tuple(tensors), backward, "concat")


def expand(x: Tensor, shape: Sequence[int]) -> Tensor:
    """
    명시적 브로드캐스트 (크기 1인 축만 확장 가능)

    채널/공간 어텐션 마스크 곱처럼 의도된 경우에만 사용한다.
    """
    shape = tuple(shape)
    if x.ndim != len(shape) or any(s != d and s != 1 for s, d in zip(x.shape, shape)):
        raise ShapeError("expand 불가능한 형상", x.shape, shape)
    axes = tuple(i for i, (s, d) in enumerate(zip(x.shape, shape)) if s == 1 and d != 1)

    def backward(g):
        return (g.sum(axis=axes, keepdims=True) if axes else g,)

    return Tensor._make(np.broadcast_to(x.data, shape), (x,), backward, "expand")


def broadcast_mul(x: Tensor, mask: Tensor) -> Tensor:
    """마스크를 x의 형상으로 명시적으로 확장한 뒤 곱함"""
    return x * expand(mask, x.shape)


def upsample_nearest(x: Tensor, factor: int = 2) -> Tensor:
    """마지막 두 축(H, W)에 대한 최근접 이웃 업샘플링"""
    if factor < 1:
        raise ConfigurationError(f"업샘플 배율은 1 이상이어야 합니다: {factor}")
    h, w = x.shape[-2:]
    data = np.repeat(np.repeat(x.data, factor, axis=-2), factor, axis=-1)
    lead = x.shape[:-2]

    def backward(g):
        blocks = g.reshape(lead + (h, factor, w, factor))
        return (blocks.sum(axis=(-3, -1)),)

    return Tensor._make(data, (x,), backward, "upsample_nearest")


# ----------------------------------------------------------------------
# 합성곱 / 풀링
# ----------------------------------------------------------------------
def _as_batched(x: Tensor) -> Tuple[Tensor, bool]:
    if x.ndim == 3:
        return x.reshape((1,) + x.shape), True
    if x.ndim != 4:
        raise ShapeError("[C,H,W] 또는 [N,C,H,W] 입력이 필요합니다", x.shape)
    return x, False


def _output_size(size: int, kernel: int, stride: int, padding: int, what: str) -> int:
    padded = size + 2 * padding
    if kernel > padded:
        raise ConfigurationError(f"{what}: 커널 {kernel}이 패딩된 크기 {padded}보다 큽니다")
    if (padded - kernel) % stride != 0:
        raise ConfigurationError(
            f"{what}: 출력 크기 ({size}+2*{padding}-{kernel})/{stride}+1 이 정수가 아닙니다"
        )
    return (padded - kernel) // stride + 1


def _scatter_windows(
    dwin: np.ndarray, padded_shape: Tuple[int, ...], kh: int, kw: int, stride: int
) -> np.ndarray:
    """윈도우별 그래디언트 [N,C,Ho,Wo,kh,kw]를 입력 위치로 누적"""
    ho, wo = dwin.shape[2], dwin.shape[3]
    grad = np.zeros(padded_shape)
    for i in range(kh):
        for j in range(kw):
            grad[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += dwin[..., i, j]
    return grad


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
    groups: int = 1,
) -> Tensor:
    """
    2D 교차상관 합성곱 (커널 뒤집기 없음)

    Args:
        x: [C_in,H,W] 또는 [N,C_in,H,W]
        weight: [C_out, C_in/groups, kh, kw]
        bias: [C_out] 또는 None
        stride: 보폭
        padding: 양쪽 0 패딩
        groups: 그룹 수 (groups == C_in 이면 depthwise)

    Returns:
        Tensor: [C_out,H',W'] 또는 [N,C_out,H',W']
    """
    xb, squeeze = _as_batched(x)
    n, c, h, w = xb.shape
    c_out, c_per_group, kh, kw = weight.shape
    if c % groups or c_out % groups or c_per_group != c // groups:
        raise ShapeError("conv2d 채널/그룹 불일치", xb.shape, weight.shape)
    if bias is not None and bias.shape != (c_out,):
        raise ShapeError("conv2d bias 형상 불일치", bias.shape, (c_out,))
    ho = _output_size(h, kh, stride, padding, "conv2d")
    wo = _output_size(w, kw, stride, padding, "conv2d")

    xp = np.pad(xb.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    win_g = windows.reshape(n, groups, c_per_group, ho, wo, kh, kw)
    w_g = weight.data.reshape(groups, c_out // groups, c_per_group, kh, kw)
    out = np.einsum("ngchwij,gocij->ngohw", win_g, w_g, optimize=True)
    out = out.reshape(n, c_out, ho, wo)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def backward(g):
        gg = g.reshape(n, groups, c_out // groups, ho, wo)
        dw = np.einsum("ngohw,ngchwij->gocij", gg, win_g, optimize=True).reshape(weight.shape)
        dwin = np.einsum("ngohw,gocij->ngchwij", gg, w_g, optimize=True)
        dxp = _scatter_windows(dwin.reshape(n, c, ho, wo, kh, kw), xp.shape, kh, kw, stride)
        dx = dxp[:, :, padding : padding + h, padding : padding + w]
        grads = [dx, dw]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return tuple(grads)

    parents = (xb, weight) if bias is None else (xb, weight, bias)
    result = Tensor._make(out, parents, backward, "conv2d")
    return result.reshape(result.shape[1:]) if squeeze else result


def pool2d(
    kind: str, x: Tensor, kh: int, kw: Optional[int] = None, stride: Optional[int] = None
) -> Tensor:
    """
    윈도우 풀링 (avg | max)

    max 풀링의 그래디언트는 윈도우 내 최댓값 원소(동률이면 첫 번째)로만 전달된다.
    """
    if kind not in ("avg", "max"):
        raise ConfigurationError(f"알 수 없는 풀링 종류: {kind}")
    kw = kh if kw is None else kw
    stride = kh if stride is None else stride
    xb, squeeze = _as_batched(x)
    n, c, h, w = xb.shape
    ho = _output_size(h, kh, stride, 0, "pool2d")
    wo = _output_size(w, kw, stride, 0, "pool2d")
    windows = sliding_window_view(xb.data, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    flat = windows.reshape(n, c, ho, wo, kh * kw)

    if kind == "avg":
        out = flat.mean(axis=-1)

        def backward(g):
            dwin = np.broadcast_to((g / (kh * kw))[..., None, None], (n, c, ho, wo, kh, kw))
            return (_scatter_windows(dwin, xb.shape, kh, kw, stride),)

    else:
        idx = flat.argmax(axis=-1)[..., None]
        out = np.take_along_axis(flat, idx, axis=-1)[..., 0]

        def backward(g):
            dflat = np.zeros((n, c, ho, wo, kh * kw))
            np.put_along_axis(dflat, idx, g[..., None], axis=-1)
            dwin = dflat.reshape(n, c, ho, wo, kh, kw)
            return (_scatter_windows(dwin, xb.shape, kh, kw, stride),)

    result = Tensor._make(out, (xb,), backward, f"{kind}_pool2d")
    return result.reshape(result.shape[1:]) if squeeze else result


def global_pool(kind: str, x: Tensor) -> Tensor:
    """
    전역 풀링: [C,H,W] -> [C], [N,C,H,W] -> [N,C]
    """
    if x.ndim not in (3, 4):
        raise ShapeError("global_pool 입력은 [C,H,W] 또는 [N,C,H,W]", x.shape)
    if kind == "avg":
        return x.mean(axis=(-2, -1))
    if kind == "max":
        return x.max(axis=(-2, -1))
    raise ConfigurationError(f"알 수 없는 풀링 종류: {kind}")


def one_hot(labels: Sequence[int], num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def channel_max(x: Tensor) -> Tensor:
    """채널 축(-3) 최댓값, keepdims"""
    return x.max(axis=x.ndim - 3, keepdims=True)


def channel_mean(x: Tensor) -> Tensor:
    return x.mean(axis=x.ndim - 3, keepdims=True)


__all__: List[str] = [
    "elementwise",
    "matmul",
    "softmax",
    "log_softmax",
    "reshape",
    "transpose",
    "concat",
    "expand",
    "broadcast_mul",
    "upsample_nearest",
    "conv2d",
    "pool2d",
    "global_pool",
    "one_hot",
    "channel_max",
    "channel_mean",
]
