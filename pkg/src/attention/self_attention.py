"""
셀프 어텐션 모듈
스케일드 닷-프로덕트 어텐션, 멀티헤드 셀프 어텐션, pre-norm 인코더 레이어
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, ShapeError
from ..nn import LayerNorm, Linear, Module, Parameter
from ..nn.layers import linear
from ..tensor import Tensor
from ..tensor import functional as F


def scaled_dot_product_attention(q: Tensor, k: Tensor, v: Tensor) -> Tuple[Tensor, Tensor]:
    """
    softmax(QK^T / sqrt(d_k)) V

    Args:
        q, k, v: [n, d_k] 또는 [B, n, d_k]

    Returns:
        (출력 [.., n, d_k], 어텐션 점수 [.., n, n])
    """
    d_k = q.shape[-1]
    axes = tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2)
    scores = F.softmax((q @ k.transpose(axes)) * (1.0 / math.sqrt(d_k)), axis=-1)
    return scores @ v, scores


def self_attention(
    tokens: Tensor,
    wq: List[Tensor],
    wk: List[Tensor],
    wv: List[Tensor],
    wo: Tensor,
) -> Tuple[Tensor, List[Tensor]]:
    """
    멀티헤드 셀프 어텐션

    Args:
        tokens: [n, d_model] 또는 [B, n, d_model]
        wq, wk, wv: 헤드별 투영 행렬 [d_model, d_k]
        wo: 출력 투영 [h * d_k, d_model]

    Returns:
        (출력 [.., n, d_model], 헤드별 점수 목록)
    """
    d_model = tokens.shape[-1]
    if wq[0].shape[0] != d_model:
        raise ShapeError("self_attention 토큰 차원 불일치", tokens.shape, wq[0].shape)
    heads, scores = [], []
    for q_w, k_w, v_w in zip(wq, wk, wv):
        out, s = scaled_dot_product_attention(
            linear(tokens, q_w), linear(tokens, k_w), linear(tokens, v_w)
        )
        heads.append(out)
        scores.append(s)
    merged = heads[0] if len(heads) == 1 else F.concat(heads, axis=-1)
    return linear(merged, wo), scores


class MultiHeadSelfAttention(Module):
    """
    멀티헤드 셀프 어텐션 레이어

    Args:
        d_model: 토큰 차원
        heads: 헤드 수 h (d_model = h * d_k)
    """

    def __init__(self, d_model: int, heads: int = 2, rng: Optional[np.random.Generator] = None):
        super().__init__()
        if heads < 1 or d_model % heads:
            raise ConfigurationError(f"헤드 수 {heads}가 d_model {d_model}을 나누지 않습니다")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.heads = heads
        self.d_k = d_model // heads
        bound = 1.0 / math.sqrt(d_model)

        def projection() -> Parameter:
            return Parameter(rng.uniform(-bound, bound, (d_model, self.d_k)))

        self.wq = [projection() for _ in range(heads)]
        self.wk = [projection() for _ in range(heads)]
        self.wv = [projection() for _ in range(heads)]
        self.wo = Parameter(
            rng.uniform(-1.0, 1.0, (heads * self.d_k, d_model)) / math.sqrt(heads * self.d_k)
        )
        self.last_scores: List[np.ndarray] = []

    def forward(self, x: Tensor) -> Tensor:
        out, scores = self_attention(x, self.wq, self.wk, self.wv, self.wo)
        self.last_scores = [s.data for s in scores]
        return out


class EncoderLayer(Module):
    """pre-norm 트랜스포머 인코더: x + MHSA(LN(x)), x + MLP(LN(x))"""

    def __init__(
        self,
        d_model: int,
        heads: int = 2,
        mlp_ratio: int = 2,
        rng: Optional[np.random.Generator] = None,
    ):
        super().__init__()
        self.norm1 = LayerNorm(d_model)
        self.attn = MultiHeadSelfAttention(d_model, heads, rng=rng)
        self.norm2 = LayerNorm(d_model)
        self.fc1 = Linear(d_model, mlp_ratio * d_model, rng=rng)
        self.fc2 = Linear(mlp_ratio * d_model, d_model, rng=rng)

    def forward(self, x: Tensor) -> Tensor:
        x = x + self.attn(self.norm1(x))
        return x + self.fc2(self.fc1(self.norm2(x)).gelu())
