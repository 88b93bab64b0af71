"""
어텐션 모듈
채널/공간 어텐션(CBAM), 잔차 어텐션, 셀프 어텐션, FPN
"""

from .cbam import CBAM, ChannelAttention, SpatialAttention, cbam, channel_attention, spatial_attention
from .fpn import FPN, fpn_fuse
from .residual_attention import AttentionModule, residual_attention
from .self_attention import (
    EncoderLayer,
    MultiHeadSelfAttention,
    scaled_dot_product_attention,
    self_attention,
)

__all__ = [
    "channel_attention",
    "spatial_attention",
    "cbam",
    "ChannelAttention",
    "SpatialAttention",
    "CBAM",
    "residual_attention",
    "AttentionModule",
    "scaled_dot_product_attention",
    "self_attention",
    "MultiHeadSelfAttention",
    "EncoderLayer",
    "fpn_fuse",
    "FPN",
]
