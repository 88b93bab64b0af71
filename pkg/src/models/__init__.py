"""
모델 모듈
데스크 규모 백본, 이중 백본 융합 모델, 헤드 교체, Grad-CAM
"""

from ..nn import count_parameters
from .backbones import Backbone, FPNClassifier, RANClassifier, TinyConvNeXt, TinyResNet, TinyViT
from .factory import MODEL_REGISTRY, build_model
from .fusion import FusionClassifier, FusionModel, build_fusion
from .grad_cam import grad_cam, normalize_heatmap, save_heatmap
from .head import replace_head, unfreeze
from .spec import ARCHITECTURES, ModelSpec

__all__ = [
    "ModelSpec",
    "ARCHITECTURES",
    "Backbone",
    "TinyResNet",
    "TinyConvNeXt",
    "TinyViT",
    "RANClassifier",
    "FPNClassifier",
    "FusionClassifier",
    "FusionModel",
    "build_fusion",
    "build_model",
    "MODEL_REGISTRY",
    "replace_head",
    "unfreeze",
    "count_parameters",
    "grad_cam",
    "normalize_heatmap",
    "save_heatmap",
]
