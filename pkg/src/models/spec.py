"""
모델 사양 (ModelSpec)
아키텍처 종류와 폭/깊이/패치/헤드 하이퍼파라미터, 입력 사양
"""

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from ..errors import ConfigurationError

ARCHITECTURES = ("tiny-resnet", "tiny-convnext", "tiny-vit", "ran", "fpn", "fusion")
_ALIASES = {"fpn-classifier": "fpn", "resnet": "tiny-resnet", "convnext": "tiny-convnext", "vit": "tiny-vit"}


@dataclass
class ModelSpec:
    """
    모델 사양

    Attributes:
        arch: 아키텍처 종류
        num_classes: 클래스 수 (2 이상)
        in_channels, height, width: 입력 사양
        channels: CNN 분기 채널 폭
        depth: 블록 개수
        patch: ViT 패치 크기
        d_model: ViT 토큰 차원
        heads: 셀프 어텐션 헤드 수
        mlp_ratio: 인코더 MLP 확장 비율
        reduction: 채널 어텐션 축소 비율
        cbam: tiny-resnet 잔차 블록 뒤에 CBAM 삽입 여부
        ran_modules: 쌓을 RAN 어텐션 모듈 개수
        fpn_dim: FPN 공통 채널 수
        hidden: 융합 분류기 은닉 폭 (None이면 융합 폭의 절반)
        dropout: 융합 분류기 드롭아웃 비율
        seed: 초기화 시드
    """

    arch: str = "tiny-resnet"
    num_classes: int = 3
    in_channels: int = 3
    height: int = 16
    width: int = 16
    channels: int = 16
    depth: int = 2
    patch: int = 4
    d_model: int = 24
    heads: int = 2
    mlp_ratio: int = 2
    reduction: int = 2
    cbam: bool = False
    ran_modules: int = 2
    fpn_dim: int = 16
    hidden: Optional[int] = None
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self):
        self.arch = _ALIASES.get(self.arch, self.arch)
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    @property
    def input_shape(self) -> Tuple[int, int, int]:
        return (self.in_channels, self.height, self.width)

    def problems(self) -> List[str]:
        """사양 불변식 위반 목록 (비어 있으면 유효)"""
        problems = []
        if self.arch not in ARCHITECTURES:
            problems.append(f"model.arch '{self.arch}'는 {', '.join(ARCHITECTURES)} 중 하나여야 합니다")
        if self.num_classes < 2:
            problems.append(f"model.num_classes는 2 이상이어야 합니다: {self.num_classes}")
        for name in ("in_channels", "height", "width", "channels", "depth", "patch", "d_model",
                     "heads", "mlp_ratio", "reduction", "ran_modules", "fpn_dim"):
            if getattr(self, name) < 1:
                problems.append(f"model.{name}는 양수여야 합니다: {getattr(self, name)}")
        if problems:
            return problems

        if self.hidden is not None and self.hidden < 1:
            problems.append(f"model.hidden은 양수여야 합니다: {self.hidden}")
        if not 0.0 <= self.dropout < 1.0:
            problems.append(f"model.dropout은 [0, 1) 범위여야 합니다: {self.dropout}")
        if self.arch in ("tiny-vit", "fusion") and (self.height % self.patch or self.width % self.patch):
            problems.append(
                f"패치 크기 {self.patch}가 입력 {self.height}x{self.width}를 나누지 않습니다"
            )
        if self.arch in ("tiny-vit", "fusion") and self.d_model % self.heads:
            problems.append(f"헤드 수 {self.heads}가 d_model {self.d_model}을 나누지 않습니다")
        if self.arch in ("tiny-convnext", "ran", "fusion") and (self.height % 2 or self.width % 2):
            problems.append(f"{self.arch} 입력 크기는 짝수여야 합니다: {self.height}x{self.width}")
        if self.arch == "fpn" and (self.height % 4 or self.width % 4):
            problems.append(f"fpn 입력 크기는 4의 배수여야 합니다: {self.height}x{self.width}")
        if self.cbam and self.channels % self.reduction:
            problems.append(f"축소 비율 {self.reduction}이 채널 수 {self.channels}를 나누지 않습니다")
        return problems

    def with_updates(self, **changes: Any) -> "ModelSpec":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "ModelSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError([f"알 수 없는 model 키: {k}" for k in unknown])
        return cls(**values)
