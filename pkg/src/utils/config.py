"""
설정 파일 로더
config.yaml 파일을 읽어 실행 설정 (data/model/train/augment/ensemble) 제공
"""

import copy
import logging
import typing
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, Union

import yaml

from ..data.transforms import AugmentSpec
from ..errors import ConfigurationError
from ..evaluation.ensemble import VOTING_MODES
from ..models.spec import ModelSpec
from ..training.state import TrainConfig

logger = logging.getLogger(__name__)

RESOLVED_CONFIG = "resolved_config.yaml"


@dataclass
class DataConfig:
    """
    데이터 설정

    Attributes:
        manifest: 매니페스트 CSV 경로
        image_size: 정사각 입력 한 변 크기 (리사이즈 대상)
        split_ratios: train:val:test 비율
        confidence_threshold: 정제 시 검출 신뢰도 기준
        workers: 병렬 디코딩 스레드 수 (0이면 순차)
    """

    manifest: Optional[str] = None
    image_size: int = 16
    split_ratios: List[float] = field(default_factory=lambda: [6.0, 1.0, 3.0])
    confidence_threshold: float = 0.5
    workers: int = 0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    def problems(self) -> List[str]:
        problems = []
        if self.image_size < 1:
            problems.append(f"data.image_size는 양수여야 합니다: {self.image_size}")
        if len(self.split_ratios) != 3 or any(r < 0 for r in self.split_ratios) or sum(self.split_ratios) <= 0:
            problems.append(f"data.split_ratios는 음수가 아닌 3개 값이어야 합니다: {self.split_ratios}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            problems.append(f"data.confidence_threshold는 [0, 1] 범위여야 합니다: {self.confidence_threshold}")
        if self.workers < 0:
            problems.append(f"data.workers는 0 이상이어야 합니다: {self.workers}")
        return problems


@dataclass
class EnsembleConfig:
    """앙상블 설정 (투표 모드, 조합 탐색 최소 크기)"""

    mode: str = "soft"
    min_size: int = 2

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)

    def problems(self) -> List[str]:
        problems = []
        if self.mode not in VOTING_MODES:
            problems.append(f"ensemble.mode는 {', '.join(VOTING_MODES)} 중 하나여야 합니다: {self.mode}")
        if self.min_size < 1:
            problems.append(f"ensemble.min_size는 1 이상이어야 합니다: {self.min_size}")
        return problems


SECTIONS: Dict[str, Type] = {
    "data": DataConfig,
    "model": ModelSpec,
    "train": TrainConfig,
    "augment": AugmentSpec,
    "ensemble": EnsembleConfig,
}


def _type_problem(section: str, key: str, value: Any, annotation: Any) -> Optional[str]:
    """값이 필드 타입과 맞지 않으면 문제 설명, 맞으면 None"""
    origin = typing.get_origin(annotation)
    if origin is Union:
        options = [a for a in typing.get_args(annotation) if a is not type(None)]
        if value is None:
            return None
        return _type_problem(section, key, value, options[0])
    if origin in (list, List):
        (item,) = typing.get_args(annotation) or (Any,)
        if not isinstance(value, list):
            return f"{section}.{key}는 목록이어야 합니다: {value!r}"
        for v in value:
            problem = _type_problem(section, key, v, item)
            if problem:
                return problem
        return None
    if annotation is bool:
        ok = isinstance(value, bool)
    elif annotation is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif annotation is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif annotation is str:
        ok = isinstance(value, str)
    else:
        ok = True
    if not ok:
        return f"{section}.{key}는 {annotation.__name__} 타입이어야 합니다: {value!r}"
    return None


def _coerce(value: Any, annotation: Any) -> Any:
    if annotation is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typing.get_origin(annotation) in (list, List) and isinstance(value, list):
        (item,) = typing.get_args(annotation)
        return [_coerce(v, item) for v in value]
    return value


def _parse_scalar(text: str) -> Any:
    """YAML 스칼라 해석 ('1e-3'처럼 YAML이 문자열로 두는 지수 표기도 실수로)"""
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError:
        return text
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


class Config:
    """
    설정 관리 클래스
    config.yaml 파일을 읽어서 설정값을 제공
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None, values: Optional[Dict[str, Any]] = None):
        """
        Config 초기화

        Args:
            config_path: 설정 파일 경로 (None이면 프로젝트 루트의 config.yaml, 없으면 기본값)
            values: 파일 대신 사용할 설정 딕셔너리
        """
        self.path: Optional[Path] = None
        if values is not None:
            self._config = copy.deepcopy(values)
        else:
            self._config = {}
            self.load_config(config_path)

    def load_config(self, config_path: Optional[Union[str, Path]] = None) -> None:
        """
        설정 파일 로드

        Args:
            config_path: 설정 파일 경로 (None이면 프로젝트 루트의 config.yaml 사용)
        """
        explicit = config_path is not None
        if config_path is None:
            # 프로젝트 루트 경로 찾기
            project_root = Path(__file__).resolve().parent.parent.parent
            config_path = project_root / "config.yaml"
        config_path = Path(config_path)

        if not config_path.exists():
            if explicit:
                raise ConfigurationError(f"설정 파일을 찾을 수 없습니다: {config_path}")
            self._config = {}
            return

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"설정 파일을 해석할 수 없습니다: {config_path} ({e})") from None
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigurationError(f"설정 파일 최상위는 섹션 매핑이어야 합니다: {config_path}")
        self._config = loaded or {}
        self.path = config_path
        logger.debug(f"설정 로드: {config_path}")

    def get(self, key: str, default: Any = None) -> Any:
        """
        설정값 가져오기 (점 표기법 지원)

        Examples:
            >>> config = Config(values={"train": {"lr0": 0.001}})
            >>> config.get("train.lr0")
            0.001
            >>> config.get("train.seed", 0)
            0
        """
        value = self._config
        try:
            for k in key.split("."):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any) -> None:
        """점 표기법 키에 값 설정 (중간 섹션이 없으면 생성)"""
        keys = key.split(".")
        node = self._config
        for k in keys[:-1]:
            child = node.get(k)
            if not isinstance(child, dict):
                child = {}
                node[k] = child
            node = child
        node[keys[-1]] = value

    def apply_overrides(self, overrides: Dict[str, Any]) -> "Config":
        """
        명령행 재정의 적용 (예: {'train.lr0': '0.001'})

        문자열 값은 YAML 스칼라로 해석한다 ('0.001' -> 0.001, 'true' -> True).
        """
        for key, value in overrides.items():
            if isinstance(value, str):
                value = _parse_scalar(value)
            self.set(key, value)
        return self

    def section(self, name: str) -> Dict[str, Any]:
        value = self.get(name, {})
        return dict(value) if isinstance(value, dict) else {}

    def problems(self) -> List[str]:
        """알 수 없는 섹션/키, 타입 오류, 범위 오류를 모두 모은 목록"""
        problems = []
        for name in self._config:
            if name not in SECTIONS:
                problems.append(f"알 수 없는 설정 섹션: {name}")
        for name, cls in SECTIONS.items():
            raw = self._config.get(name)
            if raw is None:
                continue
            if not isinstance(raw, dict):
                problems.append(f"설정 섹션 '{name}'은 매핑이어야 합니다")
                continue
            hints = {f.name: f.type for f in fields(cls)}
            typed_ok = True
            for key, value in raw.items():
                if key not in hints:
                    problems.append(f"알 수 없는 {name} 키: {key}")
                    typed_ok = False
                    continue
                problem = _type_problem(name, key, value, hints[key])
                if problem:
                    problems.append(problem)
                    typed_ok = False
            if typed_ok:
                try:
                    self._build(name)
                except ConfigurationError as e:
                    problems.extend(e.problems)
        return problems

    def validate(self) -> "Config":
        """
        설정 검증

        Raises:
            ConfigurationError: 발견된 모든 문제를 한 번에 보고
        """
        problems = self.problems()
        if problems:
            raise ConfigurationError(problems)
        return self

    def _build(self, name: str):
        cls = SECTIONS[name]
        hints = {f.name: f.type for f in fields(cls)}
        values = {k: _coerce(v, hints[k]) for k, v in self.section(name).items()}
        return cls(**values)

    def get_data_config(self) -> DataConfig:
        return self._build("data")

    def get_model_spec(self) -> ModelSpec:
        return self._build("model")

    def get_train_config(self) -> TrainConfig:
        return self._build("train")

    def get_augment_spec(self) -> AugmentSpec:
        return self._build("augment")

    def get_ensemble_config(self) -> EnsembleConfig:
        return self._build("ensemble")

    def resolved(self) -> Dict[str, Dict[str, Any]]:
        """기본값까지 채운 전체 설정"""
        self.validate()
        return {name: asdict(self._build(name)) for name in SECTIONS}

    def write_resolved(self, out_dir: Union[str, Path]) -> Path:
        """<out_dir>/resolved_config.yaml 기록 (키 정렬)"""
        path = Path(out_dir) / RESOLVED_CONFIG
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.resolved(), f, sort_keys=True, allow_unicode=True)
        return path

    def get_all(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)

    def __repr__(self):
        return f"Config(path={self.path}, sections={sorted(self._config)})"


def load_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Config:
    """
    설정 파일 로드, 재정의 적용, 검증까지 마친 Config 반환

    Args:
        config_path: 설정 파일 경로
        overrides: 점 표기법 재정의

    Returns:
        Config 인스턴스
    """
    config = Config(config_path)
    if overrides:
        config.apply_overrides(overrides)
    return config.validate()


def split_overrides(arguments: List[str]) -> Tuple[Dict[str, str], List[str]]:
    """
    명령행 인자에서 `--section.key value` / `--section.key=value` 재정의 분리

    Returns:
        (재정의 딕셔너리, 나머지 인자)
    """
    overrides: Dict[str, str] = {}
    rest: List[str] = []
    i = 0
    while i < len(arguments):
        arg = arguments[i]
        name = arg[2:].split("=", 1)[0] if arg.startswith("--") else ""
        if "." in name:
            if "=" in arg:
                overrides[name] = arg.split("=", 1)[1]
            elif i + 1 < len(arguments):
                overrides[name] = arguments[i + 1]
                i += 1
            else:
                raise ConfigurationError(f"재정의 {arg}에 값이 없습니다")
        else:
            rest.append(arg)
        i += 1
    return overrides, rest
