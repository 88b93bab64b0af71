"""
체크포인트 바이너리 포맷

    magic "PGCK" | u32 version
    섹션 4개 (parameters, optimizer, counters, rng), 각 섹션:
        u64 레코드 수
        레코드: u32 이름 길이 | UTF-8 이름 | u32 rank | u64 dims[rank] | f64 values[prod(dims)]
    meta: u64 길이 | UTF-8 JSON (모델 사양)

모든 정수/실수는 little-endian. RNG 상태(PCG64)는 uint64 워드를 float64로
비트 그대로 재해석하여 저장한다.
"""

import json
import logging
import math
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import CheckpointFormatError
from ..models import Backbone, ModelSpec, build_model
from ..nn import Module
from .optimizer import Adam
from .state import HISTORY_COLUMNS, TrainState

logger = logging.getLogger(__name__)

MAGIC = b"PGCK"
VERSION = 1
SECTIONS = ("parameters", "optimizer", "counters", "rng")
_MASK64 = (1 << 64) - 1


@dataclass
class Checkpoint:
    """체크포인트 내용 (섹션별 이름 -> 배열)"""

    parameters: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    optimizer: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    counters: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    rng: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    meta: Dict[str, Any] = field(default_factory=dict)

    def section(self, name: str) -> Dict[str, np.ndarray]:
        return getattr(self, name)


# ----------------------------------------------------------------------
# RNG 상태 <-> float64 비트 패턴
# ----------------------------------------------------------------------
def rng_to_array(rng: np.random.Generator) -> np.ndarray:
    state = rng.bit_generator.state
    if state["bit_generator"] != "PCG64":
        raise ValueError(f"지원하지 않는 비트 생성기: {state['bit_generator']}")
    s, inc = state["state"]["state"], state["state"]["inc"]
    words = np.array(
        [s & _MASK64, s >> 64, inc & _MASK64, inc >> 64, state["has_uint32"], state["uinteger"]],
        dtype=np.uint64,
    )
    return words.view(np.float64)


def array_to_rng_state(values: np.ndarray) -> Dict[str, Any]:
    words = [int(w) for w in np.ascontiguousarray(values, dtype=np.float64).view(np.uint64)]
    return {
        "bit_generator": "PCG64",
        "state": {"state": words[0] | (words[1] << 64), "inc": words[2] | (words[3] << 64)},
        "has_uint32": words[4],
        "uinteger": words[5],
    }


def restore_rng(rng: np.random.Generator, values: np.ndarray) -> None:
    rng.bit_generator.state = array_to_rng_state(values)


# ----------------------------------------------------------------------
# 인코딩 / 디코딩
# ----------------------------------------------------------------------
def _encode_section(records: Dict[str, np.ndarray]) -> bytes:
    parts = [struct.pack("<Q", len(records))]
    for name, value in records.items():
        array = np.ascontiguousarray(value, dtype=np.float64)
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        parts.append(array.astype("<f8").tobytes())
    return b"".join(parts)


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    meta = json.dumps(checkpoint.meta, sort_keys=True).encode("utf-8")
    body = [MAGIC, struct.pack("<I", VERSION)]
    body += [_encode_section(checkpoint.section(name)) for name in SECTIONS]
    body += [struct.pack("<Q", len(meta)), meta]
    return b"".join(body)


class _Reader:
    def __init__(self, buffer: bytes):
        self.buffer = buffer
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.buffer):
            raise CheckpointFormatError(f"파일이 잘렸습니다: {what} {n}바이트를 읽을 수 없음", self.offset)
        chunk = self.buffer[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def _decode_section(reader: _Reader, section: str) -> Dict[str, np.ndarray]:
    (count,) = reader.unpack("<Q", f"{section} 레코드 수")
    records: Dict[str, np.ndarray] = OrderedDict()
    for _ in range(count):
        start = reader.offset
        (name_len,) = reader.unpack("<I", "이름 길이")
        try:
            name = reader.take(name_len, "이름").decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointFormatError("이름이 UTF-8이 아닙니다", start + 4) from None
        (rank,) = reader.unpack("<I", "rank")
        dims_offset = reader.offset
        dims = reader.unpack(f"<{rank}Q", "dims") if rank else ()
        size = math.prod(dims)
        if 8 * size > len(reader.buffer) - reader.offset:
            raise CheckpointFormatError(f"'{name}' 형상 {dims}이 남은 파일 크기를 넘습니다", dims_offset)
        values = np.frombuffer(reader.take(8 * size, f"'{name}' 값"), dtype="<f8")
        if name in records:
            raise CheckpointFormatError(f"중복된 레코드 이름 '{name}'", start)
        records[name] = values.astype(np.float64).reshape(dims)
    return records


def decode_checkpoint(buffer: bytes) -> Checkpoint:
    """
    체크포인트 바이트 파싱

    Raises:
        CheckpointFormatError: magic/버전 불일치, 잘린 파일, 잘못된 meta, 남는 바이트
    """
    reader = _Reader(buffer)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise CheckpointFormatError(f"잘못된 magic {magic!r} (기대값 {MAGIC!r})", 0)
    (version,) = reader.unpack("<I", "version")
    if version != VERSION:
        raise CheckpointFormatError(f"지원하지 않는 포맷 버전 {version}", 4)

    checkpoint = Checkpoint()
    for name in SECTIONS:
        setattr(checkpoint, name, _decode_section(reader, name))

    meta_offset = reader.offset
    (length,) = reader.unpack("<Q", "meta 길이")
    try:
        checkpoint.meta = json.loads(reader.take(length, "meta").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointFormatError("meta JSON을 해석할 수 없습니다", meta_offset + 8) from None
    if reader.offset != len(buffer):
        raise CheckpointFormatError(
            f"파일 끝에 해석되지 않은 {len(buffer) - reader.offset}바이트", reader.offset
        )
    return checkpoint


# ----------------------------------------------------------------------
# 모델/학습 상태 저장과 복원
# ----------------------------------------------------------------------
def checkpoint_save(
    path: Union[str, Path],
    model: Module,
    optimizer: Optional[Adam] = None,
    state: Optional[TrainState] = None,
    rngs: Optional[Dict[str, np.random.Generator]] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    모델과 학습 상태를 체크포인트 파일로 저장

    Args:
        path: 저장 경로
        model: 모델 (파라미터와 버퍼)
        optimizer: Adam (모멘트와 step 수)
        state: 학습 상태 (카운터와 메트릭 기록)
        rngs: 이름 -> 생성기 (예: 'shuffle', 'dropout')
        meta: 모델 재구성용 메타데이터 (JSON 직렬화 가능)

    Returns:
        Path: 저장 경로
    """
    checkpoint = Checkpoint(parameters=model.state_dict(), meta=dict(meta or {}))
    if optimizer is not None:
        checkpoint.optimizer = optimizer.state_dict()
        checkpoint.counters["adam/step"] = np.array(float(optimizer.step_count))
    if state is not None:
        for key, value in state.counters().items():
            checkpoint.counters[key] = np.array(value)
        for column in HISTORY_COLUMNS:
            checkpoint.counters[f"history/{column}"] = np.array(state.history[column], dtype=np.float64)
    for name, rng in (rngs or {}).items():
        checkpoint.rng[f"rng/{name}"] = rng_to_array(rng)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(checkpoint))
    logger.debug(f"체크포인트 저장: {path}")
    return path


def checkpoint_load(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    checkpoint = decode_checkpoint(path.read_bytes())
    logger.info(f"체크포인트 로드: {path} (파라미터 {len(checkpoint.parameters)}개)")
    return checkpoint


def restore_training(
    checkpoint: Checkpoint,
    model: Module,
    optimizer: Adam,
    rngs: Dict[str, np.random.Generator],
) -> TrainState:
    """체크포인트의 파라미터, 모멘트, 카운터, RNG 상태를 모두 복원"""
    model.load_state_dict(checkpoint.parameters)
    optimizer.load_state_dict(checkpoint.optimizer)
    optimizer.step_count = int(checkpoint.counters.get("adam/step", np.array(0.0)))
    counters = {k: float(v) for k, v in checkpoint.counters.items() if v.ndim == 0}
    history = {
        column: checkpoint.counters[f"history/{column}"].tolist()
        for column in HISTORY_COLUMNS
        if f"history/{column}" in checkpoint.counters
    }
    state = TrainState.from_counters(counters, history)
    for name, rng in rngs.items():
        key = f"rng/{name}"
        if key in checkpoint.rng:
            restore_rng(rng, checkpoint.rng[key])
    return state


def warm_start(model: Module, path: Union[str, Path], strict: bool = True) -> Module:
    """체크포인트에서 파라미터와 버퍼만 불러옴 (옵티마이저/카운터/RNG 제외)"""
    checkpoint = checkpoint_load(path)
    model.load_state_dict(checkpoint.parameters, strict=strict)
    return model


def load_model(path: Union[str, Path]) -> Backbone:
    """meta 섹션의 모델 사양으로 모델을 다시 만들고 파라미터를 불러옴"""
    checkpoint = checkpoint_load(path)
    if "model" not in checkpoint.meta:
        raise CheckpointFormatError(f"체크포인트에 모델 사양(meta.model)이 없습니다: {path}", 0)
    model = build_model(ModelSpec.from_dict(checkpoint.meta["model"]))
    model.load_state_dict(checkpoint.parameters)
    model.eval()
    return model
