"""
평가 리포트 모듈
텍스트/JSON 리포트와 예측·정답 CSV 입출력
"""

import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import DomainError, ManifestError, ShapeError
from .metrics import ClassificationReport, confusion, metrics

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _to_builtin(value: Any) -> Any:
    """numpy 스칼라/배열을 json이 다루는 기본 타입으로 변환 (키 순서 유지)"""
    if isinstance(value, dict):
        return {str(key): _to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_to_builtin(item) for item in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _format_json(value: Any) -> str:
    # 실수는 float repr(최단 왕복 표현)로 기록된다
    try:
        return json.dumps(_to_builtin(value), indent=2, ensure_ascii=False, allow_nan=False)
    except ValueError as e:
        raise DomainError(f"JSON에 쓸 수 없는 값: {e}") from None


class EvaluationReport:
    """평가 결과 분석 클래스"""

    def __init__(self, report: ClassificationReport, title: str = "분류 성능 리포트"):
        """
        EvaluationReport 초기화

        Args:
            report: metrics()가 만든 분류 보고
            title: 리포트 제목
        """
        self.report = report
        self.title = title

    @classmethod
    def from_labels(
        cls, truth: Sequence[int], predicted: Sequence[int], num_classes: int, title: str = "분류 성능 리포트"
    ) -> "EvaluationReport":
        return cls(metrics(confusion(truth, predicted, num_classes)), title)

    def class_ranking(self, count: int = 3) -> Tuple[List[dict], List[dict]]:
        """재현율 기준 (하위 count개, 상위 count개) 클래스, 표본이 있는 클래스만"""
        rows = [row for row in self.report.per_class() if row["support"] > 0]
        rows.sort(key=lambda row: (row["recall"], row["class"]))
        worst = rows[:count]
        best = sorted(rows, key=lambda row: (-row["recall"], row["class"]))[:count]
        return worst, best

    def generate_report(self) -> str:
        """
        종합 리포트 생성

        Returns:
            str: 리포트 텍스트
        """
        r = self.report
        report = []
        report.append("=" * 60)
        report.append(self.title)
        report.append("=" * 60)
        report.append("")

        report.append("[ 전체 ]")
        report.append(f"  {'샘플 수':.<30} {int(r.support.sum()):>15,}")
        report.append(f"  {'클래스 수':.<30} {r.num_classes:>15}")
        report.append(f"  {'정확도 (%)':.<30} {r.accuracy_percent:>15.2f}")
        report.append("")

        report.append("[ 매크로 평균 ]")
        report.append(f"  {'Precision':.<30} {r.macro_precision:>15.4f}")
        report.append(f"  {'Recall':.<30} {r.macro_recall:>15.4f}")
        report.append(f"  {'F1':.<30} {r.macro_f1:>15.4f}")
        report.append("")

        worst, best = self.class_ranking()
        for heading, rows in (("[ 재현율 하위 클래스 ]", worst), ("[ 재현율 상위 클래스 ]", best)):
            report.append(heading)
            for row in rows:
                label = f"class {row['class']} (n={row['support']})"
                report.append(f"  {label:.<30} {row['recall']:>15.4f}")
            report.append("")

        report.append("=" * 60)
        return "\n".join(report)

    def print_report(self) -> None:
        print(self.generate_report())

    def to_json(self) -> str:
        return _format_json(self.report.to_dict()) + "\n"

    def save_json(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        logger.info(f"평가 리포트 저장: {path}")
        return path


# ----------------------------------------------------------------------
# 예측 / 정답 CSV
# ----------------------------------------------------------------------
def write_predictions(path: PathLike, sample_ids: Sequence[str], probabilities: np.ndarray) -> Path:
    """`sample_id,p_0,...,p_{K-1}` CSV 저장"""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.ndim != 2 or probabilities.shape[0] != len(sample_ids):
        raise ShapeError("예측 확률 형상이 샘플 수와 맞지 않습니다", probabilities.shape, (len(sample_ids),))
    df = pd.DataFrame(probabilities, columns=[f"p_{k}" for k in range(probabilities.shape[1])])
    df.insert(0, "sample_id", list(sample_ids))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.17g")
    return path


def read_predictions(path: PathLike) -> Tuple[List[str], np.ndarray]:
    """
    예측 CSV 로드

    Returns:
        (sample_id 목록, 확률 [n, K])

    Raises:
        ManifestError: 헤더/값 형식 오류
        DomainError: 행 합이 1에서 1e-9 넘게 벗어나거나 [0, 1] 밖의 값
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype={"sample_id": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ManifestError(f"예측 파일을 읽을 수 없습니다: {path} ({e})") from None
    columns = [c for c in df.columns if c != "sample_id"]
    expected = [f"p_{k}" for k in range(len(columns))]
    if "sample_id" not in df.columns or columns != expected or not columns:
        raise ManifestError(f"예측 파일 헤더는 sample_id,p_0,...여야 합니다: {path}", 1)
    try:
        probabilities = df[columns].to_numpy(dtype=np.float64)
    except ValueError:
        raise ManifestError(f"예측 값이 숫자가 아닙니다: {path}") from None
    if np.any((probabilities < 0) | (probabilities > 1)):
        raise DomainError(f"확률이 [0, 1] 범위를 벗어났습니다: {path}")
    bad = np.flatnonzero(np.abs(probabilities.sum(axis=1) - 1.0) > 1e-9)
    if bad.size:
        raise DomainError(f"확률 행의 합이 1이 아닙니다: {path} (line {int(bad[0]) + 2})")
    return df["sample_id"].tolist(), probabilities


def write_truth(path: PathLike, sample_ids: Sequence[str], labels: Sequence[int]) -> Path:
    """`sample_id,label` CSV 저장"""
    df = pd.DataFrame({"sample_id": list(sample_ids), "label": np.asarray(labels, dtype=np.int64)})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    return path


def read_truth(path: PathLike, sample_ids: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    정답 CSV 로드

    sample_ids가 주어지면 그 순서로 정렬하고, 빠진 샘플이 있으면 오류.
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype={"sample_id": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ManifestError(f"정답 파일을 읽을 수 없습니다: {path} ({e})") from None
    if list(df.columns) != ["sample_id", "label"]:
        raise ManifestError(f"정답 파일 헤더는 sample_id,label 이어야 합니다: {path}", 1)
    if sample_ids is None:
        return df["label"].to_numpy(dtype=np.int64)
    if len(df) != len(sample_ids):
        raise ShapeError("정답과 예측의 행 수가 다릅니다", (len(df),), (len(sample_ids),))
    indexed = df.set_index("sample_id")["label"]
    missing = [s for s in sample_ids if s not in indexed.index]
    if missing:
        raise ManifestError(f"정답 파일에 샘플 '{missing[0]}'이 없습니다: {path}")
    return indexed.loc[list(sample_ids)].to_numpy(dtype=np.int64)
