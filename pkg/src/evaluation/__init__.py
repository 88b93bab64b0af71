"""
평가 모듈
혼동 행렬과 분류 지표, 앙상블 투표, 리포트
"""

from .ensemble import VOTING_MODES, hard_vote, search_ensembles, soft_vote, vote
from .metrics import ClassificationReport, confusion, metrics
from .report import EvaluationReport, read_predictions, read_truth, write_predictions, write_truth

__all__ = [
    "soft_vote",
    "hard_vote",
    "vote",
    "search_ensembles",
    "VOTING_MODES",
    "confusion",
    "metrics",
    "ClassificationReport",
    "EvaluationReport",
    "write_predictions",
    "read_predictions",
    "write_truth",
    "read_truth",
]
