"""
분류 지표와 평가 리포트 테스트
"""

import json

import numpy as np
import pytest
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from src.errors import DomainError, ManifestError, ShapeError
from src.evaluation import (
    EvaluationReport,
    confusion,
    metrics,
    read_predictions,
    read_truth,
    write_predictions,
    write_truth,
)


def test_accuracy_percent_reference():
    truth = np.zeros(100, dtype=int)
    predicted = np.zeros(100, dtype=int)
    predicted[:15] = 1
    report = metrics(confusion(truth, predicted, 2))
    assert report.accuracy_percent == pytest.approx(85.0)


def test_recall_reference():
    cm = np.array([[3, 1], [0, 4]])
    report = metrics(cm)
    assert report.recall[0] == 0.75
    assert report.precision[1] == 0.8


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_metrics_match_sklearn(seed):
    rng = np.random.default_rng(seed)
    truth = rng.integers(0, 3, size=200)
    predicted = np.where(rng.random(200) < 0.6, truth, rng.integers(0, 3, size=200))
    cm = confusion(truth, predicted, 3)
    np.testing.assert_array_equal(cm, confusion_matrix(truth, predicted, labels=[0, 1, 2]))

    report = metrics(cm)
    precision, recall, f1, support = precision_recall_fscore_support(
        truth, predicted, labels=[0, 1, 2], zero_division=0
    )
    np.testing.assert_allclose(report.precision, precision, atol=1e-12)
    np.testing.assert_allclose(report.recall, recall, atol=1e-12)
    np.testing.assert_allclose(report.f1, f1, atol=1e-12)
    np.testing.assert_array_equal(report.support, support)
    assert report.accuracy == pytest.approx(np.mean(truth == predicted), abs=1e-12)


def test_empty_class_scores_zero():
    report = metrics(np.array([[2, 0, 0], [0, 1, 0], [0, 0, 0]]))
    assert report.recall[2] == 0.0
    assert report.f1[2] == 0.0


def test_metric_input_validation():
    with pytest.raises(DomainError):
        confusion([0, 3], [0, 1], 3)
    with pytest.raises(ShapeError):
        confusion([0, 1], [0], 3)
    with pytest.raises(DomainError):
        metrics(np.zeros((2, 2), dtype=int))


def test_report_json_keys_and_ranking():
    report = EvaluationReport.from_labels([0, 0, 1, 1, 2], [0, 1, 1, 1, 0], 3)
    data = json.loads(report.to_json())
    assert list(data) == [
        "accuracy_percent", "accuracy", "macro_precision", "macro_recall", "macro_f1",
        "per_class", "confusion_matrix",
    ]
    assert data["confusion_matrix"] == [[1, 1, 0], [0, 2, 0], [1, 0, 0]]
    worst, best = report.class_ranking(count=1)
    assert worst[0]["class"] == 2
    assert best[0]["class"] == 1
    assert "정확도" in report.generate_report()


def test_report_json_floats_round_trip_exactly():
    report = EvaluationReport.from_labels([0, 1, 2, 2, 1, 0, 2], [0, 2, 2, 1, 1, 0, 0], 3)
    data = json.loads(report.to_json())
    assert data["accuracy"] == report.report.accuracy
    assert data["macro_f1"] == report.report.macro_f1
    assert [row["precision"] for row in data["per_class"]] == report.report.precision.tolist()
    assert isinstance(data["per_class"][0]["support"], int)


def test_predictions_csv_round_trip(tmp_path):
    probabilities = np.array([[0.1, 0.9], [1 / 3, 2 / 3]])
    path = write_predictions(tmp_path / "p.csv", ["a", "b"], probabilities)
    ids, loaded = read_predictions(path)
    assert ids == ["a", "b"]
    np.testing.assert_array_equal(loaded, probabilities)


def test_predictions_csv_validation(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("sample_id,p_0,p_1\na,0.5,0.6\n")
    with pytest.raises(DomainError):
        read_predictions(path)
    path.write_text("sample_id,q_0\na,1.0\n")
    with pytest.raises(ManifestError):
        read_predictions(path)


def test_truth_is_aligned_to_prediction_order(tmp_path):
    path = write_truth(tmp_path / "t.csv", ["a", "b", "c"], [0, 1, 2])
    np.testing.assert_array_equal(read_truth(path, ["c", "a", "b"]), [2, 0, 1])
    with pytest.raises(ManifestError):
        read_truth(path, ["a", "b", "z"])
    with pytest.raises(ShapeError):
        read_truth(path, ["a", "b"])
