"""
앙상블 투표와 조합 탐색 테스트
"""

import numpy as np
import pytest

from src.errors import ConfigurationError, ShapeError
from src.evaluation import hard_vote, search_ensembles, soft_vote, vote


def _random_probabilities(rng, n, k):
    raw = rng.random((n, k))
    return raw / raw.sum(axis=1, keepdims=True)


def test_soft_vote_worked_example():
    mean, labels = soft_vote([np.array([[0.6, 0.4]]), np.array([[0.2, 0.8]])])
    np.testing.assert_allclose(mean, [[0.4, 0.6]], atol=1e-15)
    assert labels.tolist() == [1]


@pytest.mark.parametrize("k", [3, 102])
def test_soft_vote_matches_direct_mean(rng, k):
    predictions = [_random_probabilities(rng, 1000, k) for _ in range(5)]
    mean, labels = soft_vote(predictions)
    np.testing.assert_allclose(mean, np.mean(predictions, axis=0), atol=1e-12)
    np.testing.assert_array_equal(labels, mean.argmax(axis=1))


def test_soft_vote_is_order_invariant(rng):
    predictions = [_random_probabilities(rng, 50, 4) for _ in range(4)]
    forward, _ = soft_vote(predictions)
    backward, _ = soft_vote(predictions[::-1])
    np.testing.assert_array_equal(forward, backward)


def test_single_model_soft_vote_is_identity(rng):
    p = _random_probabilities(rng, 10, 3)
    mean, _ = soft_vote([p])
    np.testing.assert_array_equal(mean, p)


def test_hard_vote_majority_and_ties():
    result = hard_vote([np.array([2, 1]), np.array([2, 3]), np.array([5, 0])])
    assert result[0] == 2
    assert hard_vote([np.array([1]), np.array([3])]).tolist() == [1]


def test_hard_vote_matches_counting_oracle(rng):
    votes = [rng.integers(0, 5, size=1000) for _ in range(5)]
    counts = np.zeros((1000, 5), dtype=int)
    for v in votes:
        counts[np.arange(1000), v] += 1
    np.testing.assert_array_equal(hard_vote(votes), counts.argmax(axis=1))


def test_hard_mode_returns_vote_shares():
    p1 = np.array([[0.9, 0.1], [0.2, 0.8]])
    p2 = np.array([[0.6, 0.4], [0.7, 0.3]])
    shares, labels = vote([p1, p2, p1], mode="hard")
    np.testing.assert_allclose(shares, [[1.0, 0.0], [1 / 3, 2 / 3]])
    assert labels.tolist() == [0, 1]


def test_vote_validation():
    with pytest.raises(ConfigurationError):
        vote([], mode="soft")
    with pytest.raises(ConfigurationError):
        vote([np.ones((1, 2)) / 2], mode="median")
    with pytest.raises(ShapeError):
        soft_vote([np.ones((2, 2)) / 2, np.ones((3, 2)) / 2])


@pytest.mark.parametrize("labels", [
    [np.array([0, 1, 2]), np.array([0, 1])],
    [np.array([0, 1]), np.array([[0, 1]])],
])
def test_hard_vote_rejects_ragged_label_lists(labels):
    with pytest.raises(ShapeError):
        hard_vote(labels)


def test_search_ensembles_ranking():
    truth = np.array([0, 1, 1, 0])
    good = np.array([[0.9, 0.1], [0.1, 0.9], [0.2, 0.8], [0.8, 0.2]])
    okay = np.array([[0.6, 0.4], [0.4, 0.6], [0.6, 0.4], [0.7, 0.3]])
    bad = np.array([[0.1, 0.9], [0.9, 0.1], [0.8, 0.2], [0.3, 0.7]])
    ranking = search_ensembles({"good": good, "okay": okay, "bad": bad}, truth, min_size=2)
    assert len(ranking) == 4
    assert list(ranking.columns) == ["models", "size", "accuracy"]
    assert ranking.iloc[0]["models"] == "good+okay"
    assert ranking.iloc[0]["accuracy"] == 1.0
    assert ranking["accuracy"].is_monotonic_decreasing

    with pytest.raises(ConfigurationError):
        search_ensembles({"good": good}, truth, min_size=2)
