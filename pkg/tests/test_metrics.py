import numpy as np
import pytest
from hypothesis import given, strategies as st

from biplink import MetricUndefinedError, auroc, aupr


def auroc_pairwise(scores, labels):
    """O(n^2) comparison count: wins + half-ties over pos*neg pairs."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (pos.size * neg.size)


def aupr_threshold_sweep(scores, labels):
    """Walk every distinct score as a threshold, highest first; step-sum P*dR."""
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    n_pos = int(y.sum())
    area = 0.0
    prev_recall = 0.0
    i = 0
    while i < s.size:
        j = i
        while j < s.size and s[j] == s[i]:
            j += 1
        tp = float(y[:j].sum())
        precision = tp / j
        recall = tp / n_pos
        area += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return area


def _instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    labels = rng.integers(0, 2, size=n)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    # coarse grid forces ties
    scores = rng.integers(0, 6, size=n).astype(float) / 3.0
    return scores, labels


@pytest.mark.parametrize("seed", range(100))
def test_auroc_matches_pairwise_oracle(seed):
    scores, labels = _instance(seed)
    assert abs(auroc(scores, labels) - auroc_pairwise(scores, labels)) < 1e-12


@pytest.mark.parametrize("seed", range(100))
def test_aupr_matches_threshold_oracle(seed):
    scores, labels = _instance(seed)
    assert abs(aupr(scores, labels) - aupr_threshold_sweep(scores, labels)) < 1e-12


def test_perfect_ranking():
    scores = np.array([0.1, 0.2, 0.9, 0.8])
    labels = np.array([0, 0, 1, 1])
    assert auroc(scores, labels) == 1.0
    assert aupr(scores, labels) == 1.0


def test_single_positive_ranked_last():
    scores = np.array([0.9, 0.8, 0.7, 0.1])
    labels = np.array([0, 0, 0, 1])
    assert auroc(scores, labels) == 0.0
    assert aupr(scores, labels) == pytest.approx(0.25)


def test_constant_scores_give_chance_and_prevalence():
    scores = np.full(10, 3.7)
    labels = np.array([1, 0, 0, 1, 0, 0, 0, 0, 1, 0])
    assert auroc(scores, labels) == pytest.approx(0.5)
    assert aupr(scores, labels) == pytest.approx(0.3)


@given(st.integers(0, 10_000))
def test_monotone_transform_invariance(seed):
    scores, labels = _instance(seed)
    warped = np.exp(2.0 * scores) + 1.0
    assert auroc(warped, labels) == pytest.approx(auroc(scores, labels), abs=1e-12)
    assert aupr(warped, labels) == pytest.approx(aupr(scores, labels), abs=1e-12)


@given(st.integers(0, 10_000))
def test_auroc_complement_under_negation(seed):
    scores, labels = _instance(seed)
    # exact complement only without ties
    scores = scores + np.random.default_rng(seed + 1).normal(0, 1e-6, scores.size)
    assert auroc(-scores, labels) == pytest.approx(1.0 - auroc(scores, labels), abs=1e-12)


def test_single_class_refused():
    with pytest.raises(MetricUndefinedError):
        auroc(np.array([1.0, 2.0]), np.array([1, 1]))
    with pytest.raises(MetricUndefinedError):
        aupr(np.array([1.0, 2.0]), np.array([0, 0]))


def test_nan_scores_refused():
    with pytest.raises(ValueError):
        auroc(np.array([np.nan, 1.0]), np.array([0, 1]))
