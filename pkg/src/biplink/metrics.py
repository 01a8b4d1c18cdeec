"""Threshold-free ranking metrics over scored candidate pairs.

Both metrics treat tied scores exactly: AUROC counts a tie between a positive
and a negative as half a correctly ordered pair, and AUPR processes each
distinct score value as one block so ties never split across a threshold.
"""

from __future__ import annotations

import numpy as np

from .errors import MetricUndefinedError


def _check_labels(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d arrays of equal length")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    labels = labels.astype(bool)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise MetricUndefinedError(
            f"need both classes present, got {n_pos} positives out of {labels.size}")
    return scores, labels, n_pos


def auroc(scores, labels) -> float:
    """Area under the ROC curve via the rank-sum identity.

    Equals P(score_pos > score_neg) + 0.5 * P(score_pos == score_neg) for a
    uniformly random positive/negative pair. Ties handled with midranks.
    """
    scores, labels, n_pos = _check_labels(scores, labels)
    n_neg = labels.size - n_pos
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    new_block = np.concatenate([[True], s[1:] != s[:-1]])
    starts = np.flatnonzero(new_block)
    ends = np.concatenate([starts[1:], [s.size]])
    # midrank: average 1-based rank within each tied block
    block_mid = 0.5 * (starts + ends - 1) + 1.0
    ranks = np.empty(labels.size, dtype=np.float64)
    ranks[order] = block_mid[np.cumsum(new_block) - 1]
    rank_sum = ranks[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def aupr(scores, labels) -> float:
    """Area under the precision-recall curve, summed over distinct-score blocks.

    Descending sweep; each block contributes (recall gain) * (precision at the
    block boundary), which matches step-wise interpolation and is insensitive
    to the ordering of tied scores.
    """
    scores, labels, n_pos = _check_labels(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order].astype(np.float64)
    # block boundaries: last index of each distinct score value
    boundary = np.flatnonzero(np.diff(s) != 0)
    ends = np.concatenate([boundary, [s.size - 1]])
    tp = np.cumsum(y)[ends]
    n_taken = ends + 1.0
    precision = tp / n_taken
    recall = tp / n_pos
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def positive_labels_for_pairs(pairs: np.ndarray, test_edges: np.ndarray, right_count: int) -> np.ndarray:
    """Boolean label per candidate pair: is it a held-out test edge."""
    pair_codes = pairs[:, 0] * right_count + pairs[:, 1]
    test_codes = np.sort(test_edges[:, 0] * right_count + test_edges[:, 1])
    pos = np.clip(np.searchsorted(test_codes, pair_codes), 0, test_codes.size - 1)
    return test_codes[pos] == pair_codes
