"""Gradient-boosted decision trees on logistic loss, exact greedy splits.

Compact reimplementation of the standard second-order boosting recipe:
each round fits one regression tree to gradient/hessian statistics, split
quality is the usual variance-gain formula with an L2 leaf penalty, leaf
weights are Newton steps. No histograms, no subsampling: datasets here are
at most a few hundred thousand rows and 13 features wide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateLabelsError, SchemaError
from .features import PairFeatures


@dataclass(frozen=True)
class GbdtConfig:
    n_trees: int = 200
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_reg: float = 1.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.n_trees < 0 or self.max_depth < 1 or self.learning_rate <= 0:
            raise ValueError("invalid boosting configuration")


@dataclass
class _Tree:
    """Flat array encoding; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(len(x), dtype=np.int64)
        while True:
            feat = self.feature[node]
            live = feat >= 0
            if not live.any():
                return self.value[node]
            rows = np.flatnonzero(live)
            goes_left = x[rows, feat[rows]] < self.threshold[node[rows]]
            node[rows] = np.where(goes_left, self.left[node[rows]], self.right[node[rows]])

    def to_nested(self, idx: int = 0) -> dict:
        if self.feature[idx] < 0:
            return {"leaf": float(self.value[idx])}
        return {"feature": int(self.feature[idx]),
                "threshold": float(self.threshold[idx]),
                "left": self.to_nested(int(self.left[idx])),
                "right": self.to_nested(int(self.right[idx]))}

    @classmethod
    def from_nested(cls, node: dict) -> "_Tree":
        feature, threshold, left, right, value = [], [], [], [], []

        def walk(n):
            idx = len(feature)
            if "leaf" in n:
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                value.append(n["leaf"])
                return idx
            feature.append(n["feature"])
            threshold.append(n["threshold"])
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            left[idx] = walk(n["left"])
            right[idx] = walk(n["right"])
            return idx

        walk(node)
        return cls(np.array(feature, dtype=np.int64), np.array(threshold),
                   np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                   np.array(value))


@dataclass
class GbdtModel:
    trees: list
    learning_rate: float
    base_score: float
    config: GbdtConfig
    n_features: int
    train_losses: np.ndarray = field(default=None)

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "kind": "gbdt",
            "learning_rate": self.learning_rate,
            "base_score": self.base_score,
            "n_features": self.n_features,
            "config": self.config.__dict__,
            "trees": [t.to_nested() for t in self.trees],
        }
        path.write_text(json.dumps(payload, indent=1) + "\n")

    @classmethod
    def load(cls, path: Path | str) -> "GbdtModel":
        payload = json.loads(Path(path).read_text())
        if payload.get("kind") != "gbdt":
            raise SchemaError(f"{path}: not a boosted-tree model file")
        return cls([_Tree.from_nested(t) for t in payload["trees"]],
                   payload["learning_rate"], payload["base_score"],
                   GbdtConfig(**payload["config"]), payload["n_features"])


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_loss(y, p):
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())


def _best_split(x_col, order, g, h, cfg):
    """Best (gain, threshold) along one presorted feature column, or None.

    Gradient/hessian statistics are aggregated per distinct feature value
    before the prefix scan: tied rows share one candidate boundary, and the
    scan sees group sums. Duplicating every row then doubles each group sum
    exactly, so split decisions are invariant under row duplication (for
    l2_reg = min_child_weight = 0), not just approximately so.
    """
    vals = x_col[order]
    if vals.size < 2 or vals[0] == vals[-1]:
        return None
    starts = np.flatnonzero(np.concatenate([[True], vals[1:] != vals[:-1]]))
    gl = np.cumsum(np.add.reduceat(g[order], starts))
    hl = np.cumsum(np.add.reduceat(h[order], starts))
    g_total, h_total = gl[-1], hl[-1]
    gl, hl = gl[:-1], hl[:-1]
    gr = g_total - gl
    hr = h_total - hl
    valid = (hl >= cfg.min_child_weight) & (hr >= cfg.min_child_weight)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        parent = g_total * g_total / (h_total + cfg.l2_reg)
        gain = 0.5 * (gl ** 2 / (hl + cfg.l2_reg) + gr ** 2 / (hr + cfg.l2_reg) - parent)
    gain[~valid | ~np.isfinite(gain)] = -np.inf
    i = int(np.argmax(gain))
    uniq = vals[starts]
    child_stats = (float(gl[i]), float(hl[i]), float(gr[i]), float(hr[i]))
    return float(gain[i]), 0.5 * (uniq[i] + uniq[i + 1]), child_stats


def _grouped_totals(x_col, order, g, h):
    # same grouped summation path the split scan uses, so node totals stay
    # consistent with prefix statistics (and double exactly under duplication)
    vals = x_col[order]
    starts = np.flatnonzero(np.concatenate([[True], vals[1:] != vals[:-1]]))
    return (float(np.cumsum(np.add.reduceat(g[order], starts))[-1]),
            float(np.cumsum(np.add.reduceat(h[order], starts))[-1]))


def _grow_tree(x, g, h, sort_idx, cfg):
    feature, threshold, left, right, value = [], [], [], [], []

    def emit_leaf(g_sum, h_sum):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        denom = h_sum + cfg.l2_reg
        # a saturated node (h=0 with no penalty) also has g=0; Newton step is 0
        value.append(-g_sum / denom if denom > 0 else 0.0)
        return len(feature) - 1

    def build(member, depth, g_sum, h_sum):
        if depth >= cfg.max_depth or member.sum() < 2:
            return emit_leaf(g_sum, h_sum)
        best = None
        for f in range(x.shape[1]):
            order = sort_idx[f][member[sort_idx[f]]]
            found = _best_split(x[:, f], order, g, h, cfg)
            # strict > keeps the lowest feature index on gain ties
            if found is not None and (best is None or found[0] > best[0]):
                best = (found[0], f, found[1], found[2])
        if best is None or best[0] <= 0.0:
            return emit_leaf(g_sum, h_sum)
        _, f, thr, (g_left, h_left, g_right, h_right) = best
        idx = len(feature)
        feature.append(f)
        threshold.append(thr)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        goes_left = member & (x[:, f] < thr)
        # children inherit the scan's prefix sums instead of re-summing rows
        left[idx] = build(goes_left, depth + 1, g_left, h_left)
        right[idx] = build(member & ~goes_left, depth + 1, g_right, h_right)
        return idx

    root = np.ones(len(x), dtype=bool)
    build(root, 0, *_grouped_totals(x[:, 0], sort_idx[0], g, h))
    return _Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                 np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                 np.array(value))


def fit_gbdt(data: PairFeatures, config: GbdtConfig = GbdtConfig(), seed: int = 0) -> GbdtModel:
    """Boost config.n_trees rounds of exact-greedy trees on logistic loss.

    Deterministic given data order; the seed is accepted for interface
    stability but unused (no row or column subsampling here).
    """
    x = np.ascontiguousarray(data.features, dtype=np.float64)
    y = data.labels.astype(np.float64)
    pos = y.sum()
    if pos == 0 or pos == len(y):
        raise DegenerateLabelsError("training data contains a single class")
    base = float(np.log(pos / (len(y) - pos)))
    sort_idx = np.argsort(x, axis=0, kind="stable").T.copy()
    raw = np.full(len(y), base)
    trees = []
    losses = [_log_loss(y, _sigmoid(raw))]
    for _ in range(config.n_trees):
        p = _sigmoid(raw)
        g = p - y
        h = p * (1.0 - p)
        tree = _grow_tree(x, g, h, sort_idx, config)
        trees.append(tree)
        raw += config.learning_rate * tree.predict(x)
        losses.append(_log_loss(y, _sigmoid(raw)))
    return GbdtModel(trees, config.learning_rate, base, config, x.shape[1],
                     np.array(losses))


def predict_gbdt(model: GbdtModel, features: np.ndarray) -> np.ndarray:
    """Probability-scale scores sigmoid(base + lr * sum of tree outputs)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise SchemaError(
            f"expected {model.n_features} features, got shape {features.shape}")
    raw = np.full(len(features), model.base_score)
    for tree in model.trees:
        raw += model.learning_rate * tree.predict(features)
    return _sigmoid(raw)
