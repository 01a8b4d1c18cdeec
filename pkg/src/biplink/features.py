"""Balanced labeled pair datasets from node measures plus the PA score.

Feature layout is fixed: six measures of the left endpoint, six of the right
endpoint (order MEASURE_NAMES), then the degree product, 13 columns total,
label last in serialized form.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityError, SchemaError
from .graph import BipartiteGraph
from .measures import MEASURE_NAMES, NodeMeasures

FEATURE_NAMES = tuple(f"left_{m}" for m in MEASURE_NAMES) \
    + tuple(f"right_{m}" for m in MEASURE_NAMES) + ("preferential_attachment",)

_REJECTION_ROUNDS = 64
_ENUM_THRESHOLD = 4096


@dataclass(frozen=True)
class PairFeatures:
    pairs: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if self.features.shape != (len(self.pairs), len(self.feature_names)):
            raise SchemaError("feature matrix shape does not match pairs/names")
        if np.isnan(self.features).any():
            raise SchemaError("feature matrix contains NaN")
        if not np.isin(self.labels, (0, 1)).all():
            raise SchemaError("labels must be binary")

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = "left_id,right_id," + ",".join(self.feature_names) + ",label"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for (u, v), row, y in zip(self.pairs, self.features, self.labels):
                cells = ",".join(repr(float(x)) for x in row)
                fh.write(f"{u},{v},{cells},{int(y)}\n")

    @classmethod
    def load(cls, path: Path | str) -> "PairFeatures":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            names = tuple(header[2:-1])
            rows = [line.strip().split(",") for line in fh if line.strip()]
        arr = np.array(rows, dtype=np.float64)
        return cls(arr[:, :2].astype(np.int64), arr[:, 2:-1],
                   arr[:, -1].astype(np.int64), names)


def negative_sample(graph: BipartiteGraph, n: int, seed: int) -> np.ndarray:
    """n distinct uniformly random cross-side non-edges of the train graph.

    Rejection-samples pair codes against the edge set; small pair universes
    fall back to enumerating all non-edges and choosing without replacement.
    """
    total = graph.left_count * graph.right_count
    available = total - graph.edge_count
    if n > available:
        raise CapacityError(f"asked for {n} non-edges but only {available} exist")
    if n == 0:
        return np.zeros((0, 2), dtype=np.int64)
    rng = np.random.default_rng(seed)
    edge_codes = graph.edge_codes()
    if total <= _ENUM_THRESHOLD or n > available // 2:
        mask = np.ones(total, dtype=bool)
        mask[edge_codes] = False
        non_edges = np.flatnonzero(mask)
        chosen = rng.choice(non_edges, size=n, replace=False)
    else:
        chosen = np.zeros(0, dtype=np.int64)
        for _ in range(_REJECTION_ROUNDS):
            draw = rng.integers(0, total, size=2 * (n - chosen.size) + 16)
            pos = np.clip(np.searchsorted(edge_codes, draw), 0, edge_codes.size - 1)
            draw = draw[edge_codes[pos] != draw]
            chosen = np.unique(np.concatenate([chosen, draw]))
            if chosen.size >= n:
                # unique() sorted the pool; subsample to keep the draw unbiased
                chosen = rng.choice(chosen, size=n, replace=False)
                break
        else:
            raise CapacityError(f"rejection sampling failed to collect {n} non-edges")
    return np.column_stack([chosen // graph.right_count, chosen % graph.right_count])


def pair_feature_matrix(graph: BipartiteGraph, measures: NodeMeasures,
                        pairs: np.ndarray) -> np.ndarray:
    """(n, 13) feature rows for arbitrary cross-side pairs."""
    m = measures.matrix()
    left_rows = m[pairs[:, 0]]
    right_rows = m[graph.left_count + pairs[:, 1]]
    pa = (graph.left_degrees[pairs[:, 0]]
          * graph.right_degrees[pairs[:, 1]]).astype(np.float64)
    return np.column_stack([left_rows, right_rows, pa])


def build_pair_dataset(graph: BipartiteGraph, measures: NodeMeasures,
                       seed: int) -> PairFeatures:
    """All train edges as positives, an equal count of sampled non-edges as negatives.

    Row order is shuffled deterministically by the same seed that drives the
    negative sampler.
    """
    positives = graph.edge_array()
    negatives = negative_sample(graph, len(positives), seed)
    pairs = np.concatenate([positives, negatives])
    labels = np.concatenate([np.ones(len(positives), dtype=np.int64),
                             np.zeros(len(negatives), dtype=np.int64)])
    features = pair_feature_matrix(graph, measures, pairs)
    perm = np.random.default_rng(seed).permutation(len(pairs))
    return PairFeatures(pairs[perm], features[perm], labels[perm])
