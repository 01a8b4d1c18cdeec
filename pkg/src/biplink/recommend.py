"""Pairwise-ranking recommenders and their conversion to link scores.

Two models share one training core: matrix factorization trained on the BPR
objective, and the same objective computed on linearly propagated embeddings
(LightGCN-style aggregation, mean of layer outputs). Propagation is linear,
so backprop is exact: the adjoint of sum_l M^l / (L+1) is itself because the
normalized adjacency M is symmetric. No autodiff framework involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, EmptyGraphError
from .graph import BipartiteGraph
from .scores import ScoreTable


@dataclass(frozen=True)
class EmbeddingTable:
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def __post_init__(self):
        if self.left_vectors.shape[1] != self.right_vectors.shape[1]:
            raise ValueError("embedding dims differ across sides")
        if not (np.isfinite(self.left_vectors).all() and np.isfinite(self.right_vectors).all()):
            raise ValueError("non-finite embedding entries")

    @property
    def dim(self) -> int:
        return self.left_vectors.shape[1]

    def stacked(self) -> np.ndarray:
        return np.vstack([self.left_vectors, self.right_vectors])

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(f"# dim {self.dim} left {len(self.left_vectors)} "
                     f"right {len(self.right_vectors)}\n")
            for row in self.stacked():
                fh.write("\t".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load(cls, path: Path | str) -> "EmbeddingTable":
        with open(path) as fh:
            head = fh.readline().split()
            dim, nl, nr = int(head[2]), int(head[4]), int(head[6])
            rows = np.loadtxt(fh, dtype=np.float64, ndmin=2)
        if rows.shape != (nl + nr, dim):
            raise ValueError(f"{path}: matrix shape {rows.shape} does not match header")
        return cls(rows[:nl], rows[nl:])


class TrainedEmbeddings(NamedTuple):
    """Base (free parameters) and final (propagated) embeddings of one model."""

    base: EmbeddingTable
    final: EmbeddingTable


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 64
    epochs: int = 300
    learning_rate: float = 0.001
    l2_reg: float = 1e-4
    batch_size: int = 4096
    layers: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.layers < 0 or self.learning_rate <= 0:
            raise ValueError("invalid training configuration")


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _propagation_matrix(graph: BipartiteGraph) -> sp.csr_matrix:
    """Symmetrically normalized adjacency D^{-1/2} A D^{-1/2}; isolates stay zero."""
    adj = graph.adjacency()
    degs = np.asarray(adj.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(degs)
    nz = degs > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(degs[nz])
    d = sp.diags(inv_sqrt)
    return (d @ adj @ d).tocsr()


def _propagate_stacked(m: sp.csr_matrix, e: np.ndarray, layers: int) -> np.ndarray:
    acc = e.copy()
    cur = e
    for _ in range(layers):
        cur = m @ cur
        acc += cur
    return acc / (layers + 1.0)


def propagate_lightgcn(embeddings: EmbeddingTable, graph: BipartiteGraph,
                       layers: int) -> EmbeddingTable:
    """Mean of embeddings over propagation depths 0..layers."""
    if layers < 0:
        raise ValueError("layers must be >= 0")
    out = _propagate_stacked(_propagation_matrix(graph), embeddings.stacked(), layers)
    nl = len(embeddings.left_vectors)
    return EmbeddingTable(out[:nl], out[nl:])


def triplet_loss(final: np.ndarray, base: np.ndarray, triplets: np.ndarray,
                 l2_reg: float, left_count: int) -> float:
    """Minimized BPR objective on one batch of (user, pos_item, neg_item) rows.

    Scores come from `final` (stacked, propagated); the L2 penalty hits the
    `base` vectors of each triplet occurrence, so duplicated rows count twice.
    """
    u = triplets[:, 0]
    i = triplets[:, 1] + left_count
    j = triplets[:, 2] + left_count
    x_ui = np.einsum("bd,bd->b", final[u], final[i])
    x_uj = np.einsum("bd,bd->b", final[u], final[j])
    margin = x_ui - x_uj
    # -log sigmoid(m), stable for both signs
    nll = np.logaddexp(0.0, -margin).sum()
    reg = l2_reg * ((base[u] ** 2).sum() + (base[i] ** 2).sum() + (base[j] ** 2).sum())
    return float(nll + reg)


def triplet_gradients(final: np.ndarray, base: np.ndarray, triplets: np.ndarray,
                      l2_reg: float, left_count: int):
    """(loss, d_loss/d_final, d_reg/d_base) for one batch, summed over rows."""
    u = triplets[:, 0]
    i = triplets[:, 1] + left_count
    j = triplets[:, 2] + left_count
    fu, fi, fj = final[u], final[i], final[j]
    margin = np.einsum("bd,bd->b", fu, fi) - np.einsum("bd,bd->b", fu, fj)
    s = _sigmoid(-margin)[:, None]
    d_final = np.zeros_like(final)
    np.add.at(d_final, u, -s * (fi - fj))
    np.add.at(d_final, i, -s * fu)
    np.add.at(d_final, j, s * fu)
    d_reg = np.zeros_like(base)
    for idx in (u, i, j):
        np.add.at(d_reg, idx, 2.0 * l2_reg * base[idx])
    nll = np.logaddexp(0.0, -margin).sum()
    reg = l2_reg * ((base[u] ** 2).sum() + (base[i] ** 2).sum() + (base[j] ** 2).sum())
    return float(nll + reg), d_final, d_reg


def _sample_negatives(rng, edges, graph: BipartiteGraph) -> np.ndarray:
    """One uniformly random non-observed right node per (user, item) row."""
    train_codes = graph.edge_codes()
    u = edges[:, 0]
    j = rng.integers(0, graph.right_count, size=len(edges))
    for _ in range(1000):
        codes = u * graph.right_count + j
        pos = np.clip(np.searchsorted(train_codes, codes), 0, train_codes.size - 1)
        bad = train_codes[pos] == codes
        if not bad.any():
            return j
        j = j.copy()
        j[bad] = rng.integers(0, graph.right_count, size=int(bad.sum()))
    raise CapacityError("negative sampling failed; a user may have no unobserved items")


def _check_trainable(graph: BipartiteGraph) -> None:
    if (graph.left_degrees == 0).any():
        bad = int(np.flatnonzero(graph.left_degrees == 0)[0])
        raise EmptyGraphError(f"left node {bad} has no train edges")
    if (graph.left_degrees >= graph.right_count).any():
        raise CapacityError("a left node is connected to every right node; "
                            "no negatives exist for it")


def _train_core(graph: BipartiteGraph, config: TrainConfig, layers: int):
    """Seeded SGD on the BPR objective; returns (base stacked, per-epoch losses)."""
    _check_trainable(graph)
    rng = np.random.default_rng(config.seed)
    n = graph.node_count
    nl = graph.left_count
    e = rng.normal(0.0, 0.01, size=(n, config.dim))
    m = _propagation_matrix(graph) if layers > 0 else None
    edges = graph.edge_array()
    losses = []
    for _ in range(config.epochs):
        order = rng.permutation(len(edges))
        negs = _sample_negatives(rng, edges[order], graph)
        triplets = np.column_stack([edges[order], negs])
        epoch_loss = 0.0
        for lo in range(0, len(triplets), config.batch_size):
            batch = triplets[lo:lo + config.batch_size]
            final = _propagate_stacked(m, e, layers) if layers > 0 else e
            loss, d_final, d_reg = triplet_gradients(final, e, batch, config.l2_reg, nl)
            grad = _propagate_stacked(m, d_final, layers) if layers > 0 else d_final
            e -= config.learning_rate * (grad + d_reg)
            epoch_loss += loss
        losses.append(epoch_loss)
    return e, np.array(losses)


def train_bpr(graph: BipartiteGraph, config: TrainConfig = TrainConfig()) -> EmbeddingTable:
    """Matrix factorization under the pairwise ranking objective."""
    e, _ = _train_core(graph, config, layers=0)
    return EmbeddingTable(e[:graph.left_count], e[graph.left_count:])


def train_lightgcn(graph: BipartiteGraph,
                   config: TrainConfig = TrainConfig()) -> TrainedEmbeddings:
    """Same objective scored on propagated embeddings; scoring uses `final`.

    With layers=0 this reduces exactly to train_bpr for the same seed: the
    sampling sequence and every update coincide.
    """
    e, _ = _train_core(graph, config, layers=config.layers)
    final = _propagate_stacked(_propagation_matrix(graph), e, config.layers) \
        if config.layers > 0 else e
    nl = graph.left_count
    return TrainedEmbeddings(EmbeddingTable(e[:nl], e[nl:]),
                             EmbeddingTable(final[:nl], final[nl:]))


def scores_from_embeddings(embeddings: EmbeddingTable, pairs,
                           method: str = "embedding",
                           graph_fingerprint: str = "", params: dict | None = None) -> ScoreTable:
    """Inner-product scores <e_u, e_v>; one table serves ranking and prediction."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        if pairs.min() < 0 or pairs[:, 0].max() >= len(embeddings.left_vectors) \
                or pairs[:, 1].max() >= len(embeddings.right_vectors):
            raise IndexError("pair id out of embedding bounds")
    scores = np.einsum("bd,bd->b", embeddings.left_vectors[pairs[:, 0]],
                       embeddings.right_vectors[pairs[:, 1]])
    return ScoreTable(method, pairs, scores, graph_fingerprint, params or {})
