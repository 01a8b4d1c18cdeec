"""Heuristic link scores for cross-side pairs of a bipartite train graph.

All scorers share the same access pattern: pairs are grouped by left node,
scores for a batch of left nodes are computed as dense (batch x right_count)
blocks by propagating sparse frontiers, and results are gathered back into
the caller's pair order. Nothing ever materializes a dense score matrix over
the full left set at once.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import DivergenceError
from .graph import BipartiteGraph, non_edge_pairs

DEFAULT_BATCH = 256


def _resolve_pairs(graph: BipartiteGraph, pairs) -> np.ndarray:
    """Queried pairs as an (n, 2) int array; None means every non-edge."""
    if pairs is None:
        return non_edge_pairs(graph)
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class ScoreTable:
    """Scores for a set of cross-side pairs against one train graph."""

    method: str
    pairs: np.ndarray
    scores: np.ndarray
    graph_fingerprint: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.pairs) != len(self.scores):
            raise ValueError("pairs and scores must be parallel")
        if not np.isfinite(self.scores).all():
            raise ValueError(f"{self.method}: non-finite scores")

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(f"# method: {self.method}\n")
            fh.write(f"# graph_fingerprint: {self.graph_fingerprint}\n")
            fh.write(f"# params: {json.dumps(self.params, sort_keys=True)}\n")
            for (u, v), s in zip(self.pairs, self.scores):
                fh.write(f"{u}\t{v}\t{float(s)!r}\n")

    @classmethod
    def load(cls, path: Path | str) -> "ScoreTable":
        meta = {"method": "?", "graph_fingerprint": "?", "params": {}}
        pairs, scores = [], []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition(":")
                    key = key.strip()
                    if key == "params":
                        meta[key] = json.loads(value.strip())
                    elif key in meta:
                        meta[key] = value.strip()
                    continue
                u, v, s = line.split("\t")
                pairs.append((int(u), int(v)))
                scores.append(float(s))
        return cls(meta["method"], np.array(pairs, dtype=np.int64).reshape(-1, 2),
                   np.array(scores, dtype=np.float64),
                   meta["graph_fingerprint"], meta["params"])


@dataclass(frozen=True)
class KatzParams:
    """max_length=None sums the full series and then requires alpha below 1/rho."""

    alpha: float = 0.01
    max_length: int | None = 21
    tolerance: float = 1e-12

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.max_length is not None and self.max_length < 1:
            raise ValueError("max_length must be >= 1")


@dataclass(frozen=True)
class SpmParams:
    perturbation_fraction: float = 0.1
    repetitions: int = 10
    degeneracy_tolerance: float = 1e-10
    node_cap: int = 5000

    def __post_init__(self):
        if not 0.0 < self.perturbation_fraction < 1.0:
            raise ValueError("perturbation_fraction must lie in (0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def _gather_by_left(graph: BipartiteGraph, pairs: np.ndarray, block_fn, batch_size=DEFAULT_BATCH):
    """Fill scores for `pairs` from dense per-left-batch blocks.

    block_fn(left_ids) must return an array of shape (len(left_ids), right_count).
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    out = np.empty(len(pairs), dtype=np.float64)
    order = np.argsort(pairs[:, 0], kind="stable")
    sorted_lefts = pairs[order, 0]
    uniq = np.unique(sorted_lefts)
    for i in range(0, uniq.size, batch_size):
        batch = uniq[i:i + batch_size]
        lo = np.searchsorted(sorted_lefts, batch[0])
        hi = np.searchsorted(sorted_lefts, batch[-1], side="right")
        rows = order[lo:hi]
        block = block_fn(batch)
        local = np.searchsorted(batch, pairs[rows, 0])
        out[rows] = block[local, pairs[rows, 1]]
    return out


def _inv_sqrt_degrees(degrees: np.ndarray) -> np.ndarray:
    # zero-degree nodes carry no walks; scale 0 keeps the product at 0 instead of nan
    out = np.zeros(degrees.size, dtype=np.float64)
    nz = degrees > 0
    out[nz] = 1.0 / np.sqrt(degrees[nz])
    return out


def score_path_index(graph: BipartiteGraph, pairs=None, length: int = 3,
                     normalized: bool = True, batch_size=DEFAULT_BATCH) -> ScoreTable:
    """Degree-normalized count of length-l walks between cross-side pairs.

    Each walk x, u_1, w_1, ..., y contributes 1/sqrt(prod of intermediate-node
    degrees); with normalized=False every walk counts 1. Only odd lengths make
    sense across sides of a bipartite graph.
    """
    if length % 2 == 0 or length < 3:
        raise ValueError(f"path length must be odd and >= 3, got {length}")
    pairs = _resolve_pairs(graph, pairs)
    b = graph.biadjacency()
    bt = b.T.tocsr()
    sv = _inv_sqrt_degrees(graph.right_degrees) if normalized else np.ones(graph.right_count)
    su = _inv_sqrt_degrees(graph.left_degrees) if normalized else np.ones(graph.left_count)
    hops = (length - 1) // 2

    def block_fn(left_ids):
        m = b[left_ids].toarray()
        for _ in range(hops):
            # (b, V) -> scale right intermediates -> (b, U) -> scale left -> (b, V)
            m_u = (b @ (m * sv).T).T * su
            m = (bt @ m_u.T).T
        return m

    scores = _gather_by_left(graph, pairs, block_fn, batch_size)
    return ScoreTable(f"l{length}", pairs, scores, graph.fingerprint(),
                      {"length": length, "normalized": normalized})


def spectral_radius(adjacency: sp.spmatrix, iters: int = 200, tol: float = 1e-10,
                    seed: int = 0) -> float:
    """Largest |eigenvalue| of a symmetric matrix by power iteration on A^2.

    Squaring sidesteps the sign alternation of bipartite spectra (+/-lambda
    pairs make iteration on A itself oscillate).
    """
    n = adjacency.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_sq = 0.0
    for _ in range(iters):
        w = adjacency @ (adjacency @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        new = float(v @ w)
        v = w / norm
        if abs(new - lam_sq) <= tol * max(1.0, abs(new)):
            lam_sq = new
            break
        lam_sq = new
    return float(np.sqrt(max(lam_sq, 0.0)))


def score_katz(graph: BipartiteGraph, params: KatzParams = KatzParams(),
               pairs=None, batch_size=DEFAULT_BATCH) -> ScoreTable:
    """Attenuated walk count sum_{l=1..max_length} alpha^l (A^l)_xy.

    Truncates early once a term's largest magnitude drops below tolerance.
    A finite max_length keeps the sum well-defined for any alpha; when
    alpha*rho >= 1 the tail dominates and a warning records that the score is
    the truncated series, not the closed form. The untruncated mode
    (max_length=None) requires a convergent alpha outright. Even-l terms are
    accumulated and asserted to vanish on cross-side pairs rather than
    silently skipped.
    """
    pairs = _resolve_pairs(graph, pairs)
    adj = graph.adjacency()
    rho = spectral_radius(adj)
    if params.alpha * rho >= 1.0:
        if params.max_length is None:
            raise DivergenceError(
                f"alpha={params.alpha} does not converge: spectral radius {rho:.6g} "
                f"requires alpha < {1.0 / rho:.6g}")
        logging.getLogger(__name__).warning(
            "alpha=%g exceeds the convergent bound %g; reporting the series "
            "truncated at length %d", params.alpha, 1.0 / rho, params.max_length)
    nl = graph.left_count
    limit = params.max_length if params.max_length is not None else 10_000

    def block_fn(left_ids):
        f = np.zeros((adj.shape[0], len(left_ids)))
        f[left_ids, np.arange(len(left_ids))] = 1.0
        acc = np.zeros((len(left_ids), graph.right_count))
        coef = 1.0
        for step in range(1, limit + 1):
            f = adj @ f
            coef *= params.alpha
            term = coef * f[nl:, :].T
            if step % 2 == 0:
                assert np.abs(term).max(initial=0.0) == 0.0, \
                    "even-length walks reached the opposite side of a bipartite graph"
            else:
                acc += term
                if np.abs(term).max(initial=0.0) < params.tolerance:
                    break
        return acc

    scores = _gather_by_left(graph, pairs, block_fn, batch_size)
    return ScoreTable("katz", pairs, scores, graph.fingerprint(),
                      {"alpha": params.alpha, "max_length": params.max_length,
                       "tolerance": params.tolerance})


def score_lp(graph: BipartiteGraph, epsilon: float = 0.001, pairs=None,
             batch_size=DEFAULT_BATCH) -> ScoreTable:
    """Local-path score (A^2)_xy + eps*(A^3)_xy on cross-side pairs.

    The quadratic term is computed and asserted to be zero (two hops cannot
    cross sides), so the effective value is eps times the 3-walk count.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pairs = _resolve_pairs(graph, pairs)
    adj = graph.adjacency()
    nl = graph.left_count

    def block_fn(left_ids):
        f = np.zeros((adj.shape[0], len(left_ids)))
        f[left_ids, np.arange(len(left_ids))] = 1.0
        f2 = adj @ (adj @ f)
        quad = f2[nl:, :].T
        assert np.abs(quad).max(initial=0.0) == 0.0, \
            "(A^2) cross-side block must vanish on a bipartite graph"
        f3 = adj @ f2
        return quad + epsilon * f3[nl:, :].T

    scores = _gather_by_left(graph, pairs, block_fn, batch_size)
    return ScoreTable("lp", pairs, scores, graph.fingerprint(), {"epsilon": epsilon})


def score_pa(graph: BipartiteGraph, pairs=None) -> ScoreTable:
    """Preferential attachment: product of train-graph endpoint degrees."""
    pairs = _resolve_pairs(graph, pairs)
    kx = graph.left_degrees[pairs[:, 0]].astype(np.float64)
    ky = graph.right_degrees[pairs[:, 1]].astype(np.float64)
    return ScoreTable("pa", pairs, kx * ky, graph.fingerprint(), {})


def score_dist(graph: BipartiteGraph, pairs=None, batch_size=DEFAULT_BATCH) -> ScoreTable:
    """Reciprocal shortest-path distance; unreachable pairs score 0."""
    pairs = _resolve_pairs(graph, pairs)
    adj = graph.adjacency()
    nl = graph.left_count

    def block_fn(left_ids):
        d = shortest_path(adj, method="D", unweighted=True, indices=left_ids)
        cross = d[:, nl:]
        with np.errstate(divide="ignore"):
            s = 1.0 / cross
        s[~np.isfinite(s)] = 0.0
        return s

    scores = _gather_by_left(graph, pairs, block_fn, batch_size)
    return ScoreTable("dist", pairs, scores, graph.fingerprint(), {})


def rank_and_select(table: ScoreTable, n: int) -> np.ndarray:
    """Top-n pairs by score; ties broken by ascending (left_id, right_id)."""
    if n > len(table.pairs):
        raise ValueError(f"asked for {n} pairs but only {len(table.pairs)} were scored")
    order = np.lexsort((table.pairs[:, 1], table.pairs[:, 0], -table.scores))
    return table.pairs[order[:n]]
