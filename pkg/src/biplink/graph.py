"""Bipartite graph container, dataset ingestion, degree filtering, and edge splitting.

Node ids are dense integers per side: left ids in [0, left_count) and right ids
in [0, right_count). Where a single id space over all nodes is needed (walks,
centralities, eigendecompositions) a right node v maps to global id
left_count + v. Edge pairs are (left_id, right_id) throughout.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import EmptyGraphError, ParseError, SplitInfeasibleError

EDGE_LIST_FORMATS = ("tsv_pair", "movielens_u_data")


def _csr_from_pairs(rows, cols, n_rows):
    """Build (indptr, indices) with sorted neighbor lists from id pairs."""
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, cols.astype(np.int64, copy=True)


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable two-sided graph stored as CSR neighbor lists in both orientations."""

    left_count: int
    right_count: int
    left_indptr: np.ndarray
    left_indices: np.ndarray
    right_indptr: np.ndarray
    right_indices: np.ndarray
    left_labels: tuple | None = None
    right_labels: tuple | None = None

    @classmethod
    def from_edges(cls, left_count, right_count, edges, left_labels=None, right_labels=None):
        """Construct from an iterable/array of (left_id, right_id) pairs.

        Duplicate pairs collapse to a single edge; ids must be in range.
        """
        if left_count <= 0 or right_count <= 0:
            raise EmptyGraphError("graph must have at least one node on each side")
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        edges = edges.reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges[:, 0].max() >= left_count or edges[:, 1].max() >= right_count:
                raise ValueError("edge references an out-of-range node id")
            codes = edges[:, 0] * right_count + edges[:, 1]
            codes = np.unique(codes)
            lefts = codes // right_count
            rights = codes % right_count
        else:
            lefts = rights = np.zeros(0, dtype=np.int64)
        li, lx = _csr_from_pairs(lefts, rights, left_count)
        ri, rx = _csr_from_pairs(rights, lefts, right_count)
        return cls(left_count, right_count, li, lx, ri, rx, left_labels, right_labels)

    @property
    def edge_count(self) -> int:
        return int(self.left_indices.size)

    @property
    def node_count(self) -> int:
        return self.left_count + self.right_count

    @property
    def left_degrees(self) -> np.ndarray:
        return np.diff(self.left_indptr)

    @property
    def right_degrees(self) -> np.ndarray:
        return np.diff(self.right_indptr)

    def neighbors_of_left(self, u: int) -> np.ndarray:
        return self.left_indices[self.left_indptr[u]:self.left_indptr[u + 1]]

    def neighbors_of_right(self, v: int) -> np.ndarray:
        return self.right_indices[self.right_indptr[v]:self.right_indptr[v + 1]]

    def edge_array(self) -> np.ndarray:
        """All edges as an (m, 2) array sorted by (left, right)."""
        lefts = np.repeat(np.arange(self.left_count, dtype=np.int64), self.left_degrees)
        return np.column_stack([lefts, self.left_indices])

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edge_array()}

    def edge_codes(self) -> np.ndarray:
        """Sorted int64 codes left*right_count+right, for fast membership tests."""
        arr = self.edge_array()
        return arr[:, 0] * self.right_count + arr[:, 1]

    def has_edges(self, pairs: np.ndarray) -> np.ndarray:
        """Vectorized membership of (n, 2) pairs in the edge set."""
        codes = pairs[:, 0] * self.right_count + pairs[:, 1]
        own = self.edge_codes()
        if own.size == 0:
            return np.zeros(len(pairs), dtype=bool)
        pos = np.clip(np.searchsorted(own, codes), 0, own.size - 1)
        return own[pos] == codes

    def biadjacency(self) -> sp.csr_matrix:
        """|U| x |V| sparse 0/1 matrix."""
        lefts = np.repeat(np.arange(self.left_count), self.left_degrees)
        data = np.ones(self.edge_count, dtype=np.float64)
        return sp.csr_matrix((data, (lefts, self.left_indices)),
                             shape=(self.left_count, self.right_count))

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric (|U|+|V|) x (|U|+|V|) adjacency over the single id space."""
        b = self.biadjacency()
        return sp.bmat([[None, b], [b.T, None]], format="csr")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.left_count},{self.right_count};".encode())
        h.update(np.ascontiguousarray(self.edge_array()).tobytes())
        return h.hexdigest()[:16]

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        assert self.left_degrees.sum() == self.right_degrees.sum() == self.edge_count
        transposed = {(int(v), int(u)) for u, v in self.edge_array()}
        from_right = {(int(v), int(u))
                      for v in range(self.right_count)
                      for u in self.neighbors_of_right(v)}
        assert {(u, v) for v, u in transposed} == {(u, v) for v, u in from_right}


@dataclass(frozen=True)
class EdgeSplit:
    """Disjoint train/test partition of a graph's edges, with seed provenance."""

    train_edges: np.ndarray
    test_edges: np.ndarray
    seed: int
    test_fraction: float

    def save(self, prefix: Path | str) -> None:
        """Write <prefix>.train.tsv, <prefix>.test.tsv and a JSON sidecar."""
        prefix = Path(prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        for name, arr in (("train", self.train_edges), ("test", self.test_edges)):
            with open(f"{prefix}.{name}.tsv", "w") as fh:
                for u, v in arr:
                    fh.write(f"{u}\t{v}\n")
        with open(f"{prefix}.split.json", "w") as fh:
            json.dump({"seed": self.seed, "test_fraction": self.test_fraction,
                       "n_train": int(len(self.train_edges)),
                       "n_test": int(len(self.test_edges))}, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, prefix: Path | str) -> "EdgeSplit":
        prefix = Path(prefix)
        with open(f"{prefix}.split.json") as fh:
            meta = json.load(fh)
        parts = []
        for name in ("train", "test"):
            rows = np.loadtxt(f"{prefix}.{name}.tsv", dtype=np.int64, ndmin=2)
            parts.append(rows.reshape(-1, 2))
        return cls(parts[0], parts[1], meta["seed"], meta["test_fraction"])


def load_edge_list(path, fmt: str = "tsv_pair") -> BipartiteGraph:
    """Read an edge list and densely re-index both sides in first-appearance order.

    Formats:
      tsv_pair          one `<left>\\t<right>` per line, `#` comments skipped
      movielens_u_data  `<user>\\t<item>\\t<rating>\\t<timestamp>`; rating and
                        timestamp are discarded

    Repeated interactions collapse to a single edge.
    """
    if fmt not in EDGE_LIST_FORMATS:
        raise ValueError(f"unknown edge list format {fmt!r}; expected one of {EDGE_LIST_FORMATS}")
    n_fields = 2 if fmt == "tsv_pair" else 4
    left_ids: dict = {}
    right_ids: dict = {}
    lefts, rights = [], []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) == 1:
                fields = line.split()
            if len(fields) != n_fields:
                raise ParseError(path, line_no,
                                 f"expected {n_fields} fields for format {fmt!r}, got {len(fields)}")
            lraw, rraw = fields[0], fields[1]
            if not lraw or not rraw:
                raise ParseError(path, line_no, "empty node id")
            lefts.append(left_ids.setdefault(lraw, len(left_ids)))
            rights.append(right_ids.setdefault(rraw, len(right_ids)))
    if not lefts:
        raise EmptyGraphError(f"{path}: no edges found")
    edges = np.column_stack([np.array(lefts, dtype=np.int64), np.array(rights, dtype=np.int64)])
    return BipartiteGraph.from_edges(
        len(left_ids), len(right_ids), edges,
        left_labels=tuple(left_ids), right_labels=tuple(right_ids))


def save_edge_list(graph: BipartiteGraph, path) -> None:
    """Write the edge set as tsv_pair, using original labels when available."""
    ll = graph.left_labels or tuple(str(i) for i in range(graph.left_count))
    rl = graph.right_labels or tuple(str(i) for i in range(graph.right_count))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in graph.edge_array():
            fh.write(f"{ll[u]}\t{rl[v]}\n")


def density(graph: BipartiteGraph) -> float:
    """|L| / (|U| * |V|)."""
    if graph.left_count == 0 or graph.right_count == 0:
        raise EmptyGraphError("density undefined for a graph with an empty side")
    return graph.edge_count / (graph.left_count * graph.right_count)


def min_degree_filter(graph: BipartiteGraph, min_left_degree: int) -> BipartiteGraph:
    """Drop left nodes with degree < min_left_degree (single pass), then right isolates.

    Surviving ids are re-densified preserving order; labels follow along.
    """
    if min_left_degree < 0:
        raise ValueError("min_left_degree must be >= 0")
    keep_left = graph.left_degrees >= min_left_degree
    if not keep_left.any():
        raise EmptyGraphError(f"min-degree filter {min_left_degree} removed every left node")
    edges = graph.edge_array()
    edges = edges[keep_left[edges[:, 0]]]
    keep_right = np.zeros(graph.right_count, dtype=bool)
    keep_right[edges[:, 1]] = True
    left_map = np.cumsum(keep_left) - 1
    right_map = np.cumsum(keep_right) - 1
    new_edges = np.column_stack([left_map[edges[:, 0]], right_map[edges[:, 1]]])
    ll = graph.left_labels
    rl = graph.right_labels
    return BipartiteGraph.from_edges(
        int(keep_left.sum()), int(keep_right.sum()), new_edges,
        left_labels=tuple(np.array(ll)[keep_left]) if ll else None,
        right_labels=tuple(np.array(rl)[keep_right]) if rl else None)


def _per_node_test_count(degree: int, fraction: float) -> int:
    # round-half-up, then clamp into [1, k-1] so the node keeps edges in both sets
    return int(min(max(int(np.floor(fraction * degree + 0.5)), 1), degree - 1))


def split_per_left_node(graph: BipartiteGraph, test_fraction: float, seed: int) -> EdgeSplit:
    """Move clamp(round(f*k), 1, k-1) uniformly chosen edges of each left node to test.

    Every left node must have degree >= 2 so that neither set leaves it isolated.
    Rounding is half-up. Deterministic for a given seed.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    degs = graph.left_degrees
    low = np.flatnonzero(degs < 2)
    if low.size:
        raise SplitInfeasibleError(
            f"left node {int(low[0])} has degree {int(degs[low[0]])}; "
            "every left node needs degree >= 2 to be split")
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for u in range(graph.left_count):
        nbrs = graph.neighbors_of_left(u)
        k = nbrs.size
        n_test = _per_node_test_count(k, test_fraction)
        picked = rng.choice(k, size=n_test, replace=False)
        mask = np.zeros(k, dtype=bool)
        mask[picked] = True
        test_parts.append(np.column_stack([np.full(n_test, u, dtype=np.int64), nbrs[mask]]))
        train_parts.append(np.column_stack([np.full(k - n_test, u, dtype=np.int64), nbrs[~mask]]))
    return EdgeSplit(np.concatenate(train_parts), np.concatenate(test_parts),
                     seed=seed, test_fraction=test_fraction)


def train_graph_from_split(graph: BipartiteGraph, split: EdgeSplit) -> BipartiteGraph:
    """Graph over the same id space containing only the training edges."""
    return BipartiteGraph.from_edges(graph.left_count, graph.right_count, split.train_edges,
                                     left_labels=graph.left_labels,
                                     right_labels=graph.right_labels)


def _pairs_excluding(graph: BipartiteGraph, excluded: np.ndarray) -> np.ndarray:
    nr = graph.right_count
    drop = np.sort(excluded[:, 0] * nr + excluded[:, 1])
    keep = np.ones(graph.left_count * nr, dtype=bool)
    keep[drop] = False
    codes = np.flatnonzero(keep)
    return np.column_stack([codes // nr, codes % nr])


def candidate_pairs(graph: BipartiteGraph, split: EdgeSplit) -> np.ndarray:
    """All cross-side pairs not in the training set, sorted by (left, right).

    Size is |U|*|V| - |L_train|; contains every test edge.
    """
    return _pairs_excluding(graph, split.train_edges)


def non_edge_pairs(graph: BipartiteGraph) -> np.ndarray:
    """All cross-side pairs without an edge, sorted by (left, right)."""
    return _pairs_excluding(graph, graph.edge_array())


def degree_stats(graph: BipartiteGraph) -> dict:
    """Table-style summary: counts, density, and both degree-average conventions."""
    m = graph.edge_count
    return {
        "left_count": graph.left_count,
        "right_count": graph.right_count,
        "edge_count": m,
        "density": density(graph),
        "mean_degree_all_nodes": 2.0 * m / graph.node_count,
        "mean_left_degree": m / graph.left_count,
        "min_left_degree": int(graph.left_degrees.min()),
    }
