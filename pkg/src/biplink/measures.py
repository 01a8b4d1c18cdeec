"""Per-node topological measures on the bipartite graph as one undirected graph.

All six measures live in a single NodeMeasures container ordered as
MEASURE_NAMES. Shortest-path work (closeness, betweenness) shares one
level-synchronous BFS sweep per source node; power iterations are plain
dense-vector loops against the sparse adjacency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DivergenceError, EmptyGraphError
from .graph import BipartiteGraph
from .scores import spectral_radius

MEASURE_NAMES = ("pagerank", "degree_centrality", "closeness", "betweenness",
                 "eigenvector_centrality", "katz_centrality")


@dataclass(frozen=True)
class MeasureConfig:
    # katz_alpha None picks 0.5/spectral_radius, convergent on any graph
    damping: float = 0.85
    pagerank_tol: float = 1e-9
    eigen_tol: float = 1e-8
    katz_alpha: float | None = None
    fixed_point_tol: float = 1e-12
    max_iter: int = 10_000


@dataclass(frozen=True)
class NodeMeasures:
    """One value per node (left ids first, then right ids) for each measure."""

    pagerank: np.ndarray
    degree_centrality: np.ndarray
    closeness: np.ndarray
    betweenness: np.ndarray
    eigenvector_centrality: np.ndarray
    katz_centrality: np.ndarray

    def matrix(self) -> np.ndarray:
        """(N, 6) array with columns ordered as MEASURE_NAMES."""
        return np.column_stack([getattr(self, name) for name in MEASURE_NAMES])


def pagerank(graph: BipartiteGraph, damping: float = 0.85, tol: float = 1e-9,
             max_iter: int = 10_000) -> np.ndarray:
    """Power iteration with uniform teleport; dangling mass redistributed uniformly."""
    n = graph.node_count
    adj = graph.adjacency()
    degs = np.asarray(adj.sum(axis=1)).ravel()
    dangling = degs == 0.0
    inv_deg = np.zeros(n)
    inv_deg[~dangling] = 1.0 / degs[~dangling]
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        spread = adj.T @ (x * inv_deg)
        spread += x[dangling].sum() / n
        new = (1.0 - damping) / n + damping * spread
        if np.abs(new - x).sum() < tol:
            return new
        x = new
    raise ConvergenceError(f"pagerank did not reach L1 tolerance {tol} in {max_iter} iterations")


def degree_centrality(graph: BipartiteGraph) -> np.ndarray:
    """k / (N - 1) over the combined node set."""
    n = graph.node_count
    if n < 2:
        raise EmptyGraphError("degree centrality needs at least two nodes")
    return np.concatenate([graph.left_degrees, graph.right_degrees]) / (n - 1.0)


def _bfs_levels(adj, source, n):
    """Level sets and shortest-path counts sigma from one source."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n, dtype=np.float64)
    dist[source] = 0
    sigma[source] = 1.0
    frontier = np.zeros(n, dtype=np.float64)
    frontier[source] = 1.0
    levels = [np.array([source])]
    d = 0
    while True:
        pushed = adj @ frontier
        unseen = dist < 0
        reached = unseen & (pushed > 0)
        if not reached.any():
            break
        d += 1
        dist[reached] = d
        sigma[reached] = pushed[reached]
        frontier = np.where(reached, pushed, 0.0)
        levels.append(np.flatnonzero(reached))
    return dist, sigma, levels


def closeness_and_betweenness(graph: BipartiteGraph):
    """Wasserman-Faust closeness and exact Brandes betweenness in one sweep.

    Closeness of u with r reachable nodes (self included) and distance sum S:
      (r-1)/S * (r-1)/(N-1), 0 for isolated nodes.
    Betweenness is the undirected unnormalized count: each unordered pair
    {s,t} contributes its pass-through fraction once.
    """
    adj = graph.adjacency()
    n = graph.node_count
    close = np.zeros(n)
    between = np.zeros(n)
    for s in range(n):
        dist, sigma, levels = _bfs_levels(adj, s, n)
        reachable = dist >= 0
        r = int(reachable.sum())
        total = dist[reachable].sum()
        if r > 1 and total > 0:
            close[s] = ((r - 1) / total) * ((r - 1) / (n - 1))
        # dependency accumulation, deepest level first
        delta = np.zeros(n)
        for level in reversed(levels[1:]):
            coeff = np.zeros(n)
            coeff[level] = (1.0 + delta[level]) / sigma[level]
            pulled = adj @ coeff
            prev_mask = dist == (dist[level[0]] - 1)
            delta[prev_mask] += sigma[prev_mask] * pulled[prev_mask]
        delta[s] = 0.0
        between += delta
    return close, between / 2.0


def eigenvector_centrality(graph: BipartiteGraph, tol: float = 1e-8,
                           max_iter: int = 10_000) -> np.ndarray:
    """Dominant eigenvector of A, unit L2 norm, largest-magnitude entry positive.

    Iterates on A + I: same eigenvectors, but the shift breaks the +/-lambda
    symmetry of bipartite spectra that stalls iteration on A itself. The
    returned vector is checked against A directly (residual in sup norm).
    """
    n = graph.node_count
    adj = graph.adjacency()
    x = np.full(n, 1.0 / np.sqrt(n))
    # Stop on the residual of A itself, not on iterate change: with a large
    # leading eigenvalue the iterate can settle to 1e-8 while A*x - lam*x is
    # still above the 1e-6 contract.
    for _ in range(max_iter):
        ax = adj @ x
        lam = float(x @ ax)
        if np.abs(ax - lam * x).max() < tol:
            break
        y = ax + x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            raise ConvergenceError("eigenvector iteration collapsed to zero")
        x = y / norm
    else:
        raise ConvergenceError(
            f"eigenvector centrality did not converge in {max_iter} iterations")
    residual = np.abs(adj @ x - lam * x).max()
    if residual >= 1e-6:
        raise ConvergenceError(f"eigenvector residual {residual:.3g} exceeds 1e-6")
    if x[np.abs(x).argmax()] < 0:
        x = -x
    return x


def katz_centrality(graph: BipartiteGraph, alpha: float | None = None, tol: float = 1e-12,
                    max_iter: int = 10_000) -> np.ndarray:
    """Fixed point of x = alpha*A*x + 1, guarded by the spectral-radius bound.

    alpha=None adapts to the graph (half the admissible maximum); an explicit
    alpha at or beyond 1/rho has no fixed point and raises.
    """
    adj = graph.adjacency()
    rho = spectral_radius(adj)
    if alpha is None:
        alpha = 0.5 / rho if rho > 0 else 0.5
    if alpha * rho >= 1.0:
        raise DivergenceError(
            f"alpha={alpha} does not converge: spectral radius {rho:.6g} "
            f"requires alpha < {1.0 / rho:.6g}")
    x = np.ones(graph.node_count)
    for _ in range(max_iter):
        new = alpha * (adj @ x) + 1.0
        if np.abs(new - x).max() < tol:
            return new
        x = new
    raise ConvergenceError(f"katz centrality did not converge in {max_iter} iterations")


def compute_node_measures(graph: BipartiteGraph,
                          config: MeasureConfig = MeasureConfig()) -> NodeMeasures:
    """All six measures on the train graph; see MEASURE_NAMES for order."""
    if graph.edge_count == 0:
        raise EmptyGraphError("measures need at least one edge")
    close, between = closeness_and_betweenness(graph)
    return NodeMeasures(
        pagerank=pagerank(graph, config.damping, config.pagerank_tol, config.max_iter),
        degree_centrality=degree_centrality(graph),
        closeness=close,
        betweenness=between,
        eigenvector_centrality=eigenvector_centrality(graph, config.eigen_tol, config.max_iter),
        katz_centrality=katz_centrality(graph, config.katz_alpha, config.fixed_point_tol,
                                        config.max_iter),
    )
