import numpy as np
import pytest
from hypothesis import given, strategies as st

from biplink import (
    BipartiteGraph,
    ConvergenceError,
    DivergenceError,
    MEASURE_NAMES,
    MeasureConfig,
    closeness_and_betweenness,
    compute_node_measures,
    degree_centrality,
    eigenvector_centrality,
    katz_centrality,
    pagerank,
)
from tests.conftest import random_bipartite


def bfs_distances(adj, source):
    n = adj.shape[0]
    dist = np.full(n, -1)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u]):
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return dist


def betweenness_oracle(adj):
    """Count shortest paths through each node, pair by pair. O(N^3) and proud."""
    n = adj.shape[0]
    dist = np.array([bfs_distances(adj, s) for s in range(n)])
    sigma = np.zeros((n, n))
    for s in range(n):
        order = np.argsort(dist[s])
        sigma[s, s] = 1.0
        for t in order:
            if dist[s, t] <= 0:
                continue
            preds = [p for p in np.flatnonzero(adj[t]) if dist[s, p] == dist[s, t] - 1]
            sigma[s, t] = sum(sigma[s, p] for p in preds)
    bc = np.zeros(n)
    for s in range(n):
        for t in range(n):
            if s == t or dist[s, t] < 0:
                continue
            for v in range(n):
                if v in (s, t) or dist[s, v] < 0 or dist[v, t] < 0:
                    continue
                if dist[s, v] + dist[v, t] == dist[s, t]:
                    bc[v] += sigma[s, v] * sigma[v, t] / sigma[s, t]
    return bc / 2.0


def closeness_oracle(adj):
    n = adj.shape[0]
    out = np.zeros(n)
    for v in range(n):
        dist = bfs_distances(adj, v)
        reach = dist >= 0
        r = int(reach.sum())
        total = dist[reach].sum()
        if r > 1 and total > 0:
            out[v] = ((r - 1) / total) * ((r - 1) / (n - 1))
    return out


@pytest.mark.parametrize("seed", range(50))
def test_betweenness_matches_path_counting_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_bipartite(rng, 5, 5, min_edges=2, max_edges=16)
    adj = g.adjacency().toarray()
    _, got = closeness_and_betweenness(g)
    np.testing.assert_allclose(got, betweenness_oracle(adj), atol=1e-10)


@pytest.mark.parametrize("seed", range(30))
def test_closeness_matches_bfs_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    g = random_bipartite(rng, 5, 5, min_edges=2, max_edges=16)
    got, _ = closeness_and_betweenness(g)
    np.testing.assert_allclose(got, closeness_oracle(g.adjacency().toarray()),
                               atol=1e-12)


def test_star_center_betweenness():
    # K_{1,4}: all 6 two-leaf pairs route through the hub
    g = BipartiteGraph.from_edges(1, 4, [(0, j) for j in range(4)])
    _, bc = closeness_and_betweenness(g)
    assert bc[0] == pytest.approx(6.0)
    np.testing.assert_allclose(bc[1:], 0.0)


def test_pagerank_sums_to_one_and_is_uniform_on_regular_graphs():
    g = BipartiteGraph.from_edges(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    pr = pagerank(g)
    assert pr.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(pr, 0.25, atol=1e-9)


@given(st.integers(0, 200))
def test_pagerank_is_a_distribution(seed):
    g = random_bipartite(np.random.default_rng(seed), 6, 6, max_edges=20)
    pr = pagerank(g)
    assert pr.sum() == pytest.approx(1.0, abs=1e-8)
    assert (pr >= 0).all()


def test_pagerank_handles_isolated_nodes():
    # right node 2 never appears; its dangling mass must be redistributed
    g = BipartiteGraph.from_edges(2, 3, [(0, 0), (1, 1)])
    pr = pagerank(g)
    assert pr.sum() == pytest.approx(1.0, abs=1e-9)
    assert pr.min() > 0


@given(st.integers(0, 100))
def test_pagerank_respects_relabeling(seed):
    rng = np.random.default_rng(seed)
    g = random_bipartite(rng, 5, 5, min_edges=3, max_edges=14)
    perm_l = rng.permutation(g.left_count)
    perm_r = rng.permutation(g.right_count)
    edges = g.edge_array()
    relabeled = BipartiteGraph.from_edges(
        g.left_count, g.right_count,
        np.column_stack([perm_l[edges[:, 0]], perm_r[edges[:, 1]]]))
    a = pagerank(g)
    b = pagerank(relabeled)
    nl = g.left_count
    np.testing.assert_allclose(a[:nl], b[:nl][perm_l], atol=1e-7)
    np.testing.assert_allclose(a[nl:], b[nl:][perm_r], atol=1e-7)


def test_degree_centrality_normalization(toy_graph):
    dc = degree_centrality(toy_graph)
    n = toy_graph.node_count
    want = np.array([2, 3, 2, 2, 1]) / (n - 1)
    np.testing.assert_allclose(dc, want)


@pytest.mark.parametrize("seed", range(25))
def test_eigenvector_centrality_matches_dense_eig(seed):
    rng = np.random.default_rng(3000 + seed)
    g = random_bipartite(rng, 5, 5, min_edges=4, max_edges=16)
    adj = g.adjacency().toarray()
    # restrict to connected graphs: the dominant eigenvector is then unique
    if (bfs_distances(adj, 0) < 0).any():
        pytest.skip("disconnected draw")
    lam, vecs = np.linalg.eigh(adj)
    want = vecs[:, -1]
    if want[np.abs(want).argmax()] < 0:
        want = -want
    got = eigenvector_centrality(g)
    np.testing.assert_allclose(got, want, atol=1e-6)


def test_eigenvector_residual_contract():
    g = random_bipartite(np.random.default_rng(4), 6, 6, min_edges=8, max_edges=20)
    x = eigenvector_centrality(g)
    adj = g.adjacency()
    lam = float(x @ (adj @ x))
    assert np.abs(adj @ x - lam * x).max() < 1e-6
    assert np.linalg.norm(x) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(25))
def test_katz_centrality_solves_fixed_point(seed):
    rng = np.random.default_rng(5000 + seed)
    g = random_bipartite(rng, 5, 5, min_edges=2, max_edges=14)
    adj = g.adjacency().toarray()
    rho = np.abs(np.linalg.eigvalsh(adj)).max()
    alpha = 0.4 / rho if rho > 0 else 0.4
    got = katz_centrality(g, alpha=alpha)
    want = np.linalg.solve(np.eye(adj.shape[0]) - alpha * adj, np.ones(adj.shape[0]))
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_katz_centrality_auto_alpha_is_half_admissible(toy_graph):
    from biplink import spectral_radius

    rho = spectral_radius(toy_graph.adjacency())
    np.testing.assert_allclose(katz_centrality(toy_graph),
                               katz_centrality(toy_graph, alpha=0.5 / rho),
                               atol=1e-12)


def test_katz_centrality_rejects_divergent_alpha(toy_graph):
    from biplink import spectral_radius

    rho = spectral_radius(toy_graph.adjacency())
    with pytest.raises(DivergenceError):
        katz_centrality(toy_graph, alpha=1.5 / rho)


def test_compute_node_measures_shape(toy_graph):
    nm = compute_node_measures(toy_graph)
    mat = nm.matrix()
    assert mat.shape == (toy_graph.node_count, len(MEASURE_NAMES))
    assert np.isfinite(mat).all()


def test_measure_config_threads_through(toy_graph):
    a = compute_node_measures(toy_graph, MeasureConfig(damping=0.85))
    b = compute_node_measures(toy_graph, MeasureConfig(damping=0.5))
    assert not np.allclose(a.pagerank, b.pagerank)
    np.testing.assert_allclose(a.degree_centrality, b.degree_centrality)
