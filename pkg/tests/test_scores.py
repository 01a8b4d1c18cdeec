import numpy as np
import pytest
from hypothesis import given, strategies as st

from biplink import (
    BipartiteGraph,
    DivergenceError,
    KatzParams,
    ScoreTable,
    non_edge_pairs,
    rank_and_select,
    score_dist,
    score_katz,
    score_lp,
    score_pa,
    score_path_index,
    score_spm,
    spectral_radius,
)
from tests.conftest import random_bipartite


def full_pairs(graph: BipartiteGraph) -> np.ndarray:
    u, v = np.indices((graph.left_count, graph.right_count))
    return np.stack([u.ravel(), v.ravel()], axis=1)


def walk_weight_sum(graph: BipartiteGraph, u: int, v: int, length: int,
                    normalized: bool) -> float:
    """Enumerate every walk of exactly `length` hops from left u to right v.

    Recursive, revisits allowed; each walk contributes the product of
    1/sqrt(degree) over its interior nodes (or 1 when unnormalized).
    """
    deg = np.concatenate([graph.left_degrees, graph.right_degrees]).astype(float)
    nl = graph.left_count
    adj = [graph.neighbors_of_left(i) + nl for i in range(nl)]
    adj += [graph.neighbors_of_right(j) for j in range(graph.right_count)]
    target = v + nl

    def rec(node, hops_left, weight):
        if hops_left == 0:
            return weight if node == target else 0.0
        total = 0.0
        for nxt in adj[node]:
            w = weight
            if hops_left > 1 and normalized:
                w = w / np.sqrt(deg[nxt])
            total += rec(int(nxt), hops_left - 1, w)
        return total

    return rec(u, length, 1.0)


@pytest.mark.parametrize("seed", range(200))
def test_path_indices_match_walk_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_bipartite(rng, 6, 6, min_edges=1, max_edges=14)
    pairs = full_pairs(g)
    length = [3, 5, 7][seed % 3]
    normalized = seed % 2 == 0
    got = score_path_index(g, pairs, length=length, normalized=normalized)
    for (u, v), s in zip(pairs, got.scores):
        want = walk_weight_sum(g, int(u), int(v), length, normalized)
        assert abs(s - want) < 1e-12, (seed, u, v, length, normalized)


@pytest.mark.parametrize("seed", range(40))
def test_lp_matches_cubed_walk_count(seed):
    rng = np.random.default_rng(10_000 + seed)
    g = random_bipartite(rng, 6, 6, min_edges=1, max_edges=20)
    pairs = full_pairs(g)
    eps = 0.001
    got = score_lp(g, epsilon=eps, pairs=pairs)
    for (u, v), s in zip(pairs, got.scores):
        walks3 = walk_weight_sum(g, int(u), int(v), 3, normalized=False)
        assert abs(s - eps * walks3) < 1e-12


@pytest.mark.parametrize("seed", range(100))
def test_katz_matches_dense_resolvent(seed):
    rng = np.random.default_rng(20_000 + seed)
    g = random_bipartite(rng, 7, 8, min_edges=1, max_edges=24)
    adj = g.adjacency().toarray()
    rho = spectral_radius(g.adjacency())
    alpha = min(0.5 / rho, 10.0) if rho > 0 else 0.5
    n = adj.shape[0]
    resolvent = np.linalg.inv(np.eye(n) - alpha * adj) - np.eye(n)
    pairs = full_pairs(g)
    got = score_katz(g, KatzParams(alpha=alpha, max_length=None, tolerance=1e-15),
                     pairs=pairs)
    nl = g.left_count
    want = resolvent[pairs[:, 0], pairs[:, 1] + nl]
    np.testing.assert_allclose(got.scores, want, atol=1e-8, rtol=0)


def test_katz_truncation_is_a_partial_sum(toy_graph):
    pairs = full_pairs(toy_graph)
    adj = toy_graph.adjacency().toarray()
    alpha, horizon = 0.3, 5
    # sum_{k=1..horizon} alpha^k A^k, dense
    acc = np.zeros_like(adj)
    power = np.eye(adj.shape[0])
    for k in range(1, horizon + 1):
        power = power @ adj
        acc += alpha**k * power
    nl = toy_graph.left_count
    got = score_katz(toy_graph, KatzParams(alpha=alpha, max_length=horizon),
                     pairs=pairs)
    np.testing.assert_allclose(got.scores, acc[pairs[:, 0], pairs[:, 1] + nl],
                               atol=1e-12)


def test_katz_untruncated_refuses_divergent_alpha(toy_graph):
    rho = spectral_radius(toy_graph.adjacency())
    with pytest.raises(DivergenceError, match="alpha"):
        score_katz(toy_graph, KatzParams(alpha=2.0 / rho, max_length=None),
                   pairs=full_pairs(toy_graph))


def test_katz_truncated_tolerates_divergent_alpha(toy_graph):
    # a finite horizon always sums; the guard only bites in the limit
    rho = spectral_radius(toy_graph.adjacency())
    got = score_katz(toy_graph, KatzParams(alpha=2.0 / rho, max_length=4),
                     pairs=full_pairs(toy_graph))
    assert np.isfinite(got.scores).all()


def test_spectral_radius_matches_dense_eig():
    for seed in range(20):
        g = random_bipartite(np.random.default_rng(seed), 6, 6, max_edges=18)
        dense = np.abs(np.linalg.eigvalsh(g.adjacency().toarray())).max()
        assert spectral_radius(g.adjacency()) == pytest.approx(dense, abs=1e-7)


def test_l3_worked_example(toy_graph):
    # u0~v0~u1~v2 and u0~v1~u1~v2, each 1/sqrt(k_v * k_u1) = 1/sqrt(2*3)... but
    # k_v0 = 2, k_u1 = 3 so each path carries 1/sqrt(6); two paths total
    got = score_path_index(toy_graph, np.array([[0, 2]]), length=3)
    assert got.scores[0] == pytest.approx(2.0 / np.sqrt(2.0 * 3.0), abs=1e-12)


def test_lp_pa_dist_worked_examples(toy_graph):
    pairs = np.array([[0, 2]])
    assert score_lp(toy_graph, 0.001, pairs=pairs).scores[0] == pytest.approx(
        0.002, abs=1e-12)
    assert score_pa(toy_graph, pairs=pairs).scores[0] == 2.0 * 1.0
    assert score_dist(toy_graph, pairs=pairs).scores[0] == pytest.approx(1.0 / 3.0)


def test_dist_unreachable_scores_zero():
    g = BipartiteGraph.from_edges(2, 2, [(0, 0), (1, 1)])
    got = score_dist(g, pairs=np.array([[0, 1], [0, 0]]))
    assert got.scores[0] == 0.0
    assert got.scores[1] == 1.0


@given(st.integers(0, 300))
def test_path_scores_nonnegative_and_deterministic(seed):
    rng = np.random.default_rng(seed)
    g = random_bipartite(rng, 5, 5, max_edges=12)
    pairs = full_pairs(g)
    a = score_path_index(g, pairs, length=5)
    b = score_path_index(g, pairs, length=5)
    assert np.array_equal(a.scores, b.scores)
    assert (a.scores >= 0).all()


@given(st.integers(0, 300))
def test_pair_order_is_respected(seed):
    # scores line up with pair rows whatever their order
    rng = np.random.default_rng(seed)
    g = random_bipartite(rng, 5, 5, min_edges=2, max_edges=12)
    pairs = full_pairs(g)
    perm = rng.permutation(pairs.shape[0])
    direct = score_katz(g, KatzParams(alpha=0.05), pairs=pairs).scores[perm]
    shuffled = score_katz(g, KatzParams(alpha=0.05), pairs=pairs[perm]).scores
    assert np.array_equal(direct, shuffled)


def test_small_batch_size_changes_nothing(toy_graph):
    pairs = full_pairs(toy_graph)
    a = score_path_index(toy_graph, pairs, length=3, batch_size=1)
    b = score_path_index(toy_graph, pairs, length=3, batch_size=1024)
    np.testing.assert_array_equal(a.scores, b.scores)


@pytest.mark.parametrize("scorer", [
    score_path_index,
    lambda g, pairs=None: score_katz(g, pairs=pairs),
    lambda g, pairs=None: score_lp(g, 0.001, pairs),
    score_pa,
    score_dist,
    lambda g, pairs=None: score_spm(g, pairs=pairs),
])
def test_omitted_pairs_default_to_all_non_edges(scorer, toy_graph):
    explicit = scorer(toy_graph, non_edge_pairs(toy_graph))
    default = scorer(toy_graph)
    np.testing.assert_array_equal(default.pairs, explicit.pairs)
    np.testing.assert_array_equal(default.scores, explicit.scores)
    assert not toy_graph.has_edges(default.pairs).any()


def test_rank_and_select_orders_and_breaks_ties(toy_graph):
    table = ScoreTable(
        method="toy",
        pairs=np.array([[1, 0], [0, 1], [0, 0], [2, 2]]),
        scores=np.array([0.5, 0.9, 0.5, 0.1]),
        graph_fingerprint=toy_graph.fingerprint())
    top = rank_and_select(table, 3)
    assert top.tolist() == [[0, 1], [0, 0], [1, 0]]
    with pytest.raises(ValueError):
        rank_and_select(table, 5)


def test_score_table_round_trip(tmp_path, toy_graph):
    t = score_pa(toy_graph, pairs=full_pairs(toy_graph))
    p = str(tmp_path / "pa.tsv")
    t.save(p)
    back = ScoreTable.load(p)
    assert back.method == "pa"
    assert back.graph_fingerprint == toy_graph.fingerprint()
    np.testing.assert_array_equal(back.pairs, t.pairs)
    np.testing.assert_array_equal(back.scores, t.scores)


def test_score_table_rejects_nan():
    with pytest.raises(ValueError):
        ScoreTable(method="pa", pairs=np.array([[0, 0]]),
                   scores=np.array([np.nan]), graph_fingerprint="x")


def test_even_or_short_lengths_rejected(toy_graph):
    for bad in (2, 4, 1, 0):
        with pytest.raises(ValueError):
            score_path_index(toy_graph, np.array([[0, 0]]), length=bad)
