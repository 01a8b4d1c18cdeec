import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from biplink import BipartiteGraph, load_edge_list

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

DATA_PATH = os.path.join(os.path.dirname(__file__), "..", "data", "ml-100k", "u.data")


def random_bipartite(rng: np.random.Generator, max_left: int = 6, max_right: int = 6,
                     min_edges: int = 1, max_edges: int | None = None) -> BipartiteGraph:
    """Random graph with no isolated sides, for oracle sweeps."""
    nl = int(rng.integers(1, max_left + 1))
    nr = int(rng.integers(1, max_right + 1))
    cap = nl * nr
    if max_edges is None:
        max_edges = cap
    m = int(rng.integers(min(min_edges, cap), min(max_edges, cap) + 1))
    codes = rng.choice(cap, size=m, replace=False)
    edges = np.stack([codes // nr, codes % nr], axis=1)
    return BipartiteGraph.from_edges(nl, nr, edges)


@pytest.fixture
def toy_graph() -> BipartiteGraph:
    # u0-{v0,v1}, u1-{v0,v1,v2}; the one worked through in the score examples
    return BipartiteGraph.from_edges(2, 3, [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)])


@pytest.fixture(scope="session")
def movielens() -> BipartiteGraph:
    if not os.path.exists(DATA_PATH):
        pytest.skip("MovieLens data missing; run scripts/fetch_movielens.py first")
    return load_edge_list(DATA_PATH, "movielens_u_data")
