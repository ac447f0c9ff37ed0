import numpy as np
import pytest

from slod.graph import SparseGraph


def clique_edge_list(nodes):
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


def make_graph(n, pairs):
    pairs = sorted((min(u, v), max(u, v)) for u, v in pairs)
    return SparseGraph(n, np.array(pairs, dtype=np.int64).reshape(-1, 2),
                       np.ones(len(pairs)))


@pytest.fixture(scope="session")
def barbell_graph():
    """Two 5-cliques joined by a single bridge edge."""
    edges = clique_edge_list(list(range(5))) + clique_edge_list(list(range(5, 10)))
    edges.append((4, 5))
    return make_graph(10, edges)


@pytest.fixture(scope="session")
def clique_graph():
    return make_graph(10, clique_edge_list(list(range(10))))


@pytest.fixture(scope="session")
def path3_graph():
    return make_graph(3, [(0, 1), (1, 2)])


def random_ball_points(rng, n, dim, max_norm=0.9):
    """Uniform directions with radii up to max_norm."""
    raw = rng.normal(size=(n, dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    radii = max_norm * rng.uniform(size=(n, 1)) ** (1.0 / dim)
    return raw * radii
