"""Comparison partitioners: Louvain, greedy modularity, eigengap selection."""

from __future__ import annotations

import numpy as np
import networkx as nx

from .graph import SparseGraph
from .spectral import SpectralDecomposition


def _to_networkx(g: SparseGraph) -> nx.Graph:
    gx = nx.Graph()
    gx.add_nodes_from(range(g.n))
    for (u, v), w in zip(g.edges, g.weights):
        gx.add_edge(int(u), int(v), weight=float(w))
    return gx


def _communities_to_labels(communities, n: int) -> np.ndarray:
    # sort by smallest member so labels are deterministic and contiguous
    ordered = sorted((sorted(c) for c in communities), key=lambda c: c[0])
    labels = np.full(n, -1, dtype=np.int64)
    for lab, members in enumerate(ordered):
        labels[list(members)] = lab
    if np.any(labels < 0):
        raise RuntimeError("community cover is not a partition")
    return labels


def louvain(g: SparseGraph, seed: int = 0) -> np.ndarray:
    """Two-phase Louvain at resolution 1, node order shuffled by seed."""
    if g.n == 0:
        raise ValueError("empty graph")
    communities = nx.community.louvain_communities(
        _to_networkx(g), weight="weight", resolution=1.0, seed=int(seed))
    return _communities_to_labels(communities, g.n)


def greedy_modularity(g: SparseGraph) -> np.ndarray:
    """Agglomerative modularity maximization (merge while modularity rises)."""
    if g.n == 0:
        raise ValueError("empty graph")
    if g.num_edges == 0:
        return np.arange(g.n, dtype=np.int64)
    communities = nx.community.greedy_modularity_communities(
        _to_networkx(g), weight="weight")
    return _communities_to_labels(communities, g.n)


def modularity(g: SparseGraph, labels) -> float:
    """Newman modularity of a labeling."""
    lab = np.asarray(labels).reshape(-1)
    if len(lab) != g.n:
        raise ValueError("label length must match node count")
    groups = [np.flatnonzero(lab == val).tolist() for val in np.unique(lab)]
    return float(nx.community.modularity(_to_networkx(g), groups, weight="weight"))


def eigengap_k(dec: SpectralDecomposition) -> int:
    """Cluster count from the largest additive eigenvalue gap.

    Returns the 1-based k maximizing lambda_{k+1} - lambda_k. Distinct from
    the ratio-based scale candidates: this heuristic picks a single k for a
    flat clustering, not a diffusion scale.
    """
    if dec.k_retained < 2:
        raise ValueError("need at least 2 retained modes")
    gaps = np.diff(dec.eigenvalues)
    return int(np.argmax(gaps)) + 1
