"""Graph construction and synthetic benchmarks.

Covers the weighted undirected graph container, the hierarchical stochastic
block model with a planted macro/meso/micro partition, k-nearest-neighbour
graphs over ball points, normalized Laplacians, low-distortion tree
embeddings into the 2-D ball, and the Kesten-Stigum signal-to-noise ratio.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.csgraph import connected_components, dijkstra

from .geometry import _mobius, check_point, distance

# Expected-degree rate ladder (units of 1/N) at the reference signal ratio.
# Ratios between levels are fixed at 80:16:4:1; the signal ratio scales all
# four rates together, so BASE_SIGNAL_RATIO reproduces the ladder verbatim.
BASE_RATE_LADDER = (40.0, 8.0, 2.0, 0.5)
BASE_SIGNAL_RATIO = 40.0


@dataclass
class SparseGraph:
    """Weighted undirected graph; each edge stored once with u < v."""

    n: int
    edges: np.ndarray    # (m, 2) int
    weights: np.ndarray  # (m,) float, positive

    def __post_init__(self) -> None:
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        if len(self.edges) != len(self.weights):
            raise ValueError("edges and weights differ in length")
        if len(self.edges):
            u, v = self.edges[:, 0], self.edges[:, 1]
            if u.min() < 0 or v.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(u >= v):
                raise ValueError("edges must satisfy u < v (no self-loops)")
            keys = u * self.n + v
            if len(np.unique(keys)) != len(keys):
                raise ValueError("duplicate edges")
            if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
                raise ValueError("edge weights must be positive and finite")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric weighted adjacency matrix."""
        if self.num_edges == 0:
            return sparse.csr_matrix((self.n, self.n))
        u, v = self.edges[:, 0], self.edges[:, 1]
        a = sparse.coo_matrix((self.weights, (u, v)), shape=(self.n, self.n))
        return (a + a.T).tocsr()

    def degrees(self) -> np.ndarray:
        """Weighted degree of every node."""
        deg = np.zeros(self.n)
        if self.num_edges:
            np.add.at(deg, self.edges[:, 0], self.weights)
            np.add.at(deg, self.edges[:, 1], self.weights)
        return deg


@dataclass(frozen=True)
class HsbmSpec:
    """Three-level hierarchical SBM with nested equal-size blocks.

    Rates are expected-degree rates in units of 1/n: a pair of nodes whose
    finest shared level is `within` (same micro block) connects with
    probability rate_within / n, and so on down to `between` for pairs in
    different macro blocks.
    """

    n: int = 1024
    blocks: tuple = (2, 8, 64)  # macro, meso, micro block counts
    rate_within: float = BASE_RATE_LADDER[0]
    rate_meso: float = BASE_RATE_LADDER[1]
    rate_macro: float = BASE_RATE_LADDER[2]
    rate_between: float = BASE_RATE_LADDER[3]
    signal_ratio: float = BASE_SIGNAL_RATIO

    def __post_init__(self) -> None:
        n_macro, n_meso, n_micro = self.blocks
        if not (0 < n_macro <= n_meso <= n_micro):
            raise ValueError("block counts must be positive and nested")
        if n_meso % n_macro or n_micro % n_meso or self.n % n_micro:
            raise ValueError(
                f"block counts {self.blocks} must nest and divide n={self.n}"
            )
        rates = self.rate_ladder()
        if any(r < 0 or not np.isfinite(r) for r in rates):
            raise ValueError("rates must be nonnegative and finite")
        if not (rates[0] >= rates[1] >= rates[2] >= rates[3]):
            raise ValueError("rates must be ordered within >= meso >= macro >= between")
        if rates[0] / self.n > 1.0:
            raise ValueError("rate_within exceeds n (probability > 1)")

    @classmethod
    def with_signal_ratio(cls, n: int = 1024, signal_ratio: float = BASE_SIGNAL_RATIO,
                          blocks: tuple = (2, 8, 64)) -> "HsbmSpec":
        """Spec with all four rates scaled by signal_ratio / BASE_SIGNAL_RATIO."""
        if signal_ratio <= 0:
            raise ValueError("signal_ratio must be positive")
        s = signal_ratio / BASE_SIGNAL_RATIO
        w, me, ma, b = (s * r for r in BASE_RATE_LADDER)
        return cls(n=n, blocks=blocks, rate_within=w, rate_meso=me,
                   rate_macro=ma, rate_between=b, signal_ratio=signal_ratio)

    def rate_ladder(self) -> tuple:
        return (self.rate_within, self.rate_meso, self.rate_macro, self.rate_between)

    def probabilities(self) -> tuple:
        """Per-pair edge probabilities (within, meso, macro, between)."""
        return tuple(r / self.n for r in self.rate_ladder())

    def level_sizes(self) -> tuple:
        """Nodes per (macro, meso, micro) block."""
        return tuple(self.n // b for b in self.blocks)


def planted_partitions(spec: HsbmSpec) -> dict:
    """Planted labels per level, nodes assigned to blocks contiguously."""
    idx = np.arange(spec.n)
    s_macro, s_meso, s_micro = spec.level_sizes()
    return {
        "macro": idx // s_macro,
        "meso": idx // s_meso,
        "micro": idx // s_micro,
    }


def generate_hsbm(spec: HsbmSpec, seed: int):
    """Sample a graph from the HSBM; returns (graph, partitions dict).

    Every unordered node pair is sampled once with the probability of the
    finest level the pair shares. Identical (spec, seed) gives an identical
    edge list.
    """
    rng = np.random.default_rng(seed)
    n_macro, n_meso, n_micro = spec.blocks
    size = spec.n // n_micro
    p_w, p_me, p_ma, p_b = spec.probabilities()
    meso_of = np.arange(n_micro) // (n_micro // n_meso)
    macro_of = np.arange(n_micro) // (n_micro // n_macro)
    iu, ju = np.triu_indices(size, k=1)

    us, vs = [], []
    for a in range(n_micro):
        for b in range(a, n_micro):
            if a == b:
                p, npairs = p_w, len(iu)
            elif meso_of[a] == meso_of[b]:
                p, npairs = p_me, size * size
            elif macro_of[a] == macro_of[b]:
                p, npairs = p_ma, size * size
            else:
                p, npairs = p_b, size * size
            if p <= 0.0 or npairs == 0:
                continue
            m = int(rng.binomial(npairs, p))
            if m == 0:
                continue
            pick = rng.choice(npairs, size=m, replace=False)
            if a == b:
                us.append(a * size + iu[pick])
                vs.append(a * size + ju[pick])
            else:
                us.append(a * size + pick // size)
                vs.append(b * size + pick % size)

    if us:
        u = np.concatenate(us)
        v = np.concatenate(vs)
        order = np.lexsort((v, u))
        edges = np.column_stack([u[order], v[order]])
        weights = np.ones(len(edges))
    else:
        edges = np.empty((0, 2), dtype=np.int64)
        weights = np.empty(0)
    return SparseGraph(spec.n, edges, weights), planted_partitions(spec)


def expected_edge_count(spec: HsbmSpec) -> float:
    """Closed-form expected number of edges under the spec."""
    n_macro, n_meso, n_micro = spec.blocks
    size = spec.n // n_micro
    p_w, p_me, p_ma, p_b = spec.probabilities()
    within_pairs = n_micro * size * (size - 1) / 2
    micro_per_meso = n_micro // n_meso
    micro_per_macro = n_micro // n_macro
    meso_pairs = n_meso * micro_per_meso * (micro_per_meso - 1) / 2 * size * size
    macro_block_pairs = n_macro * micro_per_macro * (micro_per_macro - 1) / 2
    macro_pairs = (macro_block_pairs - n_meso * micro_per_meso * (micro_per_meso - 1) / 2) * size * size
    all_block_pairs = n_micro * (n_micro - 1) / 2
    between_pairs = (all_block_pairs - macro_block_pairs) * size * size
    return (within_pairs * p_w + meso_pairs * p_me
            + macro_pairs * p_ma + between_pairs * p_b)


def expected_level_degrees(spec: HsbmSpec) -> dict:
    """Expected (d_in, d_out) per hierarchy level for a single node."""
    s_macro, s_meso, s_micro = spec.level_sizes()
    p_w, p_me, p_ma, p_b = spec.probabilities()
    d_micro = (s_micro - 1) * p_w
    d_meso_extra = (s_meso - s_micro) * p_me
    d_macro_extra = (s_macro - s_meso) * p_ma
    d_between = (spec.n - s_macro) * p_b
    return {
        "macro": (d_micro + d_meso_extra + d_macro_extra, d_between),
        "meso": (d_micro + d_meso_extra, d_macro_extra + d_between),
        "micro": (d_micro, d_meso_extra + d_macro_extra + d_between),
    }


def ks_snr(d_in: float, d_out: float) -> float:
    """Kesten-Stigum ratio (d_in - d_out)^2 / (2 (d_in + d_out)).

    Detection of a planted 2-block partition is information-theoretically
    possible when the ratio reaches 1.
    """
    if d_in < 0 or d_out < 0:
        raise ValueError("degrees must be nonnegative")
    if d_in + d_out == 0:
        raise ValueError("both degrees are zero")
    return (d_in - d_out) ** 2 / (2.0 * (d_in + d_out))


def largest_connected_component(g: SparseGraph):
    """Largest component as a reindexed graph plus the old -> new index map.

    The map is -1 for dropped nodes. Ties between equal-size components go
    to the component containing the smallest original node id.
    """
    if g.n == 0:
        raise ValueError("empty graph")
    _, labels = connected_components(g.adjacency(), directed=False)
    counts = np.bincount(labels)
    best_labels = np.flatnonzero(counts == counts.max())
    # label of the tied component whose first (= smallest) node id is least
    best = min(best_labels, key=lambda lab: int(np.argmax(labels == lab)))
    keep = labels == best
    index_map = np.full(g.n, -1, dtype=np.int64)
    index_map[keep] = np.arange(int(keep.sum()))
    if g.num_edges:
        mask = keep[g.edges[:, 0]] & keep[g.edges[:, 1]]
        edges = index_map[g.edges[mask]]
        weights = g.weights[mask]
    else:
        edges = np.empty((0, 2), dtype=np.int64)
        weights = np.empty(0)
    return SparseGraph(int(keep.sum()), edges, weights), index_map


def knn_graph(points, k: int, bandwidth: float | None = None,
              chunk: int = 512) -> SparseGraph:
    """k-NN graph over ball points with Gaussian kernel weights.

    Each node selects its k nearest neighbours by geodesic distance and the
    edge set is the union over both directions, so degrees are >= k before
    symmetrization. Weights are exp(-d^2 / (2 tau^2)); when bandwidth is
    None, tau is the median of the selected edge distances.
    """
    pts = check_point(points, "points")
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least 2 points")
    n = len(pts)
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    if bandwidth is not None and bandwidth <= 0:
        raise ValueError("bandwidth must be positive")

    rows, cols, dists = [], [], []
    for start in range(0, n, chunk):
        block = pts[start:start + chunk]
        d = distance(block[:, None, :], pts[None, :, :])
        for i in range(len(block)):
            row = d[i].copy()
            row[start + i] = np.inf
            nbr = np.argpartition(row, k - 1)[:k]
            nbr = nbr[np.argsort(row[nbr], kind="stable")]
            rows.append(np.full(k, start + i))
            cols.append(nbr)
            dists.append(row[nbr])
    u = np.concatenate(rows)
    v = np.concatenate(cols)
    d = np.concatenate(dists)

    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = lo * n + hi
    uniq, first = np.unique(keys, return_index=True)
    eu, ev, ed = lo[first], hi[first], d[first]

    tau = bandwidth if bandwidth is not None else float(np.median(ed))
    if tau <= 0:
        raise ValueError("auto bandwidth failed: median edge distance is zero")
    # floor guards against underflow to an (invalid) exact zero weight
    w = np.maximum(np.exp(-(ed ** 2) / (2.0 * tau * tau)), np.finfo(float).tiny)
    order = np.lexsort((ev, eu))
    return SparseGraph(n, np.column_stack([eu[order], ev[order]]), w[order])


def normalized_laplacian(g: SparseGraph) -> sparse.csr_matrix:
    """Symmetric normalized Laplacian I - D^{-1/2} W D^{-1/2}."""
    deg = g.degrees()
    if np.any(deg <= 0):
        bad = np.flatnonzero(deg <= 0)[:5]
        raise ValueError(f"isolated nodes present (e.g. {bad.tolist()})")
    dinv = sparse.diags(1.0 / np.sqrt(deg))
    lap = sparse.identity(g.n, format="csr") - dinv @ g.adjacency() @ dinv
    return ((lap + lap.T) * 0.5).tocsr()


def regularized_normalized_laplacian(g: SparseGraph,
                                     regularizer: float | None = None) -> sparse.csr_matrix:
    """Degree-regularized variant I - (D + tau I)^{-1/2} W (D + tau I)^{-1/2}.

    tau defaults to the mean degree. Regularization suppresses the localized
    eigenvectors that dangling trees create in sparse graphs, which is what
    makes spectral clustering usable near the detection threshold; it is an
    implementation choice of the clustering path, not of the diffusion
    operator.
    """
    deg = g.degrees()
    if np.any(deg <= 0):
        raise ValueError("isolated nodes present")
    tau = float(deg.mean()) if regularizer is None else float(regularizer)
    if tau < 0:
        raise ValueError("regularizer must be nonnegative")
    dinv = sparse.diags(1.0 / np.sqrt(deg + tau))
    lap = sparse.identity(g.n, format="csr") - dinv @ g.adjacency() @ dinv
    return ((lap + lap.T) * 0.5).tocsr()


@dataclass
class Tree:
    """Rooted tree over nodes 0..n-1 via parent pointers.

    parent[root] == -1; weight[i] is the length of the edge to the parent
    and is ignored at the root.
    """

    parent: np.ndarray
    weight: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.parent = np.asarray(self.parent, dtype=np.int64).reshape(-1)
        n = len(self.parent)
        if n == 0:
            raise ValueError("tree must have at least one node")
        if self.weight is None:
            self.weight = np.ones(n)
        self.weight = np.asarray(self.weight, dtype=float).reshape(-1)
        if len(self.weight) != n:
            raise ValueError("weight length must match node count")
        roots = np.flatnonzero(self.parent == -1)
        if len(roots) != 1:
            raise ValueError(f"tree must have exactly one root, found {len(roots)}")
        if np.any((self.parent < -1) | (self.parent >= n)):
            raise ValueError("parent index out of range")
        non_root = self.parent != -1
        if np.any(self.weight[non_root] <= 0) or not np.all(np.isfinite(self.weight[non_root])):
            raise ValueError("edge weights must be positive and finite")
        # reachability doubles as the acyclicity check
        depth = self.depths()
        if np.any(depth < 0):
            raise ValueError("input is not a tree (cycle or unreachable node)")

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def root(self) -> int:
        return int(np.flatnonzero(self.parent == -1)[0])

    def depths(self) -> np.ndarray:
        """Hop count from the root; -1 marks nodes on a parent cycle."""
        n = self.n
        depth = np.full(n, -1, dtype=np.int64)
        for start in range(n):
            if depth[start] >= 0:
                continue
            chain: list = []
            seen = set()
            node = start
            while node != -1 and depth[node] < 0 and node not in seen:
                chain.append(node)
                seen.add(node)
                node = int(self.parent[node])
            if node != -1 and depth[node] < 0:
                continue  # walk re-entered the chain: cycle, leave at -1
            for u in reversed(chain):
                p = int(self.parent[u])
                depth[u] = 0 if p == -1 else depth[p] + 1
        return depth

    def children(self) -> list:
        """Child lists indexed by node."""
        kids: list = [[] for _ in range(self.n)]
        for u, p in enumerate(self.parent):
            if p != -1:
                kids[int(p)].append(u)
        return kids

    def adjacency(self) -> sparse.csr_matrix:
        non_root = np.flatnonzero(self.parent != -1)
        u = np.minimum(non_root, self.parent[non_root])
        v = np.maximum(non_root, self.parent[non_root])
        a = sparse.coo_matrix((self.weight[non_root], (u, v)), shape=(self.n, self.n))
        return (a + a.T).tocsr()

    def to_graph(self) -> SparseGraph:
        """Tree edges as a SparseGraph (unit-independent of embedding scale)."""
        non_root = np.flatnonzero(self.parent != -1)
        u = np.minimum(non_root, self.parent[non_root])
        v = np.maximum(non_root, self.parent[non_root])
        order = np.lexsort((v, u))
        return SparseGraph(self.n, np.column_stack([u[order], v[order]]),
                           self.weight[non_root][order])

    def path_distances(self, sources=None) -> np.ndarray:
        """Weighted tree-path distances from the given sources (all by default)."""
        indices = np.arange(self.n) if sources is None else np.asarray(sources)
        return dijkstra(self.adjacency(), directed=False, indices=indices)

    @classmethod
    def balanced(cls, branching: int, depth: int, edge_weight: float = 1.0) -> "Tree":
        """Complete b-ary tree of the given depth, nodes in breadth-first order."""
        if branching < 1 or depth < 0:
            raise ValueError("need branching >= 1 and depth >= 0")
        parents = [-1]
        level = [0]
        next_id = 1
        for _ in range(depth):
            nxt = []
            for p in level:
                for _ in range(branching):
                    parents.append(p)
                    nxt.append(next_id)
                    next_id += 1
            level = nxt
        t = cls(np.array(parents), np.full(len(parents), edge_weight))
        return t


def sarkar_embed_tree(tree: Tree, scale: float) -> np.ndarray:
    """Embed a weighted tree into the 2-D ball by cone splitting.

    The root sits at the origin. At each node the full angle is split evenly
    among its tree neighbours (parent plus children), and every child is
    placed at exact hyperbolic distance scale * edge_weight along its ray;
    placement happens in the tangent picture at the node, carried back by a
    Mobius translation. Edge lengths are therefore isometric by
    construction, and pairwise distortion shrinks as scale grows.
    """
    if scale <= 0 or not np.isfinite(scale):
        raise ValueError("scale must be positive and finite")
    n = tree.n
    coords = np.zeros((n, 2))
    kids = tree.children()
    root = tree.root

    def place(node: int, parent_point: np.ndarray | None) -> None:
        children = kids[node]
        if not children:
            return
        z = coords[node]
        if parent_point is None:
            theta_p, slots = 0.0, len(children)
            offset = 0  # root: children take all slots starting at angle 0
        else:
            p_local = _mobius(-z, parent_point)
            theta_p = float(np.arctan2(p_local[1], p_local[0]))
            slots = len(children) + 1
            offset = 1  # slot 0 is the parent direction
        for i, child in enumerate(children):
            theta = theta_p + 2.0 * np.pi * (i + offset) / slots
            radius = np.tanh(0.5 * scale * tree.weight[child])
            local = radius * np.array([np.cos(theta), np.sin(theta)])
            coords[child] = _mobius(z, local)

    # iterative BFS keeps deep trees off the recursion limit
    queue: deque = deque([(root, None)])
    while queue:
        node, parent_point = queue.popleft()
        place(node, parent_point)
        for child in kids[node]:
            queue.append((child, coords[node].copy()))
    return coords


def embedding_distortion(tree: Tree, points: np.ndarray, scale: float,
                         sources=None) -> float:
    """Max multiplicative distortion of embedded vs scaled tree distances."""
    pts = check_point(points, "points")
    src = np.arange(tree.n) if sources is None else np.asarray(sources)
    tree_d = tree.path_distances(src) * scale
    emb_d = distance(pts[src][:, None, :], pts[None, :, :])
    mask = tree_d > 0
    ratio = emb_d[mask] / tree_d[mask]
    if np.any(ratio <= 0):
        return float("inf")
    return max(float(ratio.max()), float(1.0 / ratio.min()))
