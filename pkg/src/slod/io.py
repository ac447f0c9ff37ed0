"""Text file formats: edge lists, partitions, trees, embeddings, spectra.

All formats are tab-separated with 0-based ids. Floats are written with
repr-level precision so a write/read round trip is exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import SparseGraph, Tree
from .spectral import SpectralDecomposition


def write_edge_list(path, g: SparseGraph) -> None:
    """`# nodes=N` header, then one `u<TAB>v<TAB>weight` line per edge."""
    lines = [f"# nodes={g.n}"]
    for (u, v), w in zip(g.edges, g.weights):
        lines.append(f"{u}\t{v}\t{float(w)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> SparseGraph:
    n = None
    edges, weights = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("nodes="):
                n = int(body.split("=", 1)[1])
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected `u<TAB>v<TAB>weight`")
        u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        edges.append((min(u, v), max(u, v)))
        weights.append(w)
    if n is None:
        raise ValueError(f"{path}: missing `# nodes=N` header")
    return SparseGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2),
                       np.array(weights))


def write_partition(path, labels) -> None:
    """One integer label per line, ordered by node id."""
    lab = np.asarray(labels).reshape(-1)
    Path(path).write_text("\n".join(str(int(x)) for x in lab) + "\n")


def read_partition(path) -> np.ndarray:
    vals = [int(line) for line in Path(path).read_text().split()]
    if not vals:
        raise ValueError(f"{path}: empty partition file")
    return np.array(vals, dtype=np.int64)


read_depths = read_partition  # depth files share the one-integer-per-line format
write_depths = write_partition


def write_tree(path, tree: Tree) -> None:
    """`# root=R` header, then `child<TAB>parent<TAB>weight` per non-root node."""
    lines = [f"# root={tree.root}"]
    for child, parent in enumerate(tree.parent):
        if parent != -1:
            lines.append(f"{child}\t{int(parent)}\t{float(tree.weight[child])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_tree(path) -> Tree:
    root = None
    rows = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("root="):
                root = int(body.split("=", 1)[1])
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected `child<TAB>parent<TAB>weight`")
        rows.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if not rows and root is None:
        raise ValueError(f"{path}: empty tree file")
    ids = {c for c, _, _ in rows} | {p for _, p, _ in rows}
    if root is not None:
        ids.add(root)
    n = max(ids) + 1
    parent = np.full(n, -1, dtype=np.int64)
    weight = np.ones(n)
    for child, par, w in rows:
        if parent[child] != -1:
            raise ValueError(f"{path}: node {child} listed with two parents")
        parent[child] = par
        weight[child] = w
    return Tree(parent, weight)


def write_embedding(path, points) -> None:
    """`id<TAB>x1<TAB>...<TAB>xd` per point; dimension inferred on read."""
    pts = np.asarray(points, dtype=float)
    lines = []
    for i, row in enumerate(pts):
        lines.append(str(i) + "\t" + "\t".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_embedding(path) -> np.ndarray:
    rows = {}
    dim = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ValueError(f"{path}:{lineno}: expected `id<TAB>x1<TAB>...<TAB>xd`")
        if dim is None:
            dim = len(parts) - 1
        elif len(parts) - 1 != dim:
            raise ValueError(f"{path}:{lineno}: inconsistent dimension")
        rows[int(parts[0])] = [float(x) for x in parts[1:]]
    if not rows:
        raise ValueError(f"{path}: empty embedding file")
    n = max(rows) + 1
    if set(rows) != set(range(n)):
        raise ValueError(f"{path}: ids must cover 0..{n - 1}")
    return np.array([rows[i] for i in range(n)])


def write_spectrum(path, dec: SpectralDecomposition) -> None:
    """One mode per line: eigenvalue followed by its eigenvector components."""
    lines = []
    for lam, vec in zip(dec.eigenvalues, dec.eigenvectors.T):
        lines.append("\t".join([repr(float(lam))] + [repr(float(x)) for x in vec]))
    Path(path).write_text("\n".join(lines) + "\n")
