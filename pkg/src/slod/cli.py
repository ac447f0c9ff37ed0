"""Command-line interface.

Subcommands: hsbm (generate benchmark graphs), scan (boundary scan of a
graph or embedding), sweep (signal-ratio sweep with clustering scores),
cluster (spectral clustering of a graph), ingest (scan an external
embedding from focus nodes), tree-embed (low-distortion tree embedding),
eval (partition scoring). Exit code 0 on success, 2 on validation errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .boundary import (
    DEFAULT_CHURN_K,
    DEFAULT_GRID_POINTS,
    DEFAULT_PEAK_MULTIPLIER,
    ScaleGrid,
    boundary_scan,
)
from .graph import (
    HsbmSpec,
    SparseGraph,
    expected_level_degrees,
    generate_hsbm,
    ks_snr,
    largest_connected_component,
    normalized_laplacian,
    regularized_normalized_laplacian,
    sarkar_embed_tree,
    embedding_distortion,
    knn_graph,
)
from .metrics import ari, kendall_tau, vi
from .spectral import (
    DEFAULT_RETAINED_MODES,
    ScanThresholds,
    heat_kernel_weights,
    partial_eigendecomposition,
    spectral_ball_embedding,
    spectral_clustering,
)

SWEEP_CSV_HEADER = "r,macro_mean,macro_std,meso_mean,meso_std,snr_macro,snr_meso,seconds"


def subseed(base: int, *parts) -> int:
    """Independent 64-bit stream seed derived from a base seed and names."""
    h = hashlib.sha256(str(int(base)).encode())
    for p in parts:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest()[:8], "little")


def _parse_mix(text: str):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--mix needs three comma-separated values")
    return tuple(parts)


def _parse_float_list(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_int_list(text: str):
    return [int(x) for x in text.split(",") if x.strip()]


def _add_scan_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-eigs", type=int, default=DEFAULT_RETAINED_MODES,
                   help="retained Laplacian modes")
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--eps", type=float, default=ScanThresholds().mode_threshold,
                   help="mode-survival threshold for K*")
    p.add_argument("--gap-ratio", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=DEFAULT_PEAK_MULTIPLIER,
                   help="peak threshold multiplier (median + alpha * MAD)")
    p.add_argument("--mix", type=str, default="1,1,1",
                   help="composite mix alpha1,alpha2,alpha3")
    p.add_argument("--churn-k", type=int, default=DEFAULT_CHURN_K)


def _decompose(g: SparseGraph, k_eigs: int, regularize: bool = False):
    lap = regularized_normalized_laplacian(g) if regularize else normalized_laplacian(g)
    return partial_eigendecomposition(lap, min(k_eigs, g.n))


def _grid_for(dec, args) -> ScaleGrid:
    if args.grid_min is not None and args.grid_max is not None:
        return ScaleGrid.logspace(args.grid_min, args.grid_max, args.grid_points)
    if (args.grid_min is None) != (args.grid_max is None):
        raise ValueError("--grid-min and --grid-max must be given together")
    return ScaleGrid.for_decomposition(dec, count=args.grid_points)


def _check_ball(points: np.ndarray) -> None:
    norms = np.linalg.norm(points, axis=1)
    bad = np.flatnonzero(norms >= 1.0)
    if len(bad):
        raise ValueError(
            f"embedding rows outside the unit ball: ids {bad[:10].tolist()}"
            + ("..." if len(bad) > 10 else ""))


def cmd_hsbm(args) -> int:
    spec = HsbmSpec.with_signal_ratio(n=args.n, signal_ratio=args.r)
    g, partitions = generate_hsbm(spec, args.seed)
    out = Path(args.out)
    io.write_edge_list(f"{out}.edges.tsv", g)
    for level, labels in partitions.items():
        io.write_partition(f"{out}.{level}.labels", labels)
    print(f"hsbm: n={g.n} edges={g.num_edges} r={args.r} seed={args.seed} -> {out}.*")
    return 0


def cmd_scan(args) -> int:
    if args.graph:
        g = io.read_edge_list(args.graph)
        lcc, index_map = largest_connected_component(g)
        dec = _decompose(lcc, args.k_eigs)
        points = spectral_ball_embedding(dec, dim=args.embed_dim)
    else:
        points_all = io.read_embedding(args.embedding)
        _check_ball(points_all)
        g = knn_graph(points_all, k=args.knn, bandwidth=args.tau)
        lcc, index_map = largest_connected_component(g)
        points = points_all[index_map >= 0]
        dec = _decompose(lcc, args.k_eigs)
    dropped = int(np.sum(index_map < 0))
    if dropped:
        print(f"scan: dropped {dropped} nodes outside the largest component",
              file=sys.stderr)

    if args.focus is None:
        focus = int(np.argmax(lcc.degrees()))
    else:
        focus = int(index_map[args.focus])
        if focus < 0:
            raise ValueError(f"focus node {args.focus} is not in the largest component")

    report = boundary_scan(
        points, dec, focus,
        grid=_grid_for(dec, args),
        thresholds=ScanThresholds(args.eps, args.gap_ratio),
        mix=_parse_mix(args.mix),
        churn_k=args.churn_k,
        peak_multiplier=args.alpha,
    )
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    summary = " ".join(f"{b.sigma:.4g}(K*={b.k_star})" for b in report.boundaries)
    print(f"scan: {len(report.boundaries)} boundaries {summary}", file=sys.stderr)
    return 0


def sweep_signal_ratios(n: int, ratios, n_seeds: int, base_seed: int,
                        k_eigs: int = DEFAULT_RETAINED_MODES,
                        regularize: bool = True) -> list:
    """One row per signal ratio: clustering ARI stats plus level SNR."""
    rows = []
    for r in ratios:
        spec = HsbmSpec.with_signal_ratio(n=n, signal_ratio=r)
        deg = expected_level_degrees(spec)
        macro_scores, meso_scores = [], []
        t0 = time.perf_counter()
        for i in range(n_seeds):
            g, partitions = generate_hsbm(spec, subseed(base_seed, "hsbm", r, i))
            lcc, index_map = largest_connected_component(g)
            keep = index_map >= 0
            dec = _decompose(lcc, min(k_eigs, lcc.n), regularize=regularize)
            km_seed = subseed(base_seed, "kmeans", r, i)
            macro_scores.append(ari(partitions["macro"][keep],
                                    spectral_clustering(dec, 2, km_seed)))
            meso_scores.append(ari(partitions["meso"][keep],
                                   spectral_clustering(dec, 8, km_seed)))
        seconds = (time.perf_counter() - t0) / max(n_seeds, 1)
        rows.append({
            "r": float(r),
            "macro_mean": float(np.mean(macro_scores)),
            "macro_std": float(np.std(macro_scores)),
            "meso_mean": float(np.mean(meso_scores)),
            "meso_std": float(np.std(meso_scores)),
            "snr_macro": ks_snr(*deg["macro"]),
            "snr_meso": ks_snr(*deg["meso"]),
            "seconds": seconds,
        })
    return rows


def cmd_sweep(args) -> int:
    ratios = _parse_float_list(args.r)
    if not ratios:
        raise ValueError("--r must list at least one signal ratio")
    rows = sweep_signal_ratios(args.n, ratios, args.seeds, args.seed,
                               k_eigs=args.k_eigs, regularize=not args.no_regularize)
    csv_lines = [SWEEP_CSV_HEADER]
    for row in rows:
        csv_lines.append(",".join(f"{row[col]:.6g}" for col in SWEEP_CSV_HEADER.split(",")))
    out = Path(args.out)
    Path(f"{out}.csv").write_text("\n".join(csv_lines) + "\n")
    Path(f"{out}.json").write_text(json.dumps(
        {"n": args.n, "seeds": args.seeds, "base_seed": args.seed, "rows": rows},
        indent=2) + "\n")
    for line in csv_lines:
        print(line)
    return 0


def cmd_cluster(args) -> int:
    g = io.read_edge_list(args.graph)
    lcc, index_map = largest_connected_component(g)
    dec = _decompose(lcc, args.k_eigs, regularize=not args.no_regularize)
    labels = spectral_clustering(dec, args.k, args.seed)
    full = np.full(g.n, -1, dtype=np.int64)
    full[index_map >= 0] = labels
    io.write_partition(args.out, full)
    print(f"cluster: k={args.k} on {lcc.n}/{g.n} nodes -> {args.out}")
    return 0


def _derive_parents(g: SparseGraph, depths: np.ndarray) -> np.ndarray:
    """Per-node parent from depth annotations: the up-neighbour of depth d-1.

    Exact on trees; on general graphs the smallest-id up-neighbour is used,
    giving an approximate ancestor structure.
    """
    parent = np.full(g.n, -1, dtype=np.int64)
    for u, v in g.edges:
        u, v = int(u), int(v)
        for child, par in ((u, v), (v, u)):
            if depths[par] == depths[child] - 1:
                if parent[child] == -1 or par < parent[child]:
                    parent[child] = par
    return parent


def _ancestor_chain(parent: np.ndarray, start: int) -> list:
    chain = [start]
    node = start
    seen = {start}
    while parent[node] != -1 and parent[node] not in seen:
        node = int(parent[node])
        chain.append(node)
        seen.add(node)
    return chain


def _subtree_masses(parent: np.ndarray, depths: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Total weight in each node's subtree, accumulated leaves-first."""
    mass = w.copy()
    for node in np.argsort(-depths, kind="stable"):
        par = parent[node]
        if par != -1:
            mass[par] += mass[node]
    return mass


def cmd_ingest(args) -> int:
    focus_ids = _parse_int_list(args.focus) if args.focus else []
    if not focus_ids:
        print("ingest: empty focus list, nothing to do")
        return 0
    points_all = io.read_embedding(args.embedding)
    _check_ball(points_all)
    g = io.read_edge_list(args.edges)
    if g.n != len(points_all):
        raise ValueError(f"embedding has {len(points_all)} rows but graph has {g.n} nodes")
    lcc, index_map = largest_connected_component(g)
    points = points_all[index_map >= 0]
    dec = _decompose(lcc, args.k_eigs)
    grid = _grid_for(dec, args)
    thresholds = ScanThresholds(args.eps, args.gap_ratio)
    mix = _parse_mix(args.mix)

    depths = io.read_depths(args.depths) if args.depths else None
    if depths is not None and len(depths) != g.n:
        raise ValueError("depth file length must match graph size")
    parents = _derive_parents(g, depths) if depths is not None else None
    original_of = np.flatnonzero(index_map >= 0)

    out = Path(args.out)
    pairs = []  # (sigma*, levels above focus of the matched ancestor)
    per_focus = {}
    for orig in focus_ids:
        if not 0 <= orig < g.n:
            raise ValueError(f"focus id {orig} out of range")
        focus = int(index_map[orig])
        if focus < 0:
            raise ValueError(f"focus node {orig} is not in the largest component")
        report = boundary_scan(points, dec, focus, grid=grid,
                               thresholds=thresholds, mix=mix,
                               churn_k=args.churn_k, peak_multiplier=args.alpha)
        Path(f"{out}.focus{orig}.json").write_text(report.to_json() + "\n")
        per_focus[str(orig)] = [b.sigma for b in report.boundaries]
        if depths is not None:
            # the mass gain of each chain ancestor over its chain child is
            # the weight whose lowest common ancestor with the focus is that
            # node; the matched depth is the expectation under that
            # distribution, i.e. how far up the diffusion neighbourhood
            # extends on average at this scale
            chain = _ancestor_chain(parents, orig)
            for b in report.boundaries:
                w = heat_kernel_weights(dec, focus, b.sigma)
                w_orig = np.zeros(g.n)
                w_orig[original_of] = w
                mass = _subtree_masses(parents, depths, w_orig)
                gains = [mass[chain[0]]]
                gains += [max(mass[a] - mass[c], 0.0) for c, a in zip(chain, chain[1:])]
                total = sum(gains)
                ups = [int(depths[orig]) - int(depths[a]) for a in chain]
                levels_up = float(np.dot(gains, ups) / total) if total > 0 else 0.0
                pairs.append((b.sigma, levels_up))

    summary = {"per_focus_boundaries": per_focus}
    if depths is not None:
        summary["pairs"] = [{"sigma": s, "levels_up": l} for s, l in pairs]
        if len(pairs) >= 2:
            tau = kendall_tau([p[0] for p in pairs], [p[1] for p in pairs])
            summary["kendall_tau"] = tau
            print(f"ingest: kendall_tau={tau:.4f} over {len(pairs)} boundaries")
        else:
            summary["kendall_tau"] = None
    Path(f"{out}.summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_tree_embed(args) -> int:
    tree = io.read_tree(args.tree)
    points = sarkar_embed_tree(tree, args.scale)
    io.write_embedding(args.out, points)
    if tree.n <= 1500:
        sources = None
    else:
        sources = np.random.default_rng(0).choice(tree.n, size=200, replace=False)
    distortion = embedding_distortion(tree, points, args.scale, sources=sources)
    sampled = "" if sources is None else f" (sampled {len(sources)} sources)"
    print(f"tree-embed: n={tree.n} scale={args.scale} max distortion {distortion:.6f}{sampled}")
    return 0


def cmd_eval(args) -> int:
    pred = io.read_partition(args.pred)
    true = io.read_partition(args.true)
    if len(pred) != len(true):
        raise ValueError("partition files differ in length")
    mask = (pred >= 0) & (true >= 0)
    if not np.any(mask):
        raise ValueError("no overlapping labeled nodes")
    print(f"ari={ari(true[mask], pred[mask]):.6f} vi={vi(true[mask], pred[mask]):.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slod",
                                     description="Multi-scale diffusion analysis on graphs and ball embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hsbm", help="generate a hierarchical SBM benchmark graph")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--r", type=float, default=40.0, help="signal ratio (40 = reference ladder)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_hsbm)

    p = sub.add_parser("scan", help="boundary scan of a graph or embedding")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--embedding", help="embedding file (a kNN graph is built)")
    p.add_argument("--knn", type=int, default=10, help="k for the kNN graph (embedding mode)")
    p.add_argument("--tau", type=float, default=None, help="kernel bandwidth (default: median heuristic)")
    p.add_argument("--focus", type=int, default=None, help="focus node id (default: highest degree)")
    p.add_argument("--embed-dim", type=int, default=10,
                   help="spectral embedding dimension (graph mode)")
    _add_scan_flags(p)
    p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sweep", help="signal-ratio sweep: clustering quality vs r")
    p.add_argument("--r", type=str, default="20,40,60,80,100,150,200")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-eigs", type=int, default=DEFAULT_RETAINED_MODES)
    p.add_argument("--no-regularize", action="store_true",
                   help="use the plain normalized Laplacian for clustering")
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cluster", help="spectral clustering of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-eigs", type=int, default=DEFAULT_RETAINED_MODES)
    p.add_argument("--no-regularize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("ingest", help="scan an external embedding from focus nodes")
    p.add_argument("--embedding", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--focus", type=str, default="", help="comma-separated focus ids")
    p.add_argument("--depths", default=None, help="per-node depth file")
    _add_scan_flags(p)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("tree-embed", help="embed a tree into the 2-D ball")
    p.add_argument("--tree", required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tree_embed)

    p = sub.add_parser("eval", help="score a predicted partition against a reference")
    p.add_argument("--pred", required=True)
    p.add_argument("--true", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
