"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s`. The expensive artifacts
(benchmark sweep, scans at several graph sizes) are computed once per
session and shared across criteria.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
import scipy.linalg

from slod import io
from slod.boundary import ScaleGrid, boundary_scan
from slod.cli import main, subseed, sweep_signal_ratios
from slod.frechet import frechet_mean
from slod.geometry import distance, exp_map, log_map, mobius_add
from slod.graph import (
    HsbmSpec,
    Tree,
    generate_hsbm,
    largest_connected_component,
    normalized_laplacian,
    regularized_normalized_laplacian,
    sarkar_embed_tree,
)
from slod.baselines import greedy_modularity, louvain
from slod.metrics import ari
from slod.spectral import (
    effective_dimensionality,
    heat_kernel_weight_table,
    heat_kernel_weights,
    partial_eigendecomposition,
    spectral_ball_embedding,
    spectral_clustering,
)
from conftest import make_graph, random_ball_points

MODE_EPS = math.exp(-1.0)
LOG10_TEN_PERCENT = math.log10(1.1)


def report(num, passed, detail):
    print(f"\nCRITERION {num}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {num}: {detail}"


def row_for(rows, r):
    return next(row for row in rows if row["r"] == r)


def kstar_trajectory(dec, grid):
    return np.array([effective_dimensionality(dec, s, MODE_EPS) for s in grid.values])


def plateau_lengths(traj):
    return {int(val): max(len(list(grp)) for v, grp in itertools.groupby(traj) if v == val)
            for val in np.unique(traj)}


@pytest.fixture(scope="module")
def sweep_rows():
    start = time.perf_counter()
    rows = sweep_signal_ratios(1024, [20, 40, 60, 80, 100, 150, 200],
                               n_seeds=10, base_seed=0)
    return rows, time.perf_counter() - start


@pytest.fixture(scope="module")
def hsbm200_scan():
    g, parts = generate_hsbm(HsbmSpec.with_signal_ratio(1024, 200.0), seed=1)
    lcc, _ = largest_connected_component(g)
    dec = partial_eigendecomposition(normalized_laplacian(lcc), 50)
    points = spectral_ball_embedding(dec, dim=10)
    grid = ScaleGrid.for_decomposition(dec, count=280)
    rep = boundary_scan(points, dec, int(np.argmax(lcc.degrees())), grid=grid)
    return dec, grid, rep


@pytest.fixture(scope="module")
def barbell_scan(barbell_graph):
    dec = partial_eigendecomposition(normalized_laplacian(barbell_graph), 10)
    points = spectral_ball_embedding(dec, dim=5)
    grid = ScaleGrid.logspace(0.1, 100.0, 40)
    rep = boundary_scan(points, dec, focus=0, grid=grid)
    return dec, grid, rep


def test_criterion_1_benchmark_reproduction(sweep_rows):
    rows, elapsed = sweep_rows
    checks = {
        "macro@200 >= 0.95": row_for(rows, 200)["macro_mean"] >= 0.95,
        "macro@80 >= 0.8": row_for(rows, 80)["macro_mean"] >= 0.8,
        "macro@20 <= 0.2": row_for(rows, 20)["macro_mean"] <= 0.2,
        "meso@200 >= 0.75": row_for(rows, 200)["meso_mean"] >= 0.75,
        "per-graph < 5 s": max(r["seconds"] for r in rows) < 5.0,
        "sweep < 10 min": elapsed < 600.0,
    }
    detail = "; ".join(
        f"{k}={'ok' if v else 'BAD'}" for k, v in checks.items()
    ) + f" (macro means: {[round(r['macro_mean'], 3) for r in rows]})"
    report(1, all(checks.values()), detail)


def test_criterion_2_phase_transition(sweep_rows):
    rows, _ = sweep_rows
    jump = row_for(rows, 40)["macro_mean"] - row_for(rows, 20)["macro_mean"]
    failing = [r for r in rows if r["macro_mean"] <= 0.2]
    succeeding = [r for r in rows if r["macro_mean"] >= 0.8]
    snr_ok = (len(failing) > 0 and len(succeeding) > 0
              and all(r["snr_macro"] < 1.0 for r in failing)
              and all(r["snr_macro"] > 1.0 for r in succeeding))
    passed = jump >= 0.3 and snr_ok
    report(2, passed,
           f"ARI jump r=20->40 is {jump:.3f} (need >= 0.3); "
           f"snr<1 in failing regime and >1 in succeeding regime: {snr_ok}")


def test_criterion_3_multi_seed_stability(sweep_rows):
    rows, _ = sweep_rows
    std = row_for(rows, 100)["macro_std"]
    report(3, std <= 0.10, f"macro ARI std at r=100 is {std:.4f} (need <= 0.10)")


def test_criterion_4_spectral_alignment(barbell_scan, hsbm200_scan):
    offsets = []
    for name, (dec, grid, rep) in (("barbell", barbell_scan), ("hsbm200", hsbm200_scan)):
        assert rep.spectral_candidates, f"{name}: no spectral candidates"
        for cand in rep.spectral_candidates:
            gaps = [abs(math.log10(b.sigma / cand)) for b in rep.boundaries]
            offsets.append((name, cand, min(gaps) if gaps else math.inf))
    worst = max(off for _, _, off in offsets)
    detail = "; ".join(f"{n}: |dlog10(sigma*/{c:.3g})|={o:.4f}" for n, c, o in offsets) \
        + f" (need <= {LOG10_TEN_PERCENT:.4f})"
    report(4, worst <= LOG10_TEN_PERCENT, detail)


def test_criterion_5_scale_invariance():
    meso_sigmas = []
    for n in (512, 1024, 2048):
        g, _ = generate_hsbm(HsbmSpec.with_signal_ratio(n, 200.0), seed=11)
        lcc, _ = largest_connected_component(g)
        dec = partial_eigendecomposition(normalized_laplacian(lcc), 50)
        points = spectral_ball_embedding(dec, dim=10)
        grid = ScaleGrid.for_decomposition(dec, count=280)
        rep = boundary_scan(points, dec, int(np.argmax(lcc.degrees())), grid=grid)
        k8 = sorted(b.sigma for b in rep.boundaries if b.k_star == 8)
        assert k8, f"no K*=8 boundary at n={n}"
        meso_sigmas.append(k8[0])  # exit point of the K*=8 plateau
    cv = float(np.std(meso_sigmas) / np.mean(meso_sigmas))
    report(5, cv < 0.10,
           f"meso boundary sigma* across N=512/1024/2048: "
           f"{[round(s, 3) for s in meso_sigmas]}, CV={cv:.4f} (need < 0.10)")


def test_criterion_6_baseline_ordering():
    g, parts = generate_hsbm(HsbmSpec.with_signal_ratio(1024, 200.0), seed=3)
    lcc, index_map = largest_connected_component(g)
    meso = parts["meso"][index_map >= 0]
    dec = partial_eigendecomposition(regularized_normalized_laplacian(lcc), 50)
    spectral = ari(meso, spectral_clustering(dec, 8, seed=0))
    lv = ari(meso, louvain(lcc, seed=0))
    gm = ari(meso, greedy_modularity(lcc))
    passed = spectral > lv and spectral > gm
    report(6, passed,
           f"meso ARI at r=200: spectral={spectral:.3f} > louvain={lv:.3f} "
           f"and > greedy={gm:.3f}")


def test_criterion_7_kstar_trajectories(barbell_scan, hsbm200_scan, clique_graph):
    checks = []
    for name, (dec, grid, _) in (("barbell", barbell_scan), ("hsbm200", hsbm200_scan)):
        traj = kstar_trajectory(dec, grid)
        checks.append((f"{name} monotone", bool(np.all(np.diff(traj) <= 0))))
    clique_dec = partial_eigendecomposition(normalized_laplacian(clique_graph), 10)
    clique_traj = kstar_trajectory(clique_dec, ScaleGrid.for_decomposition(clique_dec))
    checks.append(("clique monotone", bool(np.all(np.diff(clique_traj) <= 0))))
    dec, grid, _ = hsbm200_scan
    lengths = plateau_lengths(kstar_trajectory(dec, grid))
    checks.append(("K*=2 plateau >= 3", lengths.get(2, 0) >= 3))
    checks.append(("K*=8 plateau >= 3", lengths.get(8, 0) >= 3))
    detail = "; ".join(f"{k}={'ok' if v else 'BAD'}" for k, v in checks)
    detail += f" (plateau lengths: K*=2 -> {lengths.get(2, 0)}, K*=8 -> {lengths.get(8, 0)})"
    report(7, all(v for _, v in checks), detail)


def test_criterion_8_geometry_and_frechet_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(100)
    x = random_ball_points(rng, 1000, 3)
    y = random_ball_points(rng, 1000, 3)
    z = random_ball_points(rng, 1000, 3)
    a = random_ball_points(rng, 1000, 3, max_norm=0.8)
    roundtrip = float(np.max(np.abs(exp_map(x, log_map(x, y)) - y)))
    v = 0.3 * rng.normal(size=(1000, 3))
    roundtrip = max(roundtrip, float(np.max(np.abs(log_map(x, exp_map(x, v)) - v))))
    isometry = float(np.max(np.abs(
        distance(mobius_add(a, x), mobius_add(a, y)) - distance(x, y))))
    triangle_ok = bool(np.all(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-9))

    pts = random_ball_points(rng, 50, 3)
    w = rng.uniform(size=50)
    w /= w.sum()
    _, info = frechet_mean(pts, w, return_info=True)
    inits = random_ball_points(rng, 10, 3)
    means = [frechet_mean(pts, w, init=i0) for i0 in inits]
    spread = max(distance(means[0], m) for m in means[1:])
    elapsed = time.perf_counter() - start

    checks = {
        "round trips <= 1e-9": roundtrip <= 1e-9,
        "isometry <= 1e-6": isometry <= 1e-6,
        "triangle inequality": triangle_ok,
        "gradient norm < 1e-8": info.converged and info.gradient_norm < 1e-8,
        "multi-start <= 1e-6": spread <= 1e-6,
        "runtime < 10 s": elapsed < 10.0,
    }
    detail = "; ".join(f"{k}={'ok' if v else 'BAD'}" for k, v in checks.items())
    detail += f" (roundtrip={roundtrip:.2e}, isometry={isometry:.2e}, spread={spread:.2e}, {elapsed:.1f}s)"
    report(8, all(checks.values()), detail)


def test_criterion_9_heat_kernel_correctness(path3_graph):
    # 3-node path against the dense matrix-exponential oracle
    dec = partial_eigendecomposition(normalized_laplacian(path3_graph), 3)
    lap = normalized_laplacian(path3_graph).toarray()
    worst = 0.0
    for sigma in (0.0, 0.5, 1.0, 10.0):
        oracle = scipy.linalg.expm(-sigma * lap)[0]
        oracle = np.maximum(oracle, 0.0)
        oracle /= oracle.sum()
        got = heat_kernel_weights(dec, 0, sigma)
        worst = max(worst, float(np.max(np.abs(got - oracle))))

    # semigroup property on a small connected random graph
    rng = np.random.default_rng(42)
    n = 18
    pairs = {(i, i + 1) for i in range(n - 1)}
    pairs |= {(i, j) for i in range(n) for j in range(i + 1, n) if rng.uniform() < 0.2}
    g = make_graph(n, pairs)
    dec_small = partial_eigendecomposition(normalized_laplacian(g), n)
    phi, lam = dec_small.eigenvectors, dec_small.eigenvalues
    semigroup = 0.0
    for s1, s2 in ((0.4, 0.9), (1.5, 2.0)):
        k1 = phi @ (np.exp(-s1 * lam) * phi[3])
        twice = phi @ (np.exp(-s2 * lam) * (phi.T @ k1))
        direct = phi @ (np.exp(-(s1 + s2) * lam) * phi[3])
        semigroup = max(semigroup, float(np.max(np.abs(twice - direct))))

    # truncation bound on a ~50-node graph
    g50, _ = generate_hsbm(HsbmSpec(n=64, blocks=(2, 4, 8)), seed=2)
    lcc, _ = largest_connected_component(g50)
    dec_full = partial_eigendecomposition(normalized_laplacian(lcc), lcc.n)
    phi, lam = dec_full.eigenvectors, dec_full.eigenvalues
    k = 10
    bound_ok = True
    for sigma in (0.5, 1.0, 3.0):
        full_row = phi @ (np.exp(-sigma * lam) * phi[0])
        trunc_row = phi[:, :k] @ (np.exp(-sigma * lam[:k]) * phi[0, :k])
        bound = np.sum(np.exp(-sigma * lam[k:]))
        bound_ok &= bool(np.max(np.abs(full_row - trunc_row)) <= bound + 1e-12)

    checks = {
        "weights vs expm oracle <= 1e-9": worst <= 1e-9,
        "semigroup <= 1e-8": semigroup <= 1e-8,
        f"truncation bound on {lcc.n}-node graph": bound_ok,
    }
    detail = "; ".join(f"{k}={'ok' if v else 'BAD'}" for k, v in checks.items())
    detail += f" (oracle dev={worst:.2e}, semigroup dev={semigroup:.2e})"
    report(9, all(checks.values()), detail)


def test_criterion_10_theorem_surrogates():
    tree = Tree.balanced(2, 4)
    pts = sarkar_embed_tree(tree, scale=3.0)
    dec = partial_eigendecomposition(normalized_laplacian(tree.to_graph()), tree.n)
    focus = tree.n - 1

    vmax = {}
    for count in (40, 80):
        grid = ScaleGrid.logspace(0.05, 500.0, count)
        rep = boundary_scan(pts, dec, focus, grid=grid)
        vmax[count] = float(rep.indicators.velocity.max())
    refinement_ratio = vmax[80] / vmax[40]

    sigma_min = 1e-4
    sigmas = sigma_min * 2.0 ** np.arange(0, 6)  # smallest decade of a scan grid
    table = heat_kernel_weight_table(dec, focus, sigmas)
    base = frechet_mean(pts, table[0], init=pts[focus])
    errors = [float(distance(frechet_mean(pts, table[t], init=pts[focus]), base))
              for t in range(1, len(sigmas))]
    decay_ok = all(errors[i] <= 0.8 * errors[i + 1] for i in range(len(errors) - 1))

    checks = {
        "velocity refinement ratio < 2": refinement_ratio < 2.0,
        "error(sigma/2) <= 0.8 error(sigma)": decay_ok,
    }
    detail = (f"refinement ratio={refinement_ratio:.3f}; "
              f"error ratios={[round(errors[i] / errors[i + 1], 3) for i in range(len(errors) - 1)]}")
    report(10, all(checks.values()), detail)


def test_criterion_11_tree_depth_correspondence(tmp_path):
    start = time.perf_counter()
    tree = Tree.balanced(4, 6)
    pts = sarkar_embed_tree(tree, scale=2.0)
    io.write_embedding(tmp_path / "tree.emb", pts)
    io.write_edge_list(tmp_path / "tree.edges", tree.to_graph())
    depths = tree.depths()
    io.write_depths(tmp_path / "tree.depths", depths)
    leaves = np.flatnonzero(depths == 6)
    foci = np.random.default_rng(subseed(0, "tree-foci")).choice(leaves, size=8, replace=False)
    rc = main([
        "ingest",
        "--embedding", str(tmp_path / "tree.emb"),
        "--edges", str(tmp_path / "tree.edges"),
        "--depths", str(tmp_path / "tree.depths"),
        "--focus", ",".join(str(f) for f in foci),
        "--k-eigs", "80", "--grid-points", "120", "--alpha", "1.0",
        "--out", str(tmp_path / "run"),
    ])
    elapsed = time.perf_counter() - start
    assert rc == 0
    summary = json.loads((tmp_path / "run.summary.json").read_text())
    tau = summary["kendall_tau"]
    passed = tau is not None and tau >= 0.6 and elapsed < 60.0
    report(11, passed,
           f"kendall tau={tau:.3f} over {len(summary['pairs'])} boundaries "
           f"(need >= 0.6), runtime {elapsed:.1f}s (need < 60)")
