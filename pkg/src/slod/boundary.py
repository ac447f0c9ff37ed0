"""Scale-boundary detection over a diffusion-scale grid.

For each scale sigma on a log-spaced grid the heat kernel at the focus node
yields a weight vector, the weighted Frechet mean of the embedded points
yields a summary, and three indicators measure change between consecutive
scales: representation velocity (mean displacement per unit sigma), weight
divergence (Jensen-Shannon between weight vectors), and neighborhood churn
(Jaccard distance between the summaries' nearest-neighbour sets). Peaks of
the robustly normalized composite mark scale boundaries; each boundary is
annotated with the effective dimensionality of the plateau it terminates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .frechet import FrechetConfig, check_weights, frechet_mean, normalize_weights
from .geometry import check_point, distance
from .metrics import LN2, jsd
from .spectral import (
    ScanThresholds,
    SpectralDecomposition,
    ZERO_EIGENVALUE_FLOOR,
    effective_dimensionality,
    heat_kernel_weight_table,
    spectral_gap_candidates,
)

DEFAULT_GRID_POINTS = 60
DEFAULT_MIX = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
DEFAULT_PEAK_MULTIPLIER = 1.5
DEFAULT_CHURN_K = 10
# a composite peak counts as a boundary only if K* drops within this many
# decades of it; indicator humps lead or trail the mode death by a fraction
# of an e-folding, never by more
DROP_WINDOW_DECADES = 0.2


@dataclass(frozen=True)
class ScaleGrid:
    """Strictly increasing positive scales, normally log-spaced."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("grid needs at least 2 scales")
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise ValueError("scales must be positive and finite")
        if np.any(np.diff(vals) <= 0):
            raise ValueError("scales must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    def midpoints(self) -> np.ndarray:
        """Geometric midpoints of consecutive grid pairs."""
        return np.sqrt(self.values[:-1] * self.values[1:])

    @classmethod
    def logspace(cls, low: float, high: float, count: int = DEFAULT_GRID_POINTS) -> "ScaleGrid":
        if low <= 0 or high <= low:
            raise ValueError("need 0 < low < high")
        return cls(np.geomspace(low, high, count))

    @classmethod
    def for_decomposition(cls, dec: SpectralDecomposition,
                          count: int = DEFAULT_GRID_POINTS,
                          low_factor: float = 0.1,
                          high_factor: float = 10.0) -> "ScaleGrid":
        """Span [low_factor/lambda_max, high_factor/lambda_2+].

        Covers every spectral gap candidate with a margin on both sides.
        """
        vals = dec.eigenvalues
        nonzero = vals[vals > ZERO_EIGENVALUE_FLOOR]
        if len(nonzero) == 0:
            return cls.logspace(1e-2, 1e2, count)
        low = low_factor / float(nonzero.max())
        high = high_factor / float(nonzero.min())
        if high <= low:
            high = low * 1e2
        return cls.logspace(low, high, count)


@dataclass
class IndicatorSeries:
    """Per-pair indicator values along the grid (length T - 1 each)."""

    velocity: np.ndarray
    weight_divergence: np.ndarray
    churn: np.ndarray

    def __post_init__(self) -> None:
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(-1)
        self.weight_divergence = np.asarray(self.weight_divergence, dtype=float).reshape(-1)
        self.churn = np.asarray(self.churn, dtype=float).reshape(-1)
        if not len(self.velocity) == len(self.weight_divergence) == len(self.churn):
            raise ValueError("indicator series must share one length")
        if np.any(self.velocity < 0):
            raise ValueError("velocity must be nonnegative")
        if np.any(self.weight_divergence < -1e-12) or np.any(self.weight_divergence > LN2 + 1e-12):
            raise ValueError("weight divergence must lie in [0, ln 2]")
        if np.any(self.churn < -1e-12) or np.any(self.churn > 1.0 + 1e-12):
            raise ValueError("churn must lie in [0, 1]")


@dataclass(frozen=True)
class Boundary:
    """Detected boundary scale and the dimensionality of the ending plateau."""

    sigma: float
    k_star: int

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.k_star < 1:
            raise ValueError("k_star must be >= 1")


@dataclass
class Mixture:
    """Cluster centers on the ball with mixture weights summing to one."""

    centers: np.ndarray  # (K, d)
    weights: np.ndarray  # (K,)

    def __post_init__(self) -> None:
        self.centers = check_point(self.centers, "centers")
        self.weights = check_weights(self.weights, len(self.centers))


@dataclass
class BoundaryReport:
    """Full scan output: grid, indicators, composite, peaks, candidates."""

    grid: ScaleGrid
    indicators: IndicatorSeries
    composite: np.ndarray
    boundaries: list            # of Boundary
    spectral_candidates: list   # of sigma floats, decreasing

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.values.tolist(),
            "velocity": self.indicators.velocity.tolist(),
            "weight_divergence": self.indicators.weight_divergence.tolist(),
            "churn": self.indicators.churn.tolist(),
            "composite": np.asarray(self.composite, dtype=float).tolist(),
            "boundaries": [{"sigma": b.sigma, "k_star": b.k_star} for b in self.boundaries],
            "spectral_candidates": [float(s) for s in self.spectral_candidates],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryReport":
        return cls(
            grid=ScaleGrid(np.array(data["grid"])),
            indicators=IndicatorSeries(
                np.array(data["velocity"]),
                np.array(data["weight_divergence"]),
                np.array(data["churn"]),
            ),
            composite=np.array(data["composite"], dtype=float),
            boundaries=[Boundary(b["sigma"], int(b["k_star"])) for b in data["boundaries"]],
            spectral_candidates=[float(s) for s in data["spectral_candidates"]],
        )

    @classmethod
    def from_json(cls, text: str) -> "BoundaryReport":
        return cls.from_dict(json.loads(text))


def slod_at_scale(points, dec: SpectralDecomposition, focus: int, sigma: float,
                  config: FrechetConfig | None = None) -> np.ndarray:
    """Summary point at one scale: heat-kernel-weighted Frechet mean.

    Points must align index-for-index with the graph nodes behind the
    decomposition; the iteration starts at the focus point.
    """
    pts = check_point(points, "points")
    if pts.ndim != 2 or len(pts) != dec.n:
        raise ValueError(f"points misaligned with decomposition: {pts.shape} vs n={dec.n}")
    w = heat_kernel_weight_table(dec, focus, np.array([sigma]))[0]
    return frechet_mean(pts, w, config, init=pts[int(focus)])


def representation_velocity(mean_a, mean_b, sigma_a: float, sigma_b: float) -> float:
    """Displacement of the summary per unit scale, d(m_b, m_a)/(sigma_b - sigma_a)."""
    if sigma_b <= sigma_a:
        raise ValueError("sigma_b must exceed sigma_a")
    return float(distance(mean_a, mean_b)) / (sigma_b - sigma_a)


def neighborhood_churn(mean_a, mean_b, points, k: int) -> float:
    """Jaccard distance between the k-NN sets of two summary points."""
    pts = check_point(points, "points")
    if pts.ndim != 2:
        raise ValueError("points must be (N, d)")
    if not 1 <= k <= len(pts):
        raise ValueError(f"k must satisfy 1 <= k <= N, got k={k}, N={len(pts)}")
    set_a = _knn_set(mean_a, pts, k)
    set_b = _knn_set(mean_b, pts, k)
    union = len(set_a | set_b)
    if union == 0:
        return 0.0
    return 1.0 - len(set_a & set_b) / union


def _knn_set(center, pts: np.ndarray, k: int) -> set:
    d = distance(center, pts)
    idx = np.argpartition(d, k - 1)[:k]
    idx = idx[np.argsort(d[idx], kind="stable")]
    return set(int(i) for i in idx)


def robust_zscore(x) -> np.ndarray:
    """(x - median) / MAD with a spike-safe fallback scale.

    When the MAD collapses to zero (constant series plus isolated spikes),
    half the maximum absolute deviation stands in, so spikes normalize to 2
    instead of blowing up; an entirely constant series maps to zeros.
    """
    a = np.asarray(x, dtype=float)
    med = np.median(a)
    scale = np.median(np.abs(a - med))
    if scale <= 1e-12:
        scale = 0.5 * float(np.max(np.abs(a - med)))
    if scale <= 1e-12:
        return np.zeros_like(a)
    return (a - med) / scale


def composite_score(indicators: IndicatorSeries, mix=DEFAULT_MIX) -> np.ndarray:
    """Mix of robustly normalized indicators, alpha1 V + alpha2 D + alpha3 C."""
    m = np.asarray(mix, dtype=float).reshape(-1)
    if len(m) != 3:
        raise ValueError("mix must have exactly 3 entries")
    if np.any(m < 0) or m.sum() <= 0:
        raise ValueError("mix must be nonnegative and not all zero")
    return (m[0] * robust_zscore(indicators.velocity)
            + m[1] * robust_zscore(indicators.weight_divergence)
            + m[2] * robust_zscore(indicators.churn))


def _peak_indices(scores: np.ndarray, multiplier: float) -> list:
    """Strict local maxima above median + multiplier * MAD.

    When the MAD collapses to zero (plateau plus spikes), half the maximum
    absolute deviation stands in so isolated spikes still threshold sensibly.
    """
    s = np.asarray(scores, dtype=float)
    med = float(np.median(s))
    mad = float(np.median(np.abs(s - med)))
    if mad <= 1e-12:
        mad = 0.5 * float(np.max(np.abs(s - med)))
    threshold = med + multiplier * mad
    out = []
    for t in range(len(s)):
        if s[t] <= threshold:
            continue
        if t > 0 and s[t] <= s[t - 1]:
            continue
        if t < len(s) - 1 and s[t] <= s[t + 1]:
            continue
        out.append(t)
    return out


def peak_pick(scores, grid: ScaleGrid, multiplier: float = DEFAULT_PEAK_MULTIPLIER) -> list:
    """Boundary scales from composite peaks, mapped to pair midpoints."""
    s = np.asarray(scores, dtype=float).reshape(-1)
    if len(s) != len(grid) - 1:
        raise ValueError("scores must have length len(grid) - 1")
    mids = grid.midpoints()
    return [float(mids[t]) for t in _peak_indices(s, multiplier)]


def boundary_scan(points, dec: SpectralDecomposition, focus: int,
                  grid: ScaleGrid | None = None,
                  thresholds: ScanThresholds | None = None,
                  mix=DEFAULT_MIX,
                  churn_k: int = DEFAULT_CHURN_K,
                  frechet_config: FrechetConfig | None = None,
                  peak_multiplier: float = DEFAULT_PEAK_MULTIPLIER) -> BoundaryReport:
    """Scan a scale grid for boundaries around one focus node.

    Composite peaks become boundaries only when the effective
    dimensionality actually drops within DROP_WINDOW_DECADES of the peak (a
    scale boundary is a mode-death transition; peaks without one are
    summary drift inside a plateau) and when the plateau being exited is
    resolved, i.e. its mode count is below k_retained (below that the
    truncated spectrum cannot distinguish structure from the undiffused
    start of the grid). Boundary scales are reported at the geometric
    midpoint of the straddling grid pair; k_star is the mode count of the
    nearest stable K* plateau left of the nearest drop, the level that
    dissolves at the boundary.

    The reported velocity series is displacement per unit scale. Inside the
    composite the velocity channel is normalized per log-scale step instead
    (displacement divided by delta log sigma): on a log-spaced grid the raw
    definition carries a 1/sigma trend that would swamp every peak beyond
    the first decade.
    """
    pts = check_point(points, "points")
    if pts.ndim != 2 or len(pts) != dec.n:
        raise ValueError(f"points misaligned with decomposition: {pts.shape} vs n={dec.n}")
    th = thresholds or ScanThresholds()
    sg = grid or ScaleGrid.for_decomposition(dec)
    # a neighbourhood covering most of the point set carries no churn signal
    churn_k = min(churn_k, max(1, len(pts) // 2))

    sigmas = sg.values
    weights = heat_kernel_weight_table(dec, focus, sigmas)
    # warm-start each scale at the previous mean: the minimizer is unique,
    # so only the iteration count changes, not the result
    means = np.empty((len(sigmas), pts.shape[1]))
    current = pts[int(focus)]
    for t in range(len(sigmas)):
        current = frechet_mean(pts, weights[t], frechet_config, init=current)
        means[t] = current

    displacement = distance(means[1:], means[:-1])
    velocity = displacement / np.diff(sigmas)
    divergence = np.array([jsd(weights[t], weights[t + 1]) for t in range(len(sigmas) - 1)])
    churn = np.array([
        neighborhood_churn(means[t], means[t + 1], pts, churn_k)
        for t in range(len(sigmas) - 1)
    ])
    indicators = IndicatorSeries(velocity, divergence, churn)
    log_velocity = displacement / np.diff(np.log(sigmas))
    composite = composite_score(
        IndicatorSeries(log_velocity, divergence, churn), mix)

    mids = sg.midpoints()
    kstar_traj = np.array([
        effective_dimensionality(dec, float(s), th.mode_threshold) for s in sigmas
    ])
    step_decades = float(np.log10(sigmas[1] / sigmas[0]))
    window = max(1, int(np.ceil(DROP_WINDOW_DECADES / max(step_decades, 1e-12))))
    drops = np.flatnonzero(kstar_traj[:-1] > kstar_traj[1:])
    boundaries = []
    for t in _peak_indices(composite, peak_multiplier):
        near = drops[(drops >= t - window) & (drops <= t + window)]
        if len(near) == 0:
            continue  # no mode died near this peak
        nearest_drop = int(near[np.argmin(np.abs(near - t))])
        k_star = _exited_plateau(kstar_traj, nearest_drop)
        if k_star >= dec.k_retained:
            continue  # plateau not resolved by the retained spectrum
        boundaries.append(Boundary(float(mids[t]), int(k_star)))
    candidates = [sigma for _, sigma in spectral_gap_candidates(dec, th.gap_ratio_threshold)]
    return BoundaryReport(sg, indicators, composite, boundaries, candidates)


def _exited_plateau(kstar_traj: np.ndarray, start: int) -> int:
    """K* of the nearest stable (two-cell) plateau at or left of `start`."""
    for j in range(start, 0, -1):
        if kstar_traj[j] == kstar_traj[j - 1]:
            return int(kstar_traj[j])
    return int(kstar_traj[start])


def multi_center(points, w, n_centers: int, top_m: int | None = None,
                 iterations: int = 50, seed: int = 0,
                 frechet_config: FrechetConfig | None = None) -> Mixture:
    """Weighted Riemannian k-means mixture over the heaviest points.

    Restricted to the top_m points by weight; centers are seeded k-means++
    style under geodesic distance, then alternated between nearest-center
    assignment and per-cluster weighted Frechet means. The weighted
    within-cluster squared distance never increases. Mixture weights are the
    weight shares of the clusters.
    """
    pts = check_point(points, "points")
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a nonempty (N, d) array")
    wv = check_weights(w, len(pts))
    m = min(top_m or min(len(pts), 512), len(pts))
    if not 1 <= n_centers <= m:
        raise ValueError(f"need 1 <= n_centers <= top_m, got K={n_centers}, top_m={m}")

    order = np.argsort(-wv, kind="stable")[:m]
    sub = pts[order]
    sw = normalize_weights(wv[order])
    if len(np.unique(sub, axis=0)) < n_centers:
        raise ValueError("fewer distinct points than requested centers")

    rng = np.random.default_rng(seed)
    centers = sub[_kmeanspp_indices(sub, sw, n_centers, rng)].copy()

    assign = np.full(m, -1, dtype=np.int64)
    for _ in range(max(1, iterations)):
        d = distance(centers[:, None, :], sub[None, :, :])  # (K, m)
        new_assign = np.argmin(d, axis=0)
        for j in range(n_centers):  # re-seed any emptied cluster at its farthest point
            if not np.any(new_assign == j):
                new_assign[int(np.argmax(np.min(d, axis=0)))] = j
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(n_centers):
            members = np.flatnonzero(assign == j)
            mass = float(sw[members].sum())
            member_w = sw[members] / mass if mass > 0 else np.full(len(members), 1.0 / len(members))
            centers[j] = frechet_mean(sub[members], member_w,
                                      frechet_config, init=centers[j])

    pis = np.array([sw[assign == j].sum() for j in range(n_centers)])
    return Mixture(centers, pis / pis.sum())


def multi_center_objective(mixture: Mixture, points, w,
                           top_m: int | None = None) -> float:
    """Weighted within-cluster squared geodesic distance of a mixture."""
    pts = check_point(points, "points")
    wv = check_weights(w, len(pts))
    m = min(top_m or min(len(pts), 512), len(pts))
    order = np.argsort(-wv, kind="stable")[:m]
    sub, sw = pts[order], normalize_weights(wv[order])
    d = distance(mixture.centers[:, None, :], sub[None, :, :])
    return float(np.dot(sw, np.min(d, axis=0) ** 2))


def _kmeanspp_indices(pts: np.ndarray, w: np.ndarray, k: int,
                      rng: np.random.Generator) -> np.ndarray:
    chosen = [int(rng.choice(len(pts), p=w))]
    d2 = distance(pts[chosen[0]], pts) ** 2
    for _ in range(1, k):
        probs = w * d2
        total = probs.sum()
        if total <= 0:
            # remaining mass sits on already-chosen duplicates: take any new index
            remaining = [i for i in range(len(pts)) if i not in set(chosen)]
            chosen.append(int(remaining[0]))
        else:
            chosen.append(int(rng.choice(len(pts), p=probs / total)))
        d2 = np.minimum(d2, distance(pts[chosen[-1]], pts) ** 2)
    return np.array(chosen)
