"""Weighted Frechet means on the Poincare ball via tangent-space iteration.

The mean minimizes F(z) = sum_i w_i d(z, v_i)^2. On the ball this functional
is strictly convex, so the minimizer is unique; we find it with the classical
Karcher fixed-point scheme: average the log-mapped points in the tangent
space at the current iterate, exponentiate back, repeat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DEFAULT_PROJECTION_MARGIN,
    _dist,
    _exp,
    _log,
    check_point,
    distance,
)

WEIGHT_SUM_TOL = 1e-6


@dataclass(frozen=True)
class FrechetConfig:
    """Knobs for the Karcher iteration."""

    max_iterations: int = 100
    step_size: float = 1.0
    gradient_tolerance: float = 1e-8
    projection_margin: float = DEFAULT_PROJECTION_MARGIN

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 < self.step_size <= 1.0:
            raise ValueError("step_size must be in (0, 1]")
        if self.gradient_tolerance <= 0.0:
            raise ValueError("gradient_tolerance must be positive")
        if not 0.0 < self.projection_margin < 1.0:
            raise ValueError("projection_margin must be in (0, 1)")


@dataclass
class FrechetInfo:
    """Diagnostics for one mean computation.

    stop_reason is "gradient_tolerance" when the tangent-average norm fell
    below tolerance, "max_iterations" when the budget ran out, and
    "step_stalled" when 20 step halvings could not decrease the objective.
    """

    converged: bool
    iterations: int
    gradient_norm: float
    stop_reason: str
    objective_trace: list = field(default_factory=list)


def check_weights(w, n: int | None = None) -> np.ndarray:
    """Validate a weight vector: nonnegative, finite, summing to one."""
    a = np.asarray(w, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"weights must be a 1-D vector, got shape {a.shape}")
    if n is not None and len(a) != n:
        raise ValueError(f"expected {n} weights, got {len(a)}")
    if not np.all(np.isfinite(a)):
        raise ValueError("weights contain non-finite values")
    if np.any(a < 0.0):
        raise ValueError("weights must be nonnegative")
    total = float(a.sum())
    if total <= 0.0:
        raise ValueError("weights have zero total mass")
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1, got {total:.12g}")
    return a


def normalize_weights(w) -> np.ndarray:
    """Scale a nonnegative vector to sum to one; rejects zero total mass."""
    a = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a < 0.0):
        raise ValueError("weights must be finite and nonnegative")
    total = float(a.sum())
    if total <= 0.0:
        raise ValueError("weights have zero total mass")
    return a / total


def frechet_objective(z, points, w) -> float:
    """Weighted sum of squared geodesic distances from z to the points."""
    z = check_point(z, "z")
    pts = check_point(points, "points")
    if pts.ndim != 2:
        raise ValueError(f"points must be an (N, d) array, got shape {pts.shape}")
    wv = check_weights(w, len(pts))
    d = distance(z, pts)
    return float(np.dot(wv, d * d))


def frechet_mean(points, w, config: FrechetConfig | None = None, init=None,
                 return_info: bool = False):
    """Weighted Frechet mean of a point set on the ball.

    Starts from `init` when given, otherwise from the point carrying the
    largest weight. Each step maps the points into the tangent space at the
    current iterate, takes the weighted average u_bar, and moves along
    exp(step * u_bar); if the objective would increase the step is halved
    (up to 20 times). Iteration stops when ||u_bar|| drops below the
    gradient tolerance or the iteration budget is exhausted.

    The trial step is capped at 2 / (1 + L) where L = sum_i w_i d_i coth(d_i)
    bounds the objective's Hessian: the pure unit step is only stable for
    concentrated data (L near 1) and oscillates when heavy points sit far
    from the iterate. The cap leaves the classical step intact in the
    concentrated case and restores linear convergence in the spread one.
    """
    cfg = config or FrechetConfig()
    pts = check_point(points, "points")
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a nonempty (N, d) array")
    wv = check_weights(w, len(pts))

    if init is None:
        mu = pts[int(np.argmax(wv))].copy()
    else:
        mu = check_point(init, "init").copy()
        if mu.shape != (pts.shape[1],):
            raise ValueError("init has wrong dimension")

    limit = 1.0 - cfg.projection_margin
    obj = float(np.dot(wv, _dist(mu, pts) ** 2))
    trace = [obj]
    gnorm = np.inf
    reason = "max_iterations"
    iterations = 0

    for _ in range(cfg.max_iterations):
        tangents = _log(mu, pts)
        u_bar = wv @ tangents
        gnorm = float(np.linalg.norm(u_bar))
        if gnorm < cfg.gradient_tolerance:
            reason = "gradient_tolerance"
            break
        lam_mu = 2.0 / (1.0 - float(mu @ mu))
        dists = lam_mu * np.linalg.norm(tangents, axis=-1)
        ratio = dists / np.tanh(np.clip(dists, 1e-12, 20.0))
        smooth = float(wv @ np.where(dists > 1e-9, ratio, 1.0))
        step = min(cfg.step_size, 2.0 / (1.0 + smooth))
        accepted = False
        for _ in range(20):
            cand = _exp(mu, step * u_bar)
            cnorm = float(np.linalg.norm(cand))
            if cnorm > limit:
                cand = cand * (limit / cnorm)
            cand_obj = float(np.dot(wv, _dist(cand, pts) ** 2))
            if cand_obj <= obj + 1e-15 * max(1.0, abs(obj)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            reason = "step_stalled"
            break
        mu, obj = cand, cand_obj
        trace.append(obj)
        iterations += 1

    if return_info:
        info = FrechetInfo(
            converged=reason == "gradient_tolerance",
            iterations=iterations,
            gradient_norm=gnorm,
            stop_reason=reason,
            objective_trace=trace,
        )
        return mu, info
    return mu
