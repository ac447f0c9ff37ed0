"""Poincare ball primitives: Mobius addition, geodesic distance, exp/log maps.

Points are numpy arrays whose last axis is the ball dimension (d >= 2); all
operations broadcast over leading axes, so a single point has shape (d,) and
a point set has shape (N, d). Every input point must lie strictly inside the
open unit ball. Tangent vectors are plain arrays expressed at an explicit
base point; they are not wrapped in a separate type.
"""

from __future__ import annotations

import numpy as np

# Cap on artanh/tanh arguments: keeps rounding noise from producing inf or a
# point landing exactly on the unit sphere.
_TANH_CAP = 1.0 - 1e-15

DEFAULT_PROJECTION_MARGIN = 1e-5


def check_point(x, name: str = "point") -> np.ndarray:
    """Validate ball membership and return the input as a float array."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0 or a.shape[-1] < 2:
        raise ValueError(f"{name} must have dimension >= 2, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    norms = np.linalg.norm(a, axis=-1)
    if np.any(norms >= 1.0):
        raise ValueError(
            f"{name} must lie strictly inside the unit ball "
            f"(max norm {float(np.max(norms)):.17g})"
        )
    return a


def _same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


# Unchecked kernels: the public wrappers below validate inputs once and the
# iterative code paths (Karcher loop, tree embedding, scans) call these
# directly on points they already know are valid.

def _mobius(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    y2 = np.sum(y * y, axis=-1, keepdims=True)
    xy = np.sum(x * y, axis=-1, keepdims=True)
    num = (1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y
    den = 1.0 + 2.0 * xy + x2 * y2
    return num / den


def _dist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    diff2 = np.sum((x - y) ** 2, axis=-1)
    x2 = np.sum(x * x, axis=-1)
    y2 = np.sum(y * y, axis=-1)
    arg = 1.0 + 2.0 * diff2 / ((1.0 - x2) * (1.0 - y2))
    return np.arccosh(np.maximum(arg, 1.0))


def _log(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    w = _mobius(-x, y)
    wnorm = np.linalg.norm(w, axis=-1, keepdims=True)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    safe = np.maximum(wnorm, np.finfo(float).tiny)
    scale = (1.0 - x2) * np.arctanh(np.minimum(wnorm, _TANH_CAP)) / safe
    return np.where(wnorm > 0.0, scale * w, np.zeros_like(w))


def _exp(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    vnorm = np.linalg.norm(v, axis=-1, keepdims=True)
    x2 = np.sum(x * x, axis=-1, keepdims=True)
    scale = np.minimum(np.tanh(vnorm / (1.0 - x2)), _TANH_CAP)
    safe = np.maximum(vnorm, np.finfo(float).tiny)
    out = _mobius(x, scale * v / safe)
    return np.where(vnorm > 0.0, out, np.broadcast_to(x, out.shape))


def mobius_add(x, y) -> np.ndarray:
    """Mobius addition x (+) y, the gyrovector translation of y by x.

    Uses the standard form
        ((1 + 2<x,y> + |y|^2) x + (1 - |x|^2) y) / (1 + 2<x,y> + |x|^2 |y|^2),
    which satisfies x (+) 0 = x and (-x) (+) x = 0.
    """
    x = check_point(x, "x")
    y = check_point(y, "y")
    _same_dim(x, y)
    return _mobius(x, y)


def conformal_factor(x) -> np.ndarray | float:
    """Conformal factor lambda_x = 2 / (1 - |x|^2); equals 2 at the origin."""
    x = check_point(x, "x")
    val = 2.0 / (1.0 - np.sum(x * x, axis=-1))
    return float(val) if np.isscalar(val) or val.ndim == 0 else val


def distance(x, y) -> np.ndarray | float:
    """Geodesic distance arcosh(1 + 2 |x-y|^2 / ((1-|x|^2)(1-|y|^2)))."""
    x = check_point(x, "x")
    y = check_point(y, "y")
    _same_dim(x, y)
    # arccosh argument is clamped at 1: rounding can push it a hair below
    # for coincident points
    val = _dist(x, y)
    return float(val) if val.ndim == 0 else val


def exp_map(x, v) -> np.ndarray:
    """Exponential map at x: x (+) (tanh(lambda_x |v| / 2) v / |v|).

    The zero vector maps back to x exactly.
    """
    x = check_point(x, "x")
    v = np.asarray(v, dtype=float)
    _same_dim(x, v)
    if not np.all(np.isfinite(v)):
        raise ValueError("tangent vector contains non-finite values")
    return _exp(x, v)


def log_map(x, y) -> np.ndarray:
    """Logarithmic map at x, the inverse of exp_map.

    Returns (2 / lambda_x) artanh(|w|) w / |w| with w = (-x) (+) y; the zero
    vector when x == y.
    """
    x = check_point(x, "x")
    y = check_point(y, "y")
    _same_dim(x, y)
    return _log(x, y)


def project_to_ball(x, margin: float = DEFAULT_PROJECTION_MARGIN) -> np.ndarray:
    """Radially clamp x to norm <= 1 - margin; interior points pass through."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0 or a.shape[-1] < 2:
        raise ValueError(f"point must have dimension >= 2, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot project non-finite input")
    if not 0.0 < margin < 1.0:
        raise ValueError(f"margin must be in (0, 1), got {margin}")
    norms = np.linalg.norm(a, axis=-1, keepdims=True)
    limit = 1.0 - margin
    scale = np.where(norms > limit, limit / np.maximum(norms, np.finfo(float).tiny), 1.0)
    return a * scale
