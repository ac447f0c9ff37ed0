"""Scoring: divergences, partition agreement, rank correlation, boundary P/R."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau
from sklearn.metrics import adjusted_rand_score

LN2 = float(np.log(2.0))


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in nats: symmetric, finite, in [0, ln 2].

    Uses the 0 log 0 = 0 convention; its square root is a metric.
    """
    pa = np.asarray(p, dtype=float)
    qa = np.asarray(q, dtype=float)
    if pa.shape != qa.shape or pa.ndim != 1:
        raise ValueError("p and q must be 1-D vectors of equal length")
    if np.any(pa < 0) or np.any(qa < 0):
        raise ValueError("distributions must be nonnegative")
    m = 0.5 * (pa + qa)
    val = 0.5 * _kl(pa, m) + 0.5 * _kl(qa, m)
    return float(min(max(val, 0.0), LN2))


def _kl(p: np.ndarray, m: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / m[mask])))


def ari(a, b) -> float:
    """Adjusted Rand index; 1 iff the partitions agree up to relabeling."""
    la, lb = _check_labels(a, b)
    return float(adjusted_rand_score(la, lb))


def vi(a, b) -> float:
    """Variation of information H(a) + H(b) - 2 I(a, b), natural log.

    A true metric on partitions: zero iff equal up to relabeling.
    """
    la, lb = _check_labels(a, b)
    n = len(la)
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    joint = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(joint, (ia, ib), 1.0)
    joint /= n
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    ha = -np.sum(pa[pa > 0] * np.log(pa[pa > 0]))
    hb = -np.sum(pb[pb > 0] * np.log(pb[pb > 0]))
    nz = joint > 0
    mi = np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz]))
    return float(max(ha + hb - 2.0 * mi, 0.0))


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall tau-b between two equal-length sequences."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("inputs must be 1-D vectors of equal length")
    if len(xa) < 2:
        raise ValueError("need at least 2 observations")
    return float(kendalltau(xa, ya).statistic)


@dataclass
class BoundaryMatchResult:
    """Greedy one-to-one matching of detected against planted scales."""

    precision: float
    recall: float
    matched: list  # (detected sigma, planted sigma) pairs

    def __post_init__(self) -> None:
        if not (0.0 <= self.precision <= 1.0 and 0.0 <= self.recall <= 1.0):
            raise ValueError("precision/recall must lie in [0, 1]")


def boundary_prf(detected, planted, tol: float = 0.15) -> BoundaryMatchResult:
    """Precision/recall of detected boundary scales in log10-sigma space.

    A detected scale matches a planted one when |log10 d - log10 p| <= tol;
    matching is greedy nearest-first and one-to-one. Empty lists follow the
    usual conventions: precision 1 with no detections, recall 1 with no
    planted scales.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    det = np.asarray(detected, dtype=float).reshape(-1)
    pla = np.asarray(planted, dtype=float).reshape(-1)
    if np.any(det <= 0) or np.any(pla <= 0):
        raise ValueError("scales must be positive")
    pairs = []
    for i, d in enumerate(det):
        for j, p in enumerate(pla):
            gap = abs(np.log10(d) - np.log10(p))
            if gap <= tol:
                pairs.append((gap, i, j))
    pairs.sort()
    used_d: set = set()
    used_p: set = set()
    matched = []
    for _, i, j in pairs:
        if i in used_d or j in used_p:
            continue
        used_d.add(i)
        used_p.add(j)
        matched.append((float(det[i]), float(pla[j])))
    precision = len(matched) / len(det) if len(det) else 1.0
    recall = len(matched) / len(pla) if len(pla) else 1.0
    return BoundaryMatchResult(precision, recall, matched)


def _check_labels(a, b):
    la = np.asarray(a).reshape(-1)
    lb = np.asarray(b).reshape(-1)
    if len(la) != len(lb):
        raise ValueError(f"partition length mismatch: {len(la)} vs {len(lb)}")
    if len(la) == 0:
        raise ValueError("partitions must be nonempty")
    return la, lb
