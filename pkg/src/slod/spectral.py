"""Partial eigendecompositions and spectral heat-kernel machinery.

The diffusion kernel at scale sigma is evaluated from the k smallest
Laplacian eigenpairs as sum_i exp(-sigma lambda_i) phi_i(x0) phi_i(j); the
dense matrix exponential is never formed. Truncation error of the kernel is
bounded by the tail sum of exp(-sigma lambda_i) over the dropped modes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg
from sklearn.cluster import KMeans

# Graphs up to this size use a dense symmetric solver; larger ones go through
# Lanczos iteration on the shifted operator 2I - L.
DENSE_SOLVER_MAX_N = 512
DEFAULT_RETAINED_MODES = 50
ZERO_EIGENVALUE_FLOOR = 1e-10
RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class ScanThresholds:
    """Mode-survival cutoff for K*(sigma) and the spectral-gap ratio bar.

    mode_threshold defaults to exp(-1) so that K* drops from k to k-1
    exactly where sigma crosses 1/lambda_k.
    """

    mode_threshold: float = math.exp(-1.0)
    gap_ratio_threshold: float = 2.0

    def __post_init__(self) -> None:
        if not 0.0 < self.mode_threshold < 1.0:
            raise ValueError("mode_threshold must be in (0, 1)")
        if self.gap_ratio_threshold <= 1.0:
            raise ValueError("gap_ratio_threshold must exceed 1")


@dataclass
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors of a Laplacian."""

    eigenvalues: np.ndarray   # (k,) in [0, 2]
    eigenvectors: np.ndarray  # (n, k), columns orthonormal

    def __post_init__(self) -> None:
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        self.eigenvectors = np.asarray(self.eigenvectors, dtype=float)
        if self.eigenvectors.ndim != 2 or self.eigenvectors.shape[1] != len(self.eigenvalues):
            raise ValueError("eigenvector matrix must be (n, k)")
        if np.any(np.diff(self.eigenvalues) < -1e-10):
            raise ValueError("eigenvalues must be ascending")
        if self.eigenvalues[0] < -1e-9 or self.eigenvalues[-1] > 2.0 + 1e-9:
            raise ValueError("eigenvalues outside [0, 2]")
        # snap rounding noise at both spectrum ends
        self.eigenvalues = np.clip(self.eigenvalues, 0.0, 2.0)
        self.eigenvalues[self.eigenvalues < 1e-12] = 0.0
        self.eigenvalues[self.eigenvalues > 2.0 - 1e-12] = 2.0

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def k_retained(self) -> int:
        return len(self.eigenvalues)


def partial_eigendecomposition(lap, k: int) -> SpectralDecomposition:
    """k smallest eigenpairs of a symmetric (sparse) matrix.

    Dense solve for small matrices, Lanczos (largest eigenpairs of 2I - L)
    otherwise. Residuals ||L phi - lambda phi|| are verified per pair and
    eigenvector signs are fixed so the largest-magnitude entry is positive.
    """
    mat = sparse.csr_matrix(lap) if not sparse.issparse(lap) else lap.tocsr()
    n = mat.shape[0]
    if mat.shape[0] != mat.shape[1]:
        raise ValueError("matrix must be square")
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    asym = abs(mat - mat.T)
    if asym.nnz and asym.max() > 1e-10:
        raise ValueError("matrix is not symmetric")

    if n <= DENSE_SOLVER_MAX_N or k >= n - 1:
        vals, vecs = scipy.linalg.eigh(mat.toarray())
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        shifted = 2.0 * sparse.identity(n, format="csr") - mat
        v0 = np.full(n, 1.0 / math.sqrt(n))
        mu, vecs = sparse_linalg.eigsh(shifted, k=k, which="LA", v0=v0)
        vals = 2.0 - mu
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]

    residual = mat @ vecs - vecs * vals
    worst = float(np.linalg.norm(residual, axis=0).max())
    if worst > RESIDUAL_TOL:
        raise RuntimeError(f"eigensolver residual {worst:.3g} exceeds {RESIDUAL_TOL}")

    flip = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])])
    flip[flip == 0] = 1.0
    return SpectralDecomposition(vals, vecs * flip)


def heat_kernel_weights(dec: SpectralDecomposition, focus: int, sigma: float) -> np.ndarray:
    """Normalized heat-kernel row K_sigma(focus, .) as a weight vector.

    Small negative kernel values caused by spectral truncation are clamped
    to zero before normalization.
    """
    return heat_kernel_weight_table(dec, focus, np.array([sigma]))[0]


def heat_kernel_weight_table(dec: SpectralDecomposition, focus: int,
                             sigmas) -> np.ndarray:
    """Weight vectors for many scales at once; rows sum to one."""
    sig = np.asarray(sigmas, dtype=float).reshape(-1)
    if np.any(sig < 0) or not np.all(np.isfinite(sig)):
        raise ValueError("scales must be finite and nonnegative")
    if not 0 <= int(focus) < dec.n:
        raise ValueError(f"focus {focus} out of range for n={dec.n}")
    decay = np.exp(-np.outer(sig, dec.eigenvalues))          # (T, k)
    kernel = (decay * dec.eigenvectors[int(focus)]) @ dec.eigenvectors.T
    kernel = np.maximum(kernel, 0.0)
    totals = kernel.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise RuntimeError("heat kernel row vanished; decomposition too truncated")
    return kernel / totals


def effective_dimensionality(dec: SpectralDecomposition, sigma: float,
                             mode_threshold: float) -> int:
    """Count of modes with exp(-sigma lambda_k) strictly above the threshold.

    Non-increasing in sigma; at least 1 for any graph because lambda_1 = 0.
    """
    if not 0.0 < mode_threshold < 1.0:
        raise ValueError("mode_threshold must be in (0, 1)")
    if sigma < 0 or not np.isfinite(sigma):
        raise ValueError("sigma must be finite and nonnegative")
    return int(np.count_nonzero(np.exp(-sigma * dec.eigenvalues) > mode_threshold))


def spectral_gap_candidates(dec: SpectralDecomposition,
                            gap_ratio_threshold: float = 2.0) -> list:
    """Candidate scales (k, 1/lambda_k) where lambda_{k+1}/lambda_k > R.

    k is the 1-based mode index. Eigenvalues at or below the numerical zero
    floor are skipped. Candidates come out in decreasing sigma order.
    """
    if gap_ratio_threshold <= 1.0:
        raise ValueError("gap_ratio_threshold must exceed 1")
    vals = dec.eigenvalues
    out = []
    for i in range(len(vals) - 1):
        lam = vals[i]
        if lam <= ZERO_EIGENVALUE_FLOOR:
            continue
        if vals[i + 1] / lam > gap_ratio_threshold:
            out.append((i + 1, 1.0 / lam))
    return out


def spectral_clustering(dec: SpectralDecomposition, n_clusters: int,
                        seed: int = 0) -> np.ndarray:
    """Normalized-cut style clustering on the first K eigenvectors.

    Rows of the (n, K) eigenvector block are normalized to unit length and
    fed to k-means with 10 restarts under the squared-Euclidean objective.
    Labels are relabeled to first-appearance order for determinism.
    """
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    if n_clusters > dec.k_retained:
        raise ValueError(f"n_clusters={n_clusters} exceeds retained modes {dec.k_retained}")
    features = dec.eigenvectors[:, :n_clusters].copy()
    norms = np.linalg.norm(features, axis=1)
    nz = norms > 0
    features[nz] /= norms[nz, None]
    km = KMeans(n_clusters=n_clusters, n_init=10,
                random_state=int(seed) % (2**32))
    raw = km.fit_predict(features)
    if len(np.unique(raw)) < n_clusters:
        warnings.warn(f"k-means produced fewer than {n_clusters} clusters", stacklevel=2)
    return _relabel_first_appearance(raw)


def spectral_ball_embedding(dec: SpectralDecomposition, dim: int = 10,
                            max_norm: float = 0.7) -> np.ndarray:
    """Deterministic ball coordinates for graph nodes from low eigenvectors.

    Diffusion-map style: column k is phi_k / lambda_k, so slow structural
    modes dominate the geometry and fast within-community modes contribute
    little. Rows are then scaled globally so the farthest point sits at
    max_norm. Used when a scan runs from a bare graph with no supplied
    embedding; one zero column is appended if only a single nontrivial mode
    is available (ball points need d >= 2).
    """
    if not 0.0 < max_norm < 1.0:
        raise ValueError("max_norm must be in (0, 1)")
    if dec.k_retained < 2:
        raise ValueError("need at least 2 retained modes to embed")
    width = min(dim, dec.k_retained - 1)
    lam = np.maximum(dec.eigenvalues[1:1 + width], ZERO_EIGENVALUE_FLOOR)
    coords = dec.eigenvectors[:, 1:1 + width] / lam
    if coords.shape[1] < 2:
        coords = np.column_stack([coords, np.zeros(len(coords))])
    top = float(np.linalg.norm(coords, axis=1).max())
    if top > 0:
        coords *= max_norm / top
    return coords


def _relabel_first_appearance(labels: np.ndarray) -> np.ndarray:
    mapping: dict = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        out[i] = mapping.setdefault(int(lab), len(mapping))
    return out
