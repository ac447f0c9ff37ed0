"""Continuous level-of-detail for graph-embedded knowledge.

Heat-kernel diffusion on a graph Laplacian supplies scale-dependent weights,
weighted Frechet means on the Poincare ball aggregate embeddings into
summaries, and a boundary scanner locates the scales where the summary
changes character.
"""

from .boundary import (
    Boundary,
    BoundaryReport,
    IndicatorSeries,
    Mixture,
    ScaleGrid,
    boundary_scan,
    composite_score,
    multi_center,
    neighborhood_churn,
    peak_pick,
    representation_velocity,
    slod_at_scale,
)
from .frechet import FrechetConfig, FrechetInfo, frechet_mean, frechet_objective
from .geometry import (
    conformal_factor,
    distance,
    exp_map,
    log_map,
    mobius_add,
    project_to_ball,
)
from .graph import (
    HsbmSpec,
    SparseGraph,
    Tree,
    generate_hsbm,
    knn_graph,
    ks_snr,
    largest_connected_component,
    normalized_laplacian,
    sarkar_embed_tree,
)
from .metrics import BoundaryMatchResult, ari, boundary_prf, jsd, kendall_tau, vi
from .spectral import (
    ScanThresholds,
    SpectralDecomposition,
    effective_dimensionality,
    heat_kernel_weights,
    partial_eigendecomposition,
    spectral_ball_embedding,
    spectral_clustering,
    spectral_gap_candidates,
)

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "BoundaryMatchResult",
    "BoundaryReport",
    "FrechetConfig",
    "FrechetInfo",
    "HsbmSpec",
    "IndicatorSeries",
    "Mixture",
    "ScaleGrid",
    "ScanThresholds",
    "SparseGraph",
    "SpectralDecomposition",
    "Tree",
    "ari",
    "boundary_prf",
    "boundary_scan",
    "composite_score",
    "conformal_factor",
    "distance",
    "effective_dimensionality",
    "exp_map",
    "frechet_mean",
    "frechet_objective",
    "generate_hsbm",
    "heat_kernel_weights",
    "jsd",
    "kendall_tau",
    "knn_graph",
    "ks_snr",
    "largest_connected_component",
    "log_map",
    "mobius_add",
    "multi_center",
    "neighborhood_churn",
    "normalized_laplacian",
    "partial_eigendecomposition",
    "peak_pick",
    "project_to_ball",
    "representation_velocity",
    "sarkar_embed_tree",
    "slod_at_scale",
    "spectral_ball_embedding",
    "spectral_clustering",
    "spectral_gap_candidates",
    "vi",
]
