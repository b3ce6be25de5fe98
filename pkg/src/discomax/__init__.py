"""Supervised dimensionality reduction by maximizing sample distance
correlation between a learned embedding and the response."""

__version__ = "0.1.0"

from .data import Dataset, load_csv
from .distance_stats import (LaplacianPair, build_laplacians, classical_dcor2,
                             classical_dcov2, double_center, laplacian_dcor2,
                             laplacian_dcov2, pairwise_distances)
from .errors import DiscomaxError
from .solver import EmbeddingResult, SolverConfig, run

__all__ = [
    "Dataset", "load_csv", "LaplacianPair", "build_laplacians", "classical_dcor2",
    "classical_dcov2", "double_center", "laplacian_dcor2", "laplacian_dcov2",
    "pairwise_distances", "DiscomaxError", "EmbeddingResult", "SolverConfig", "run",
]
