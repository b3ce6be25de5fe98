"""Sample distance covariance / correlation, classical and Laplacian forms.

Classical statistics double-center the *plain* Euclidean distance matrices.
The Laplacian statistics work with *squared* distances: the adjacency
``S = 1/2 J E J`` has zero row sums, so its Laplacian ``Degree(S) - S`` reduces
to ``-1/2 J E J``, the centered Gram matrix. For any ``Xhat``::

    Tr(Xhat^T L Xhat) = 1/2 * sum_ij S_ij * ||Xhat_i - Xhat_j||^2

The two families are never substituted for each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateEmbeddingError, DegenerateResponseError,
                     InsufficientSamplesError, ShapeError)
from .linalg import as_matrix, pinv_diag

VARIANCE_FLOOR = 1e-14


class DistanceMatrices(NamedTuple):
    sq: np.ndarray  # E, squared Euclidean distances
    plain: np.ndarray  # D


class CovarianceTrace(NamedTuple):
    value: float  # (2 / n^2) * trace
    trace: float


@dataclass(frozen=True)
class LaplacianPair:
    """Laplacians of the features and the response, built once per fit.

    ``k = n / (2 Tr(Y^T L_Y Y))`` is the scale constant of the as-stated
    correlation ratio. ``diag_lx_pinv`` is ``Diag(L_X)^+``.
    """

    lx: np.ndarray
    ly: np.ndarray
    diag_lx_pinv: np.ndarray
    k: float
    y_trace: float  # Tr(Y^T L_Y Y)
    y: np.ndarray

    @property
    def n(self) -> int:
        return self.lx.shape[0]


def _check_rows(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape[0] != q.shape[0]:
        raise ShapeError(f"row-count mismatch: {p.shape[0]} vs {q.shape[0]}")


def pairwise_distances(points) -> DistanceMatrices:
    p = as_matrix(points, "P")
    if p.shape[0] < 2:
        raise InsufficientSamplesError("need at least 2 samples")
    # (a-b)^2 == (b-a)^2 bitwise, so the result is exactly symmetric
    diff = p[:, None, :] - p[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return DistanceMatrices(sq, np.sqrt(sq))


def double_center(m) -> np.ndarray:
    """``J M J`` via ``M_kl - rowmean_k - colmean_l + grandmean``."""
    m = as_matrix(m, "M")
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"M must be square, got {m.shape}")
    row = m.mean(axis=1, keepdims=True)
    col = m.mean(axis=0, keepdims=True)
    return m - row - col + m.mean()


def classical_dcov2(p, q) -> float:
    """Sample distance covariance ``(1/n^2) sum_kl A_kl B_kl``."""
    p, q = as_matrix(p, "P"), as_matrix(q, "Q")
    _check_rows(p, q)
    a = double_center(pairwise_distances(p).plain)
    b = double_center(pairwise_distances(q).plain)
    n = p.shape[0]
    return max(float(np.sum(a * b)) / n**2, 0.0)


def classical_dcor2(p, q) -> float:
    """Squared sample distance correlation; 0 if either argument is constant."""
    p, q = as_matrix(p, "P"), as_matrix(q, "Q")
    _check_rows(p, q)
    n = p.shape[0]
    a = double_center(pairwise_distances(p).plain)
    b = double_center(pairwise_distances(q).plain)
    vxy = max(float(np.sum(a * b)) / n**2, 0.0)
    vxx = float(np.sum(a * a)) / n**2
    vyy = float(np.sum(b * b)) / n**2
    if vxx <= VARIANCE_FLOOR or vyy <= VARIANCE_FLOOR:
        return 0.0
    return vxy / np.sqrt(vxx * vyy)


def laplacian(points) -> np.ndarray:
    """``Degree(S) - S`` with adjacency ``S = 1/2 J E J``."""
    adj = 0.5 * double_center(pairwise_distances(points).sq)
    lap = np.diag(adj.sum(axis=1)) - adj
    return 0.5 * (lap + lap.T)


def quad_trace(xhat: np.ndarray, lap: np.ndarray) -> float:
    """``Tr(Xhat^T L Xhat)``."""
    return float(np.sum(xhat * (lap @ xhat)))


def build_laplacians(x, y) -> LaplacianPair:
    x, y = as_matrix(x, "X"), as_matrix(y, "Y")
    _check_rows(x, y)
    if np.all(y == y[0]):
        raise DegenerateResponseError("response is constant")
    lx = laplacian(x)
    ly = laplacian(y)
    y_trace = quad_trace(y, ly)
    if y_trace <= 0:
        raise DegenerateResponseError("response has zero distance variance")
    n = x.shape[0]
    diag = np.diag(lx).copy()
    # roundoff leaves points at the feature mean with |L_ii| ~ 1e-17
    diag[np.abs(diag) <= 1e-12 * np.abs(diag).max()] = 0.0
    return LaplacianPair(
        lx=lx,
        ly=ly,
        diag_lx_pinv=pinv_diag(diag),
        k=n / (2.0 * y_trace),
        y_trace=y_trace,
        y=y,
    )


def laplacian_dcov2(xhat, lap) -> CovarianceTrace:
    """``(2/n^2) Tr(Xhat^T L Xhat)``, plus the raw trace.

    The n^2 normalization matches the classical sample covariance; the raw
    trace is returned so a ``2/n`` convention is recoverable by the caller.
    """
    xhat, lap = as_matrix(xhat, "Xhat"), as_matrix(lap, "L")
    if lap.shape != (xhat.shape[0], xhat.shape[0]):
        raise ShapeError(f"L has shape {lap.shape}, expected {(xhat.shape[0],) * 2}")
    tr = quad_trace(xhat, lap)
    n = xhat.shape[0]
    return CovarianceTrace(2.0 * tr / n**2, tr)


def laplacian_dcor2(xhat, pair: LaplacianPair, mode: str = "normalized") -> float:
    """Laplacian distance correlation of ``Xhat`` against the response.

    ``as_stated``:  ``k Tr(Xhat^T L_Y Xhat) / Tr(Xhat^T L_Xhat Xhat)``
    ``normalized``: ``Tr(Xhat^T L_Y Xhat) / sqrt(Tr(Xhat^T L_Xhat Xhat) Tr(Y^T L_Y Y))``

    ``L_Xhat`` is rebuilt from ``Xhat`` itself. The normalized form is a
    Cauchy-Schwarz ratio of centered Grams and lies in [0, 1].
    """
    xhat = as_matrix(xhat, "Xhat")
    if xhat.shape[0] != pair.n:
        raise ShapeError(f"Xhat has {xhat.shape[0]} rows, expected {pair.n}")
    if np.all(xhat == xhat[0]):
        raise DegenerateEmbeddingError("embedding is constant")
    cross = max(quad_trace(xhat, pair.ly), 0.0)
    own = max(quad_trace(xhat, laplacian(xhat)), 0.0)
    if own <= 0:
        raise DegenerateEmbeddingError("embedding has zero distance variance")
    if mode == "as_stated":
        return pair.k * cross / own
    if mode == "normalized":
        return cross / np.sqrt(own * pair.y_trace)
    raise ValueError(f"unknown mode {mode!r}")
