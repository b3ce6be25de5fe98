"""Dense linear-algebra substrate.

Symmetric eigendecomposition is a cyclic Jacobi method using a round-robin
(parallel) ordering, so each round applies ``n/2`` disjoint plane rotations
with vectorized numpy updates. Everything else (pseudoinverses, PSD ordering
tests) is built on top of it; the spectral radius comes from power iteration.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonFiniteError, NotPSDError, ShapeError, SymmetryError

SYMMETRY_ATOL = 1e-10


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order and orthonormal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray


class RadiusEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array. 1-D input becomes a column."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size == 0:
        raise ShapeError(f"{name} is empty")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return m


def _check_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")


def _check_symmetric(a: np.ndarray, name: str, atol: float = SYMMETRY_ATOL) -> None:
    _check_square(a, name)
    asym = np.max(np.abs(a - a.T))
    if asym > atol:
        raise SymmetryError(f"{name} is not symmetric (max |A - A^T| = {asym:.3g})")


def frobenius(a) -> float:
    return float(np.sqrt(np.sum(np.square(a))))


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep: every index pair appears in exactly one round."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        left = np.array(players[: m // 2])
        right = np.array(players[::-1][: m // 2])
        keep = (left < n) & (right < n)
        p, q = np.minimum(left, right)[keep], np.maximum(left, right)[keep]
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def sym_eigen(a, tol: float = 1e-14, max_sweeps: int = 100) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Sweeps stop once the off-diagonal Frobenius norm is at most
    ``tol * ||A||_F``. The result is deterministic for identical input.

    Raises
    ------
    ShapeError
        Non-square input.
    SymmetryError
        ``max |A - A^T| > 1e-10``.
    """
    a = as_matrix(a, "A")
    _check_symmetric(a, "A")
    n = a.shape[0]
    work = 0.5 * (a + a.T)
    vecs = np.eye(n)
    scale = frobenius(work)
    rounds = _round_robin(n) if n > 1 else []

    def off_norm(m):
        return frobenius(m - np.diag(np.diag(m)))

    sweeps = 0
    while n > 1 and off_norm(work) > tol * scale:
        if sweeps >= max_sweeps:
            raise ArithmeticError(f"Jacobi did not converge in {max_sweeps} sweeps")
        for p, q in rounds:
            apq = work[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (work[q, q] - work[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0))
            # for huge theta, t ~ 1 / (2 theta)
            t[big] = 0.5 / theta[big]
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            cols_p, cols_q = work[:, p].copy(), work[:, q].copy()
            work[:, p] = c * cols_p - s * cols_q
            work[:, q] = s * cols_p + c * cols_q
            rows_p, rows_q = work[p, :].copy(), work[q, :].copy()
            work[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
            work[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            work[p, q] = 0.0
            work[q, p] = 0.0

            vp, vq = vecs[:, p].copy(), vecs[:, q].copy()
            vecs[:, p] = c * vp - s * vq
            vecs[:, q] = s * vp + c * vq
        sweeps += 1

    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], vecs[:, order])


def pinv_psd(a, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues at or below ``rank_tol * lambda_max`` are treated as zero.
    Raises NotPSDError if any eigenvalue is below ``-rank_tol * ||A||_F``.
    """
    a = as_matrix(a, "A")
    vals, vecs = sym_eigen(a)
    norm = frobenius(a)
    if vals.size and vals[-1] < -rank_tol * norm:
        raise NotPSDError(f"matrix has eigenvalue {vals[-1]:.3g} < 0")
    lam_max = vals[0] if vals.size else 0.0
    inv = np.zeros_like(vals)
    keep = vals > rank_tol * lam_max
    inv[keep] = 1.0 / vals[keep]
    out = (vecs * inv) @ vecs.T
    return 0.5 * (out + out.T)


def pinv_diag(d, rank_tol: float = 1e-12) -> np.ndarray:
    """Pseudoinverse of a nonnegative diagonal matrix (given as matrix or vector)."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim == 2:
        _check_square(d, "D")
        if np.any(d - np.diag(np.diag(d))):
            raise ShapeError("D must be diagonal")
        diag = np.diag(d).copy()
    elif d.ndim == 1:
        diag = d.copy()
    else:
        raise ShapeError(f"D must be a diagonal matrix or vector, got shape {d.shape}")
    if not np.all(np.isfinite(diag)):
        raise NonFiniteError("D contains NaN or Inf")
    if np.any(diag < 0):
        raise NotPSDError("diagonal has a negative entry")
    out = np.zeros_like(diag)
    if diag.size and diag.max() > 0:
        keep = diag > rank_tol * diag.max()
        out[keep] = 1.0 / diag[keep]
    return np.diag(out)


def spectral_radius(a, max_iter: int = 5000, tol: float = 1e-10,
                    seed: int = 0) -> RadiusEstimate:
    """Largest eigenvalue magnitude by power iteration.

    The per-step estimate is ``||A x|| / ||x||`` on the normalized iterate,
    i.e. the square root of the Rayleigh quotient of ``A^T A``. Unlike
    ``x^T A x`` it stays correct when the dominant eigenvalues are a tied
    ``+/-`` pair (e.g. ``[[0, 2], [2, 0]]``). Iteration stops when successive
    estimates differ by at most ``tol`` (relative to the estimate); if that
    never happens the last estimate is returned with ``converged=False``.
    """
    a = as_matrix(a, "A")
    _check_square(a, "A")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not np.any(a):
        return RadiusEstimate(0.0, True, 0)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(a.shape[0])
    x /= np.linalg.norm(x)
    est = 0.0
    restarts = 0
    for it in range(1, max_iter + 1):
        y = a @ x
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            # landed in the null space; a nilpotent matrix may keep doing this
            restarts += 1
            if restarts > 10:
                return RadiusEstimate(0.0, False, it)
            x = rng.standard_normal(a.shape[0])
            x /= np.linalg.norm(x)
            continue
        if abs(ny - est) <= tol * max(ny, 1.0) and it > 1:
            return RadiusEstimate(ny, True, it)
        est = ny
        x = y / ny
    return RadiusEstimate(est, False, max_iter)


def min_eigenvalue(a) -> float:
    return float(sym_eigen(a).values[-1])


def psd_order_parts(a, b, tol: float = 1e-9) -> tuple[bool, bool]:
    """``(0 <= A, A <= B)`` in the Loewner order, each with relative slack ``tol``."""
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = b - a
    lower = min_eigenvalue(a) >= -tol * frobenius(a)
    upper = min_eigenvalue(diff) >= -tol * frobenius(diff)
    return lower, upper


def psd_order_check(a, b, tol: float = 1e-9) -> bool:
    """True iff ``0 <= A <= B`` (Loewner order) up to relative tolerance."""
    lower, upper = psd_order_parts(a, b, tol)
    return lower and upper
