"""Numerical checks on the loss and the convergence conditions.

The report evaluates every condition independently; none is assumed to
imply another.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .distance_stats import LaplacianPair, build_laplacians
from .linalg import as_matrix, psd_order_parts, spectral_radius
from .solver import gamma_interval, grad_G, loss_G, prescale, t_prime_radius
from .errors import ShapeError

PSD_TOL = 1e-9


@dataclass(frozen=True)
class ConvergenceReport:
    gamma_interval: tuple[float, float]
    gamma_used: float
    psd_lower_ok: bool  # 0 <= 2(L_Y - L_X)
    psd_upper_ok: bool  # 2(L_Y - L_X) <= 8 Diag(L_X)
    trace_condition_ok: bool
    t_prime_radius: float
    strong_attraction: bool
    mm_map_radius: float  # radius of the Jacobian of the update actually applied (w = 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gamma_interval"] = list(self.gamma_interval)
        return d


def directional_errors(xhat, pair: LaplacianPair, w: float, h: float = 1e-5,
                       seed: int = 0, n_dirs: int = 20) -> np.ndarray:
    """Per-direction errors of the analytic differential ``2 Tr(D^T C Xhat)``.

    Each error is ``|central difference - analytic|`` divided by
    ``||grad G||_F``, the largest directional derivative over unit
    directions, so near-orthogonal directions do not inflate it.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    xhat = as_matrix(xhat, "Xhat")
    rng = np.random.default_rng(seed)
    grad = grad_G(xhat, pair, w)
    scale = max(float(np.linalg.norm(grad)), np.finfo(float).tiny)
    errs = np.empty(n_dirs)
    for i in range(n_dirs):
        delta = rng.standard_normal(xhat.shape)
        # a zero draw is measure-zero but would carry no information
        while not np.any(delta):
            delta = rng.standard_normal(xhat.shape)
        delta /= np.linalg.norm(delta)
        analytic = float(np.sum(delta * grad))
        numeric = (loss_G(xhat + h * delta, pair, w)
                   - loss_G(xhat - h * delta, pair, w)) / (2 * h)
        errs[i] = abs(numeric - analytic) / scale
    return errs


def grad_check(xhat, pair: LaplacianPair, w: float, h: float = 1e-5,
               seed: int = 0) -> float:
    """Worst relative error over 20 seeded unit directions."""
    return float(directional_errors(xhat, pair, w, h, seed).max())


def trace_condition_check(x, y) -> bool:
    """``Tr(XX^T) + 4 sum_i ||X_i|| >= Tr(YY^T) >= Tr(XX^T)``, evaluated literally."""
    x, y = as_matrix(x, "X"), as_matrix(y, "Y")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"row-count mismatch: {x.shape[0]} vs {y.shape[0]}")
    tx = float(np.sum(x * x))
    ty = float(np.sum(y * y))
    row_norms = float(np.sum(np.linalg.norm(x, axis=1)))
    return tx + 4.0 * row_norms >= ty >= tx


def mm_map_jacobian(pair: LaplacianPair, w: float = 1.0) -> np.ndarray:
    """Derivative of ``Xhat -> mm_step(Xhat)``: ``I + 1/2 Diag(L_X)^+ (w L_Y - L_X)``."""
    dinv = np.diag(pair.diag_lx_pinv)
    return np.eye(pair.n) + 0.5 * dinv[:, None] * (w * pair.ly - pair.lx)


def psd_conditions(pair: LaplacianPair, tol: float = PSD_TOL) -> tuple[bool, bool]:
    a = 2.0 * (pair.ly - pair.lx)
    b = 8.0 * np.diag(np.diag(pair.lx))
    return psd_order_parts(a, b, tol)


def convergence_report(x, y, gamma: float, seed: int = 0) -> ConvergenceReport:
    xs = prescale(x, gamma)
    pair = build_laplacians(xs, y)
    lower, upper = psd_conditions(pair)
    radius = t_prime_radius(pair, seed=seed)
    mm_radius = spectral_radius(mm_map_jacobian(pair), max_iter=5000,
                                tol=1e-10, seed=seed).value
    return ConvergenceReport(
        gamma_interval=gamma_interval(x, y),
        gamma_used=float(gamma),
        psd_lower_ok=lower,
        psd_upper_ok=upper,
        trace_condition_ok=trace_condition_check(xs, y),
        t_prime_radius=radius,
        strong_attraction=radius < 1.0,
        mm_map_radius=mm_radius,
    )
