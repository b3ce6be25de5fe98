"""DISCOMAX iterations: maximize distance correlation between a learned
embedding ``Xhat`` and the response by minimizing

    G(Xhat) = Tr(Xhat^T L_X Xhat) - w * Tr(Xhat^T L_Y Xhat)

with either the concave-convex (pseudoinverse) update or the inversion-free
majorization update.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .data import Dataset
from .distance_stats import (LaplacianPair, build_laplacians, classical_dcor2,
                             laplacian_dcor2, quad_trace)
from .errors import (ConfigError, DegenerateEmbeddingError,
                     DegenerateInputError, ShapeError)
from .linalg import as_matrix, frobenius, pinv_psd, spectral_radius

W_FLOOR = 1e-6
STALL_STEP = 1e-14

UPDATE_RULES = ("mm", "cccp")
INITS = ("gaussian", "feature_subset")
W_SOURCES = ("laplacian", "classical")
STOP_REASONS = ("max_iter", "loss_tol", "numerical_stall")


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``w_schedule`` is ``"dcor"`` (refresh ``w`` from the current embedding
    every iteration) or a positive float (fixed ``w``). ``gamma`` is
    ``"auto"`` (midpoint of the admissible prescaling interval), ``"off"``
    (no prescaling) or a nonzero float.

    ``rescale`` renormalizes each iterate to the Frobenius norm of the
    starting point. The update is linear in ``Xhat`` for fixed ``w`` and
    both ``w`` and the correlation are scale-invariant, so this changes
    magnitudes only; without it the majorization update overflows within a
    few dozen iterations on typical data.
    """

    target_dim: int = 2
    update_rule: str = "mm"
    w_schedule: Union[str, float] = "dcor"
    gamma: Union[str, float] = "auto"
    max_iter: int = 100
    loss_tol: float = 0.0
    seed: int = 0
    init: str = "gaussian"
    w_source: str = "laplacian"
    rescale: bool = True

    def __post_init__(self):
        if int(self.target_dim) != self.target_dim or self.target_dim < 1:
            raise ConfigError("target_dim must be a positive integer")
        if self.update_rule not in UPDATE_RULES:
            raise ConfigError(f"update_rule must be one of {UPDATE_RULES}")
        if isinstance(self.w_schedule, str):
            if self.w_schedule != "dcor":
                raise ConfigError("w_schedule must be 'dcor' or a positive number")
        elif not (math.isfinite(self.w_schedule) and self.w_schedule > 0):
            raise ConfigError("fixed w must be finite and > 0")
        if isinstance(self.gamma, str):
            if self.gamma not in ("auto", "off"):
                raise ConfigError("gamma must be 'auto', 'off' or a nonzero number")
        elif not math.isfinite(self.gamma) or self.gamma == 0:
            raise ConfigError("fixed gamma must be finite and nonzero")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if not self.loss_tol >= 0:
            raise ConfigError("loss_tol must be >= 0")
        if self.init not in INITS:
            raise ConfigError(f"init must be one of {INITS}")
        if self.w_source not in W_SOURCES:
            raise ConfigError(f"w_source must be one of {W_SOURCES}")


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    loss: float
    dcor2_lap_norm: Optional[float]
    dcor2_lap_stated: Optional[float]
    dcor2_classical: Optional[float]
    w: float
    step_norm: float
    ms: float


@dataclass(frozen=True)
class EmbeddingResult:
    embedding: np.ndarray
    gamma_used: float
    gamma_interval: tuple[float, float]
    trace: tuple[IterationRecord, ...]
    stop_reason: str
    initial_embedding: np.ndarray
    initial_dcor2: float
    snapshots: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.trace)


def _check_xhat(xhat, pair: LaplacianPair) -> np.ndarray:
    xhat = as_matrix(xhat, "Xhat")
    if xhat.shape[0] != pair.n:
        raise ShapeError(f"Xhat has {xhat.shape[0]} rows, expected {pair.n}")
    return xhat


def loss_G(xhat, pair: LaplacianPair, w: float) -> float:
    xhat = _check_xhat(xhat, pair)
    return quad_trace(xhat, pair.lx) - w * quad_trace(xhat, pair.ly)


def grad_G(xhat, pair: LaplacianPair, w: float) -> np.ndarray:
    """``2 (L_X - w L_Y) Xhat``."""
    xhat = _check_xhat(xhat, pair)
    return 2.0 * (pair.lx @ xhat - w * (pair.ly @ xhat))


def cccp_step(xhat_prev, pair: LaplacianPair, w: float,
              lx_pinv: np.ndarray) -> np.ndarray:
    """``w L_X^+ L_Y Xhat_prev``.

    This exactly minimizes the convexified surrogate only when
    ``L_Y Xhat_prev`` lies in the range of ``L_X``; from an arbitrary start
    the first step projects onto that range, after which the loss is
    non-increasing for fixed ``w``.
    """
    xhat_prev = _check_xhat(xhat_prev, pair)
    if lx_pinv.shape != pair.lx.shape:
        raise ShapeError("lx_pinv does not match L_X")
    return w * (lx_pinv @ (pair.ly @ xhat_prev))


def mm_step(xhat_prev, pair: LaplacianPair, w: float) -> np.ndarray:
    """``Xhat + 1/2 Diag(L_X)^+ (w L_Y - L_X) Xhat``.

    Rows with a zero diagonal entry in ``L_X`` (points sitting at the feature
    mean) receive no correction.
    """
    xhat_prev = _check_xhat(xhat_prev, pair)
    correction = w * (pair.ly @ xhat_prev) - pair.lx @ xhat_prev
    dinv = np.diag(pair.diag_lx_pinv)
    return xhat_prev + 0.5 * dinv[:, None] * correction


def mm_step_gradient_form(xhat_prev, pair: LaplacianPair, w: float) -> np.ndarray:
    """The same update written as a scaled gradient step, ``Xhat - 1/4 Diag(L_X)^+ grad G``."""
    dinv = np.diag(pair.diag_lx_pinv)
    return xhat_prev - 0.25 * dinv[:, None] * grad_G(xhat_prev, pair, w)


def choose_w(xhat_prev, pair: LaplacianPair, schedule: Union[str, float],
             source: str = "laplacian") -> float:
    if not isinstance(schedule, str):
        return float(schedule)
    if schedule != "dcor":
        raise ConfigError(f"unknown w schedule {schedule!r}")
    xhat_prev = _check_xhat(xhat_prev, pair)
    if np.all(xhat_prev == xhat_prev[0]):
        raise DegenerateEmbeddingError("embedding is constant; dcor-based w undefined")
    if source == "classical":
        r2 = classical_dcor2(xhat_prev, pair.y)
    else:
        r2 = laplacian_dcor2(xhat_prev, pair, "normalized")
    return float(np.clip(np.sqrt(max(r2, 0.0)), W_FLOOR, 1.0))


def gamma_interval(x, y) -> tuple[float, float]:
    """Admissible ``|gamma|`` range ``[sqrt(1/5) ||Y||_F / ||X||_F, ||Y||_F / ||X||_F]``."""
    nx, ny = frobenius(as_matrix(x, "X")), frobenius(as_matrix(y, "Y"))
    if nx == 0 or ny == 0:
        raise DegenerateInputError("X and Y must have nonzero Frobenius norm")
    hi = ny / nx
    return math.sqrt(0.2) * hi, hi


def prescale(x, gamma: float) -> np.ndarray:
    if gamma == 0 or not math.isfinite(gamma):
        raise ConfigError("gamma must be finite and nonzero")
    return gamma * as_matrix(x, "X")


def t_prime_matrix(pair: LaplacianPair, w: Optional[float] = None) -> np.ndarray:
    """``I + 1/4 Diag(L_X)^+ (L_Y - L_X)``; pass ``w`` to weight ``L_Y``."""
    ly = pair.ly if w is None else w * pair.ly
    dinv = np.diag(pair.diag_lx_pinv)
    return np.eye(pair.n) + 0.25 * dinv[:, None] * (ly - pair.lx)


def t_prime_radius(pair: LaplacianPair, seed: int = 0,
                   w: Optional[float] = None) -> float:
    return spectral_radius(t_prime_matrix(pair, w), max_iter=5000,
                           tol=1e-10, seed=seed).value


def resolve_gamma(x, y, policy: Union[str, float]) -> tuple[float, tuple[float, float]]:
    interval = gamma_interval(x, y)
    if policy == "auto":
        return 0.5 * (interval[0] + interval[1]), interval
    if policy == "off":
        return 1.0, interval
    return float(policy), interval


def initial_embedding(xs: np.ndarray, y: np.ndarray, config: SolverConfig) -> np.ndarray:
    n, p = xs.shape
    d = config.target_dim
    if config.init == "gaussian":
        rng = np.random.default_rng(config.seed)
        x0 = rng.standard_normal((n, d))
        return x0 * (frobenius(xs) / frobenius(x0))
    scores = np.array([classical_dcor2(xs[:, j], y) for j in range(p)])
    top = np.sort(np.argsort(-scores, kind="stable")[:d])
    return xs[:, top].copy()


def _dcor_triplet(xhat, pair):
    if np.all(xhat == xhat[0]):
        return None, None, None
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            vals = (laplacian_dcor2(xhat, pair, "normalized"),
                    laplacian_dcor2(xhat, pair, "as_stated"),
                    classical_dcor2(xhat, pair.y))
    except DegenerateEmbeddingError:
        return None, None, None
    if not all(map(math.isfinite, vals)):
        return None, None, None
    return vals


def run(dataset: Dataset, config: SolverConfig, snapshots=()) -> EmbeddingResult:
    """Fit an ``n x d`` embedding.

    Laplacians are built once from ``(gamma X, Y)``. Stops on ``max_iter``,
    relative loss change below ``loss_tol`` (when ``loss_tol > 0``), or a
    step norm under 1e-14 / a non-finite or constant iterate
    (``numerical_stall``). ``snapshots`` lists iteration counts whose
    embeddings are kept; counts beyond an early stop get the final iterate.
    """
    x, y = dataset.X, dataset.Y
    p = x.shape[1]
    if config.target_dim > p:
        raise ConfigError(f"target_dim {config.target_dim} exceeds feature count {p}")
    gamma, interval = resolve_gamma(x, y, config.gamma)
    xs = prescale(x, gamma)
    pair = build_laplacians(xs, y)
    lx_pinv = pinv_psd(pair.lx) if config.update_rule == "cccp" else None

    x0 = initial_embedding(xs, y, config)
    target_norm = frobenius(x0)
    if target_norm == 0:
        raise DegenerateEmbeddingError("initial embedding is zero")
    init_dcor = _dcor_triplet(x0, pair)[0]

    wanted = set(int(s) for s in snapshots)
    kept = {}
    records = []
    prev = x0
    stop = "max_iter"
    for it in range(1, config.max_iter + 1):
        t0 = time.perf_counter()
        # without rescaling the iterates can overflow; that is caught below
        with np.errstate(over="ignore", invalid="ignore"):
            w = choose_w(prev, pair, config.w_schedule, config.w_source)
            if config.update_rule == "mm":
                nxt = mm_step(prev, pair, w)
            else:
                nxt = cccp_step(prev, pair, w, lx_pinv)
            if config.rescale:
                norm = frobenius(nxt)
                if norm > 0 and math.isfinite(norm):
                    nxt = nxt * (target_norm / norm)
            finite = bool(np.all(np.isfinite(nxt)))
            if finite:
                step = frobenius(nxt - prev)
                loss_prev = loss_G(prev, pair, w)
                loss = loss_G(nxt, pair, w)
                finite = all(map(math.isfinite, (step, loss_prev, loss)))
        if not finite:
            stop = "numerical_stall"
            break
        norm_dc, stated_dc, classical_dc = _dcor_triplet(nxt, pair)
        records.append(IterationRecord(
            iter=it, loss=loss, dcor2_lap_norm=norm_dc,
            dcor2_lap_stated=stated_dc, dcor2_classical=classical_dc,
            w=w, step_norm=step, ms=1000.0 * (time.perf_counter() - t0),
        ))
        prev = nxt
        if it in wanted:
            kept[it] = nxt.copy()
        if step < STALL_STEP or norm_dc is None:
            stop = "numerical_stall"
            break
        if config.loss_tol > 0:
            rel = abs(loss - loss_prev) / max(abs(loss_prev), 1e-300)
            if rel < config.loss_tol:
                stop = "loss_tol"
                break

    for s in wanted:
        if s not in kept:
            kept[s] = prev.copy()
    return EmbeddingResult(
        embedding=prev,
        gamma_used=gamma,
        gamma_interval=interval,
        trace=tuple(records),
        stop_reason=stop,
        initial_embedding=x0,
        initial_dcor2=init_dcor,
        snapshots=kept,
    )
