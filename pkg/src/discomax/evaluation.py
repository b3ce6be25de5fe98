"""Cross-validated k-NN RMSE on embedded features.

Embeddings are transductive: they are fit on all rows before the folds are
drawn, and only the regressor is cross-validated. Because the response
enters the embedding, scores are optimistic relative to a per-fold refit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .data import Dataset
from .errors import ConfigError, ShapeError
from .linalg import as_matrix
from .solver import SolverConfig, run

TRANSDUCTIVE_NOTE = (
    "embedding fit on all rows before cross-validation (transductive); "
    "the response informs the embedding, so CV error is optimistic"
)


@dataclass(frozen=True)
class FoldPlan:
    n: int
    k: int
    seed: int
    assignments: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()


@dataclass(frozen=True)
class EvalReport:
    method: str
    fold_rmse: tuple[float, ...]
    mean_rmse: float
    dim: int
    seed: int
    regressor: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fold_rmse"] = list(self.fold_rmse)
        return d


def kfold_plan(n: int, k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded permutation dealt round-robin into ``k`` folds."""
    if k < 2 or k > n:
        raise ConfigError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[perm] = np.arange(n) % k
    return FoldPlan(n=n, k=k, seed=seed, assignments=assignments)


def knn_predict(train_x, train_y, test_x, k: int = 5) -> np.ndarray:
    """Mean response of the ``k`` nearest training rows (Euclidean).

    Distance ties go to the lower training-row index.
    """
    train_x, test_x = as_matrix(train_x, "train_X"), as_matrix(test_x, "test_X")
    train_y = np.asarray(train_y, dtype=np.float64)
    squeeze = train_y.ndim == 1
    train_y = as_matrix(train_y, "train_y")
    if train_x.shape[0] == 0:
        raise ShapeError("empty training set")
    if train_y.shape[0] != train_x.shape[0]:
        raise ShapeError("train_X and train_y row counts differ")
    if train_x.shape[1] != test_x.shape[1]:
        raise ShapeError("train_X and test_X column counts differ")
    if not 1 <= k <= train_x.shape[0]:
        raise ConfigError(f"k must lie in [1, {train_x.shape[0]}], got {k}")
    diff = test_x[:, None, :] - train_x[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    pred = train_y[nearest].mean(axis=1)
    return pred[:, 0] if squeeze else pred


def rmse(pred, actual) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape or pred.size == 0:
        raise ShapeError(f"length mismatch: {pred.shape} vs {actual.shape}")
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def cv_rmse(features, y, plan: FoldPlan, knn_k: int = 5,
            method: str = "features") -> EvalReport:
    features = as_matrix(features, "features")
    y = np.asarray(y, dtype=np.float64)
    if features.shape[0] != plan.n or y.shape[0] != plan.n:
        raise ShapeError("features, y and fold plan disagree on n")
    scores = []
    for fold in range(plan.k):
        tr, te = plan.train_indices(fold), plan.test_indices(fold)
        pred = knn_predict(features[tr], y[tr], features[te], knn_k)
        scores.append(rmse(pred, y[te]))
    return EvalReport(
        method=method,
        fold_rmse=tuple(scores),
        mean_rmse=float(np.mean(scores)),
        dim=features.shape[1],
        seed=plan.seed,
        regressor={"name": "knn", "k": knn_k},
    )


def select_iterations_by_cv(dataset: Dataset, config: SolverConfig,
                            checkpoints: Sequence[int], plan: FoldPlan | None = None,
                            knn_k: int = 5):
    """Fit once to ``config.max_iter``; score the embedding at each checkpoint.

    Returns ``(best_iter, {iter: EvalReport})``; ties go to the smaller count.
    """
    checkpoints = [int(c) for c in checkpoints]
    if not checkpoints:
        raise ConfigError("checkpoints must be non-empty")
    if checkpoints != sorted(checkpoints) or len(set(checkpoints)) != len(checkpoints):
        raise ConfigError("checkpoints must be strictly ascending")
    if checkpoints[0] < 1 or checkpoints[-1] > config.max_iter:
        raise ConfigError(f"checkpoints must lie in [1, {config.max_iter}]")
    if plan is None:
        plan = kfold_plan(dataset.n, 5, config.seed)
    result = run(dataset, config, snapshots=checkpoints)
    y = dataset.Y[:, 0] if dataset.Y.shape[1] == 1 else dataset.Y
    reports = {
        c: cv_rmse(result.snapshots[c], y, plan, knn_k, method=f"discomax@{c}")
        for c in checkpoints
    }
    best = min(checkpoints, key=lambda c: (reports[c].mean_rmse, c))
    return best, reports


def baseline_embeddings(x, d: int, seed: int = 0) -> dict[str, np.ndarray]:
    """``identity`` (features unchanged) and a seeded Gaussian ``random_projection``."""
    x = as_matrix(x, "X")
    if d > x.shape[1] or d < 1:
        raise ConfigError(f"d must lie in [1, {x.shape[1]}], got {d}")
    g = np.random.default_rng(seed).standard_normal((x.shape[1], d)) / np.sqrt(d)
    return {"identity": x, "random_projection": x @ g}
