"""Datasets and CSV ingestion."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (DataFileError, DegenerateResponseError,
                     InsufficientSamplesError, ShapeError)
from .linalg import as_matrix

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    feature_names: tuple[str, ...] = ()
    response_names: tuple[str, ...] = ()
    standardized: bool = False

    def __post_init__(self):
        x = as_matrix(self.X, "X")
        y = as_matrix(self.Y, "Y")
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"X has {x.shape[0]} rows but Y has {y.shape[0]}")
        if x.shape[0] < 3:
            raise InsufficientSamplesError("a dataset needs at least 3 rows")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)
        if not self.feature_names:
            object.__setattr__(self, "feature_names",
                               tuple(f"x{j + 1}" for j in range(x.shape[1])))
        if not self.response_names:
            object.__setattr__(self, "response_names",
                               tuple(f"y{j + 1}" for j in range(y.shape[1])))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def standardize(x: np.ndarray) -> np.ndarray:
    std = np.maximum(x.std(axis=0), STD_FLOOR)
    return (x - x.mean(axis=0)) / std


def load_csv(path, response_columns: Sequence[str],
             standardize_features: bool = False) -> Dataset:
    """Read a headed, all-numeric CSV. Non-response columns become features.

    Missing or non-numeric cells are errors (no imputation); the message
    names the 1-based data row and the column.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFileError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFileError(f"{path} is empty") from None
        rows = []
        for lineno, raw in enumerate(reader, start=1):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(header):
                raise DataFileError(
                    f"row {lineno} has {len(raw)} cells, header has {len(header)}")
            vals = []
            for col, cell in zip(header, raw):
                cell = cell.strip()
                if not cell:
                    raise DataFileError(f"empty cell at row {lineno}, column {col!r}")
                try:
                    v = float(cell)
                except ValueError:
                    raise DataFileError(
                        f"non-numeric cell {cell!r} at row {lineno}, column {col!r}") from None
                if not math.isfinite(v):
                    raise DataFileError(f"non-finite cell at row {lineno}, column {col!r}")
                vals.append(v)
            rows.append(vals)

    if len(set(header)) != len(header):
        raise DataFileError("duplicate column names in header")
    missing = [r for r in response_columns if r not in header]
    if missing:
        raise DataFileError(f"unknown response column(s): {', '.join(missing)}")
    if not response_columns:
        raise DataFileError("at least one response column is required")
    if len(rows) < 3:
        raise InsufficientSamplesError(f"{path} has {len(rows)} data rows; need >= 3")

    table = np.array(rows, dtype=np.float64)
    resp_idx = [header.index(r) for r in response_columns]
    feat_idx = [j for j in range(len(header)) if j not in resp_idx]
    if not feat_idx:
        raise DataFileError("no feature columns left after removing responses")
    y = table[:, resp_idx]
    if np.all(y == y[0]):
        raise DegenerateResponseError("response is constant")
    x = table[:, feat_idx]
    if standardize_features:
        x = standardize(x)
    return Dataset(
        X=x, Y=y,
        feature_names=tuple(header[j] for j in feat_idx),
        response_names=tuple(response_columns),
        standardized=standardize_features,
    )
