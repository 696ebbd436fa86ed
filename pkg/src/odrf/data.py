"""Dataset ingestion, min-max scaling to the unit cube and train/test partitioning."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import (
    BadLabel,
    DimensionMismatch,
    EmptyDataset,
    MissingColumn,
    TooFewRows,
)

Task = Literal["regression", "classification"]
TASKS = ("regression", "classification")

TRAIN_CAP = 2000


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def check_task(task: str) -> str:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    return task


def check_binary(y: np.ndarray) -> None:
    bad = ~np.isin(y, (0.0, 1.0))
    if bad.any():
        raise BadLabel(f"classification target must be 0 or 1, got {y[bad][0]!r}")


@dataclass(frozen=True)
class RawDataset:
    """Unscaled features and targets as read from disk."""

    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...]
    target_name: str
    task: str

    def __post_init__(self):
        X = _frozen(self.features)
        y = _frozen(self.targets)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise EmptyDataset(f"need at least one row and one feature, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DimensionMismatch("targets must have one entry per row")
        if len(self.feature_names) != X.shape[1]:
            raise DimensionMismatch("one feature name per column required")
        check_task(self.task)
        if self.task == "classification":
            check_binary(y)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> RawDataset:
        idx = np.asarray(indices, dtype=np.intp)
        return RawDataset(self.features[idx], self.targets[idx], self.feature_names,
                          self.target_name, self.task)


@dataclass(frozen=True)
class Dataset:
    """Features scaled to [0, 1]^p together with their targets."""

    features: np.ndarray
    targets: np.ndarray
    task: str = "regression"

    def __post_init__(self):
        X = _frozen(self.features)
        y = _frozen(self.targets)
        if X.ndim != 2:
            raise DimensionMismatch("features must be a 2-d array")
        if y.shape != (X.shape[0],):
            raise DimensionMismatch("targets must have one entry per row")
        if X.size and (X.min() < -1e-12 or X.max() > 1 + 1e-12):
            raise ValueError("features must lie in [0, 1]")
        check_task(self.task)
        if self.task == "classification":
            check_binary(y)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ScalingTransform:
    mins: np.ndarray
    ranges: np.ndarray

    def __post_init__(self):
        mins = _frozen(self.mins)
        ranges = _frozen(self.ranges)
        if mins.shape != ranges.shape or mins.ndim != 1:
            raise DimensionMismatch("mins and ranges must be 1-d and equally long")
        if (ranges < 0).any():
            raise ValueError("ranges must be nonnegative")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "ranges", ranges)

    @property
    def p(self) -> int:
        return self.mins.shape[0]

    def transform(self, X) -> np.ndarray:
        """Map raw feature rows into the unit cube, clamping out-of-range values."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise DimensionMismatch(f"expected {self.p} features, got array of shape {X.shape}")
        safe = np.where(self.ranges > 0, self.ranges, 1.0)
        Z = (X - self.mins) / safe
        Z[:, self.ranges == 0] = 0.0
        return np.clip(Z, 0.0, 1.0)


def load_csv(path: str | Path, target_name: str, task: str = "regression") -> RawDataset:
    """Read a comma-separated file with a header row.

    Every column other than ``target_name`` is a feature. Records containing an
    empty or non-numeric cell are dropped as a whole.
    """
    check_task(task)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty") from None
        if target_name not in header:
            raise MissingColumn(f"{path}: no column named {target_name!r}")
        t = header.index(target_name)
        rows = []
        for record in reader:
            if len(record) != len(header):
                continue
            try:
                values = [float(cell) for cell in record]
            except ValueError:
                continue
            if any(math.isnan(v) or math.isinf(v) for v in values):
                continue
            rows.append(values)
    if not rows:
        raise EmptyDataset(f"{path}: no complete numeric records")
    table = np.array(rows, dtype=float)
    y = table[:, t]
    X = np.delete(table, t, axis=1)
    names = tuple(h for i, h in enumerate(header) if i != t)
    if X.shape[1] == 0:
        raise EmptyDataset(f"{path}: no feature columns besides the target")
    return RawDataset(X, y, names, target_name, task)


def fit_minmax(raw: RawDataset | np.ndarray) -> ScalingTransform:
    X = raw.features if isinstance(raw, RawDataset) else np.asarray(raw, dtype=float)
    mins = X.min(axis=0)
    return ScalingTransform(mins, X.max(axis=0) - mins)


def apply_scaler(t: ScalingTransform, raw: RawDataset) -> Dataset:
    return Dataset(t.transform(raw.features), raw.targets, raw.task)


@dataclass(frozen=True)
class Partition:
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "train_indices", _frozen(self.train_indices, np.intp))
        object.__setattr__(self, "test_indices", _frozen(self.test_indices, np.intp))


def train_size(N: int) -> int:
    return min((2 * N) // 3, TRAIN_CAP)


def partition(N: int, seed: int | Sequence[int]) -> Partition:
    """Random train/test split with ``min(floor(2N/3), 2000)`` training rows."""
    if N < 2:
        raise TooFewRows(f"need at least 2 rows to partition, got {N}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(N)
    n = train_size(N)
    return Partition(np.sort(perm[:n]), np.sort(perm[n:]))


def prepare(raw: RawDataset, part: Partition, scaling: str = "train") -> tuple[Dataset, Dataset, ScalingTransform]:
    """Scale a partitioned dataset.

    ``scaling="train"`` fits the transform on the training rows only (test
    values outside the training range are clamped); ``"whole"`` fits on all
    rows before splitting.
    """
    train_raw = raw.subset(part.train_indices)
    test_raw = raw.subset(part.test_indices) if len(part.test_indices) else None
    if scaling == "train":
        t = fit_minmax(train_raw)
    elif scaling == "whole":
        t = fit_minmax(raw)
    else:
        raise ValueError(f"unknown scaling mode {scaling!r}")
    train = apply_scaler(t, train_raw)
    test = apply_scaler(t, test_raw) if test_raw is not None else Dataset(np.empty((0, raw.p)), np.empty(0), raw.task)
    return train, test, t
