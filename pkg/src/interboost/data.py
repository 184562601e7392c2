"""Tabular dataset container, CSV ingestion, and deterministic splitting."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .prng import permutation


class DataError(ValueError):
    """Malformed input data: files, targets, shapes, or constraint files."""


class Task(enum.Enum):
    REGRESSION = "regression"
    BINARY_CLASSIFICATION = "classification"

    @classmethod
    def parse(cls, text: str) -> "Task":
        for member in cls:
            if member.value == text:
                return member
        raise DataError(f"unknown task {text!r}; expected 'regression' or 'classification'")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix plus target vector.

    `features` has shape (n_rows, n_features) and is kept column-major so
    per-feature scans (standardization, split finding) touch contiguous
    memory. Instances are immutable; arrays are marked read-only.
    """

    features: np.ndarray
    feature_names: tuple[str, ...]
    target: np.ndarray
    task: Task

    def __post_init__(self):
        feats = np.asfortranarray(self.features, dtype=np.float64)
        tgt = np.ascontiguousarray(self.target, dtype=np.float64)
        if feats.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        n_rows, n_features = feats.shape
        if n_rows == 0 or n_features == 0:
            raise DataError("dataset must have at least one row and one feature")
        names = tuple(self.feature_names)
        if len(names) != n_features:
            raise DataError(f"{len(names)} feature names for {n_features} feature columns")
        if tgt.shape != (n_rows,):
            raise DataError(f"target length {tgt.shape} does not match {n_rows} rows")
        if not np.all(np.isfinite(feats)) or not np.all(np.isfinite(tgt)):
            raise DataError("features and target must be finite (no NaN or infinity)")
        if self.task is Task.BINARY_CLASSIFICATION and not np.all((tgt == 0.0) | (tgt == 1.0)):
            bad = tgt[(tgt != 0.0) & (tgt != 1.0)][0]
            raise DataError(f"classification target value {bad!r} outside {{0, 1}}")
        feats.setflags(write=False)
        tgt.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "target", tgt)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class RowIndexSet:
    """Strictly increasing row positions into a Dataset."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise DataError("row indices must be one-dimensional")
        if idx.size and (idx[0] < 0 or np.any(np.diff(idx) <= 0)):
            raise DataError("row indices must be strictly increasing and non-negative")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    @classmethod
    def all_rows(cls, n_rows: int) -> "RowIndexSet":
        return cls(np.arange(n_rows, dtype=np.int64))

    @classmethod
    def of(cls, positions) -> "RowIndexSet":
        return cls(np.asarray(sorted(positions), dtype=np.int64))


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Cross-validation folds: (train, validation) index pairs covering all rows."""

    folds: tuple[tuple[RowIndexSet, RowIndexSet], ...]
    k: int
    seed: int


def resolve_rows(ds: Dataset, rows: RowIndexSet | None) -> RowIndexSet:
    """None means all rows; otherwise validate the indices fit the dataset."""
    if rows is None:
        return RowIndexSet.all_rows(ds.n_rows)
    if len(rows) and rows.indices[-1] >= ds.n_rows:
        raise DataError(f"row index {int(rows.indices[-1])} out of range for {ds.n_rows} rows")
    return rows


def load_csv(path, target_column: str, task: Task) -> Dataset:
    """Load a numeric CSV (header row, UTF-8, decimal-point reals).

    The target column is extracted; the remaining columns become features
    in header order. Every cell must parse as a finite real number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file, expected a header row")
        names = [h.strip() for h in header]
        if target_column not in names:
            raise DataError(f"{path}: target column {target_column!r} not among headers {names}")
        target_pos = names.index(target_column)
        values: list[list[float]] = []
        for row_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue  # tolerate trailing blank lines
            if len(row) != len(names):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells, expected {len(names)}")
            parsed = []
            for name, cell in zip(names, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: cell {cell!r} at row {row_no}, column {name!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(f"{path}: non-finite value at row {row_no}, column {name!r}")
                parsed.append(value)
            values.append(parsed)
        if not values:
            raise DataError(f"{path}: no data rows")
    matrix = np.asarray(values, dtype=np.float64)
    target = matrix[:, target_pos]
    features = np.delete(matrix, target_pos, axis=1)
    feature_names = tuple(n for i, n in enumerate(names) if i != target_pos)
    return Dataset(features, feature_names, target, task)


def format_real(value: float) -> str:
    """17-significant-digit decimal, enough to round-trip any float64."""
    return format(float(value), ".17g")


def save_csv(ds: Dataset, path, target_name: str = "target") -> None:
    """Write the dataset back to CSV; feature columns first, target last.

    Reals are written with 17 significant digits so a reload reproduces the
    dataset exactly.
    """
    if target_name in ds.feature_names:
        raise DataError(f"target name {target_name!r} collides with a feature name")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(ds.feature_names) + [target_name])
        for i in range(ds.n_rows):
            writer.writerow(
                [format_real(v) for v in ds.features[i, :]] + [format_real(ds.target[i])]
            )


def take_rows(ds: Dataset, rows: RowIndexSet | np.ndarray) -> Dataset:
    idx = rows.indices if isinstance(rows, RowIndexSet) else np.asarray(rows, dtype=np.int64)
    return Dataset(ds.features[idx, :], ds.feature_names, ds.target[idx], ds.task)


def replace_target(ds: Dataset, target: np.ndarray, task: Task) -> Dataset:
    return Dataset(ds.features, ds.feature_names, np.asarray(target, dtype=np.float64), task)


def train_test_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled holdout split.

    The seeded permutation's first floor(n * test_fraction) entries become
    the test part, the rest the train part; both are re-sorted to original
    row order before materializing.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test fraction must be in (0, 1), got {test_fraction}")
    n = ds.n_rows
    n_test = int(n * test_fraction + 1e-9)
    if n_test == 0 or n_test == n:
        raise DataError(f"test fraction {test_fraction} leaves an empty part for {n} rows")
    perm = permutation(n, seed)
    test_idx = np.asarray(sorted(perm[:n_test]), dtype=np.int64)
    train_idx = np.asarray(sorted(perm[n_test:]), dtype=np.int64)
    return take_rows(ds, train_idx), take_rows(ds, test_idx)


def kfold(n_rows: int, k: int, seed: int) -> FoldPlan:
    """Seeded k-fold plan; validation sets partition the rows, sizes differ by <= 1.

    The seeded permutation is dealt round-robin: fold j's validation rows
    are permutation positions j, j+k, j+2k, ...
    """
    if k < 2 or k > n_rows:
        raise DataError(f"k must satisfy 2 <= k <= n_rows, got k={k} for {n_rows} rows")
    perm = permutation(n_rows, seed)
    folds = []
    for j in range(k):
        validation = np.asarray(sorted(perm[j::k]), dtype=np.int64)
        mask = np.ones(n_rows, dtype=bool)
        mask[validation] = False
        train = np.nonzero(mask)[0].astype(np.int64)
        folds.append((RowIndexSet(train), RowIndexSet(validation)))
    return FoldPlan(tuple(folds), k, seed)
