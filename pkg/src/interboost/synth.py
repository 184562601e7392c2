"""Synthetic datasets with known interaction structure, for tests and demos."""

from __future__ import annotations

import numpy as np

from .data import Dataset, Task

_NAMES6 = ("x0", "x1", "x2", "x3", "x4", "x5")


def paired_products_dataset(n_rows: int = 2000, seed: int = 0, noise_sd: float = 0.1) -> Dataset:
    """y = x0*x1 + x2*x3 + 0.1*x4 + noise over six iid U(-1, 1) features.

    Features 0/1 and 2/3 interact pairwise, 4 enters additively, 5 is inert.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n_rows, 6))
    y = X[:, 0] * X[:, 1] + X[:, 2] * X[:, 3] + 0.1 * X[:, 4]
    y = y + rng.normal(0.0, noise_sd, size=n_rows)
    return Dataset(X, _NAMES6, y, Task.REGRESSION)


def shifted_products_dataset(n_rows: int = 2000, seed: int = 0, noise_sd: float = 0.05) -> Dataset:
    """y = x0*x1 + 0.3*x2*x3 + noise: a dominant pair plus a weaker one.

    Early boosting rounds absorb the dominant product, after which the
    residuals are driven by the weaker pair, so the useful partition shifts
    as the ensemble grows.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n_rows, 6))
    y = X[:, 0] * X[:, 1] + 0.3 * X[:, 2] * X[:, 3]
    y = y + rng.normal(0.0, noise_sd, size=n_rows)
    return Dataset(X, _NAMES6, y, Task.REGRESSION)
