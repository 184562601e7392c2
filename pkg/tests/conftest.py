import numpy as np
import pytest

from interboost.data import Dataset, Task


def make_regression(n_rows, n_features, seed, target_fn=None, noise_sd=0.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_rows, n_features))
    if target_fn is None:
        y = rng.normal(size=n_rows)
    else:
        y = target_fn(X)
    if noise_sd:
        y = y + rng.normal(0.0, noise_sd, size=n_rows)
    names = tuple(f"x{i}" for i in range(n_features))
    return Dataset(X, names, y, Task.REGRESSION)


def make_classification(n_rows, n_features, seed, logit_fn=None):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n_rows, n_features))
    if logit_fn is None:
        y = rng.integers(0, 2, size=n_rows).astype(np.float64)
    else:
        p = 1.0 / (1.0 + np.exp(-logit_fn(X)))
        y = (rng.uniform(size=n_rows) < p).astype(np.float64)
    names = tuple(f"x{i}" for i in range(n_features))
    return Dataset(X, names, y, Task.BINARY_CLASSIFICATION)


@pytest.fixture
def tmp_csv(tmp_path):
    def write(text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
