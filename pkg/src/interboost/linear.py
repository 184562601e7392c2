"""Linear and logistic regression with pairwise product expansion.

These models are the scoring engine behind constraint-partition discovery:
candidate feature groups are compared by cross-validated fit quality with
and without product columns. Base columns are standardized with statistics
fitted on training rows; product columns are elementwise products of the
standardized bases, which keeps the normal equations well conditioned.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .data import Dataset, RowIndexSet, Task, kfold, resolve_rows


@dataclass(frozen=True)
class Base:
    """A raw feature column, referenced by feature index."""

    index: int


@dataclass(frozen=True)
class Product:
    """Elementwise product of two standardized base columns, a < b."""

    a: int
    b: int

    def __post_init__(self):
        if self.a >= self.b:
            raise ValueError(f"product term requires a < b, got ({self.a}, {self.b})")


Term = Base | Product


class ModelKind(enum.Enum):
    OLS = "ols"
    LOGISTIC = "logistic"


class ScoreMetric(enum.Enum):
    R_SQUARED = "r_squared"
    ACCURACY = "accuracy"


def expand_pairwise(feature_subset, with_interactions: bool) -> tuple[Term, ...]:
    """Column spec for a feature subset: bases in subset order, then, when
    requested, every unordered pair as a product term in lexicographic
    index order."""
    subset = list(feature_subset)
    if len(set(subset)) != len(subset):
        raise ValueError(f"duplicate feature indices in subset {subset}")
    terms: list[Term] = [Base(i) for i in subset]
    if with_interactions:
        for a, b in itertools.combinations(sorted(subset), 2):
            terms.append(Product(a, b))
    return tuple(terms)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Materialized model columns plus the spec and statistics that built them.

    When `includes_intercept` is set the last column is all ones.
    """

    values: np.ndarray
    terms: tuple[Term, ...]
    standardization: dict[int, tuple[float, float]]
    includes_intercept: bool = False

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("duplicate terms in design")
        base_set = {t.index for t in self.terms if isinstance(t, Base)}
        for t in self.terms:
            if isinstance(t, Product) and not (t.a in base_set and t.b in base_set):
                raise ValueError(f"product term {t} references a feature with no base column")
        expected = len(self.terms) + (1 if self.includes_intercept else 0)
        if self.values.ndim != 2 or self.values.shape[1] != expected:
            raise ValueError(
                f"design has {self.values.shape} values for {len(self.terms)} terms"
            )


@dataclass(frozen=True)
class FitInfo:
    converged: bool
    n_iter: int
    loglik_path: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class LinearModel:
    coefficients: np.ndarray  # aligned with terms
    intercept: float
    kind: ModelKind
    terms: tuple[Term, ...]
    standardization: dict[int, tuple[float, float]]
    fit_info: FitInfo | None = None


def fit_standardization(
    ds: Dataset, rows: RowIndexSet | None, terms
) -> dict[int, tuple[float, float]]:
    """Per-base-feature (mean, sample stddev) over the given rows.

    A degenerate stddev (constant column, or a single row) is clamped to 1
    so the standardized column is all zeros rather than NaN.
    """
    rows = resolve_rows(ds, rows)
    stats: dict[int, tuple[float, float]] = {}
    for t in terms:
        if isinstance(t, Base) and t.index not in stats:
            col = ds.features[rows.indices, t.index]
            mean = float(col.mean())
            sd = float(col.std(ddof=1)) if col.size > 1 else 0.0
            if not np.isfinite(sd) or sd <= 0.0:
                sd = 1.0
            stats[t.index] = (mean, sd)
    return stats


def materialize(
    ds: Dataset,
    rows: RowIndexSet | None,
    terms,
    standardization: dict[int, tuple[float, float]] | None = None,
    include_intercept: bool = False,
) -> DesignMatrix:
    """Build the model matrix for `terms` over `rows`.

    With `standardization=None` the statistics are fitted on these rows;
    otherwise the supplied (train-fitted) statistics are applied.
    """
    rows = resolve_rows(ds, rows)
    if len(rows) == 0:
        raise ValueError("cannot materialize a design over an empty row set")
    terms = tuple(terms)
    for t in terms:
        for idx in (t.index,) if isinstance(t, Base) else (t.a, t.b):
            if not 0 <= idx < ds.n_features:
                raise ValueError(f"feature index {idx} out of range for {ds.n_features} features")
    stats = standardization if standardization is not None else fit_standardization(ds, rows, terms)
    std_cols: dict[int, np.ndarray] = {}
    for t in terms:
        if isinstance(t, Base):
            if t.index not in stats:
                raise ValueError(f"no standardization statistics for feature {t.index}")
            mean, sd = stats[t.index]
            std_cols[t.index] = (ds.features[rows.indices, t.index] - mean) / sd
    columns = []
    for t in terms:
        if isinstance(t, Base):
            columns.append(std_cols[t.index])
        else:
            columns.append(std_cols[t.a] * std_cols[t.b])
    if include_intercept:
        columns.append(np.ones(len(rows)))
    values = np.column_stack(columns) if columns else np.empty((len(rows), 0))
    return DesignMatrix(values, terms, stats, include_intercept)


def _with_intercept(X: DesignMatrix) -> np.ndarray:
    if X.includes_intercept:
        return X.values
    return np.column_stack([X.values, np.ones(X.values.shape[0])])


def fit_ols(X: DesignMatrix, y: np.ndarray, ridge: float = 1e-8) -> LinearModel:
    """Ridge-stabilized least squares via the normal equations.

    Minimizes ||y - A theta||^2 + ridge * ||coefficients||^2 with the
    intercept unpenalized; the default tiny ridge makes duplicated or
    collinear columns solvable without materially biasing scores.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    A = _with_intercept(X)
    y = np.asarray(y, dtype=np.float64)
    n_coef = A.shape[1] - 1
    M = A.T @ A
    diag = np.arange(n_coef)
    M[diag, diag] += ridge
    b = A.T @ y
    try:
        theta = np.linalg.solve(M, b)
    except np.linalg.LinAlgError:
        theta = np.linalg.lstsq(M, b, rcond=None)[0]
    return LinearModel(
        coefficients=theta[:-1].copy(),
        intercept=float(theta[-1]),
        kind=ModelKind.OLS,
        terms=X.terms,
        standardization=dict(X.standardization),
    )


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loglik(A: np.ndarray, y: np.ndarray, theta: np.ndarray, ridge: float) -> float:
    """Penalized Bernoulli log-likelihood; the intercept (last entry of
    theta) is unpenalized."""
    z = A @ theta
    ll = -float(np.sum(y * np.logaddexp(0.0, -z) + (1.0 - y) * np.logaddexp(0.0, z)))
    return ll - 0.5 * ridge * float(np.sum(theta[:-1] ** 2))


def logistic_grad(A: np.ndarray, y: np.ndarray, theta: np.ndarray, ridge: float) -> np.ndarray:
    p = sigmoid(A @ theta)
    grad = A.T @ (y - p)
    grad[:-1] -= ridge * theta[:-1]
    return grad


def fit_logistic(
    X: DesignMatrix,
    y: np.ndarray,
    ridge: float = 1e-6,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LinearModel:
    """Damped Newton ascent on the penalized log-likelihood.

    Each iteration halves the step (at most 30 times) until the penalized
    log-likelihood does not decrease, so the accepted path is monotone.
    Convergence: gradient infinity-norm <= tol * (1 + gradient norm at
    theta = 0). Hitting max_iter is flagged on fit_info, not an error.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    A = _with_intercept(X)
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("logistic regression requires a 0/1 target")
    p_cols = A.shape[1]
    theta = np.zeros(p_cols)
    penalty = np.ones(p_cols)
    penalty[-1] = 0.0
    threshold = tol * (1.0 + float(np.max(np.abs(logistic_grad(A, y, theta, ridge)))))
    ll = logistic_loglik(A, y, theta, ridge)
    path = [ll]
    converged = False
    iterations = 0
    while True:
        grad = logistic_grad(A, y, theta, ridge)
        if float(np.max(np.abs(grad))) <= threshold:
            converged = True
            break
        if iterations >= max_iter:
            break
        p = sigmoid(A @ theta)
        w = p * (1.0 - p)
        H = (A * w[:, None]).T @ A
        H[np.diag_indices(p_cols)] += ridge * penalty
        try:
            direction = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            direction = np.linalg.lstsq(H, grad, rcond=None)[0]
        if not np.all(np.isfinite(direction)):
            break
        step = 1.0
        improved = False
        for _ in range(31):  # full step plus at most 30 halvings
            candidate = theta + step * direction
            candidate_ll = logistic_loglik(A, y, candidate, ridge)
            if candidate_ll >= ll:
                theta, ll = candidate, candidate_ll
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        path.append(ll)
        iterations += 1
    return LinearModel(
        coefficients=theta[:-1].copy(),
        intercept=float(theta[-1]),
        kind=ModelKind.LOGISTIC,
        terms=X.terms,
        standardization=dict(X.standardization),
        fit_info=FitInfo(converged, iterations, tuple(path)),
    )


# Probabilities are nudged off exact 0/1 so downstream log/odds stay finite.
_P_EPS = 1e-15


def predict(model: LinearModel, ds: Dataset, rows: RowIndexSet | None = None) -> np.ndarray:
    """Model outputs over rows: linear response for OLS, probability for logistic."""
    X = materialize(ds, rows, model.terms, model.standardization)
    z = X.values @ model.coefficients + model.intercept
    if model.kind is ModelKind.OLS:
        return z
    return np.clip(sigmoid(z), _P_EPS, 1.0 - _P_EPS)


def r_squared(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    y_true = np.asarray(y_true, dtype=np.float64)
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def accuracy(y_true: np.ndarray, prob: np.ndarray) -> float:
    """Fraction classified correctly at threshold 0.5; ties go to class 1."""
    labels = (np.asarray(prob) >= 0.5).astype(np.float64)
    return float(np.mean(labels == np.asarray(y_true, dtype=np.float64)))


def metric_for_task(task: Task) -> ScoreMetric:
    """R-squared scores regression models, accuracy scores classifiers."""
    return ScoreMetric.R_SQUARED if task is Task.REGRESSION else ScoreMetric.ACCURACY


def score_for_task(task: Task, y_true: np.ndarray, prediction: np.ndarray) -> float:
    if metric_for_task(task) is ScoreMetric.R_SQUARED:
        return r_squared(y_true, prediction)
    return accuracy(y_true, prediction)


def fit_for_task(task: Task, X: DesignMatrix, y: np.ndarray) -> LinearModel:
    if task is Task.REGRESSION:
        return fit_ols(X, y)
    return fit_logistic(X, y)


def cv_score_terms(
    ds: Dataset,
    rows: RowIndexSet | None,
    terms,
    k: int = 3,
    seed: int = 0,
) -> float:
    """Mean k-fold validation score of the task-appropriate linear model over
    an explicit term list. Standardization statistics come from each fold's
    training part only."""
    terms = tuple(terms)
    if not terms:
        raise ValueError("term list must be nonempty")
    rows = resolve_rows(ds, rows)
    plan = kfold(len(rows), k, seed)
    scores = []
    for fold_train, fold_val in plan.folds:
        train_rows = RowIndexSet(rows.indices[fold_train.indices])
        val_rows = RowIndexSet(rows.indices[fold_val.indices])
        X = materialize(ds, train_rows, terms)
        model = fit_for_task(ds.task, X, ds.target[train_rows.indices])
        prediction = predict(model, ds, val_rows)
        scores.append(score_for_task(ds.task, ds.target[val_rows.indices], prediction))
    return float(np.mean(scores))


def cv_score(
    ds: Dataset,
    rows: RowIndexSet | None,
    feature_subset,
    with_interactions: bool,
    k: int = 3,
    seed: int = 0,
) -> float:
    """Mean k-fold validation score for a feature subset, with or without
    all pairwise product terms.

    Regression scores R-squared with an OLS fit; classification scores
    accuracy with a logistic fit.
    """
    subset = tuple(feature_subset)
    if not subset:
        raise ValueError("feature subset must be nonempty")
    return cv_score_terms(ds, rows, expand_pairwise(subset, with_interactions), k, seed)
