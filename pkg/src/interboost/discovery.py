"""Automatic discovery of feature-interaction constraint partitions.

A forward-selection wrapper grows one group at a time. A new group is
seeded with the single best-scoring feature; then, for each remaining
feature f, two cross-validated models over the open group plus f are
compared: one whose product terms stop at the group's own pairs, and one
that also has f's products with the group. f is a candidate when the
latter wins by more than epsilon, so candidacy measures exactly the value
of f's interactions with the group (the group's established products are
in both models and cannot recount). The best candidate by interaction
score joins; when none qualifies the group is closed and a fresh one
starts, until every feature is placed. Groups are disjoint and exhaustive,
and product terms never span closed groups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .data import Dataset, DataError, RowIndexSet, Task, replace_target, resolve_rows, take_rows
from .linear import Base, Product, cv_score_terms


@dataclass(frozen=True, eq=False)
class ConstraintPartition:
    """Disjoint, exhaustive groups of feature indices.

    Group and within-group order reflect discovery order. Exhaustiveness is
    relative to a feature count, checked via `validate_for`.
    """

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(f) for f in g) for g in self.groups)
        seen: set[int] = set()
        for group in groups:
            if not group:
                raise DataError("constraint groups must be nonempty")
            for f in group:
                if f < 0:
                    raise DataError(f"negative feature index {f} in constraint group")
                if f in seen:
                    raise DataError(f"feature {f} appears in more than one constraint group")
                seen.add(f)
        lookup = {f: gi for gi, group in enumerate(groups) for f in group}
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "_lookup", lookup)

    def validate_for(self, n_features: int) -> "ConstraintPartition":
        covered = set(self._lookup)
        if covered != set(range(n_features)):
            raise DataError(
                f"constraint groups must cover features 0..{n_features - 1} exactly; "
                f"got {sorted(covered)}"
            )
        return self

    def group_index_of(self, feature: int) -> int:
        return self._lookup[feature]

    def to_json_obj(self) -> list[list[int]]:
        return [list(g) for g in self.groups]

    @classmethod
    def from_json_obj(cls, obj, n_features: int | None = None) -> "ConstraintPartition":
        if not isinstance(obj, list) or not all(isinstance(g, list) for g in obj):
            raise DataError("constraint file must be a JSON array of arrays of feature indices")
        for g in obj:
            for f in g:
                if not isinstance(f, int) or isinstance(f, bool):
                    raise DataError(f"constraint group entry {f!r} is not an integer")
        partition = cls(tuple(tuple(g) for g in obj))
        if n_features is not None:
            partition.validate_for(n_features)
        return partition


@dataclass(frozen=True)
class WrapperConfig:
    k_folds: int = 3
    seed: int = 0
    epsilon: float = 1e-6
    max_group_size: int | None = None

    def __post_init__(self):
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.max_group_size is not None and self.max_group_size < 1:
            raise ValueError("max_group_size must be >= 1 (or None for unlimited)")


@dataclass(frozen=True)
class CandidateScore:
    """Cross-validation scores for one candidate feature at one step."""

    feature: int
    plain: float
    interaction: float | None

    def to_json_obj(self) -> dict:
        return {"feature": self.feature, "plain": self.plain, "interaction": self.interaction}


@dataclass(frozen=True)
class DiscoveryStep:
    """One step of the discovery loop; `subset` is the open group afterwards."""

    action: str  # "seed" | "add" | "close"
    feature: int | None
    plain_score: float | None
    interaction_score: float | None
    subset: tuple[int, ...]
    candidates: tuple[CandidateScore, ...]

    def to_json_obj(self) -> dict:
        return {
            "action": self.action,
            "feature": self.feature,
            "plain_score": self.plain_score,
            "interaction_score": self.interaction_score,
            "subset": list(self.subset),
            "candidates": [c.to_json_obj() for c in self.candidates],
        }


def _terms(features: list[int], interaction_scope: list[int]):
    """Bases for `features` (in order) plus all pairwise products among
    `interaction_scope`, in lexicographic index order."""
    bases = [Base(i) for i in features]
    products = [
        Product(a, b) for a, b in itertools.combinations(sorted(interaction_scope), 2)
    ]
    return tuple(bases + products)


def _discover(sub: Dataset, cfg: WrapperConfig) -> tuple[ConstraintPartition, tuple[DiscoveryStep, ...]]:
    all_rows = RowIndexSet.all_rows(sub.n_rows)

    def score(terms) -> float:
        return cv_score_terms(sub, all_rows, terms, cfg.k_folds, cfg.seed)

    remaining = list(range(sub.n_features))
    groups: list[list[int]] = []
    subset: list[int] = []
    steps: list[DiscoveryStep] = []
    while remaining:
        if not subset:
            # Seed a fresh group with the best single feature by plain score.
            evals = tuple(
                CandidateScore(f, score(_terms([f], [])), None) for f in remaining
            )
            best = max(evals, key=lambda c: (c.plain, -c.feature))
            subset.append(best.feature)
            remaining.remove(best.feature)
            steps.append(
                DiscoveryStep("seed", best.feature, best.plain, None, tuple(subset), evals)
            )
            continue
        if cfg.max_group_size is not None and len(subset) >= cfg.max_group_size:
            groups.append(subset)
            steps.append(DiscoveryStep("close", None, None, None, tuple(subset), ()))
            subset = []
            continue
        evals = []
        candidates = []
        for f in remaining:
            plain = score(_terms(subset + [f], subset))
            inter = score(_terms(subset + [f], subset + [f]))
            evals.append(CandidateScore(f, plain, inter))
            if inter > plain + cfg.epsilon:
                candidates.append(evals[-1])
        if candidates:
            best = max(candidates, key=lambda c: (c.interaction, -c.feature))
            subset.append(best.feature)
            remaining.remove(best.feature)
            steps.append(
                DiscoveryStep(
                    "add", best.feature, best.plain, best.interaction, tuple(subset), tuple(evals)
                )
            )
        else:
            groups.append(subset)
            steps.append(DiscoveryStep("close", None, None, None, tuple(subset), tuple(evals)))
            subset = []
    if subset:
        groups.append(subset)
        steps.append(DiscoveryStep("close", None, None, None, tuple(subset), ()))
    partition = ConstraintPartition(tuple(tuple(g) for g in groups)).validate_for(sub.n_features)
    return partition, tuple(steps)


def discover_constraints_traced(
    ds: Dataset, rows: RowIndexSet | None, cfg: WrapperConfig
) -> tuple[ConstraintPartition, tuple[DiscoveryStep, ...]]:
    """Like discover_constraints but also returns the per-step score log."""
    rows = resolve_rows(ds, rows)
    if len(rows) == 0:
        raise ValueError("discovery requires a nonempty row set")
    return _discover(take_rows(ds, rows), cfg)


def discover_constraints(
    ds: Dataset, rows: RowIndexSet | None, cfg: WrapperConfig
) -> ConstraintPartition:
    """Partition the feature set by iterative wrapper selection (see module doc)."""
    return discover_constraints_traced(ds, rows, cfg)[0]


def discover_constraints_for_residuals(
    ds: Dataset,
    rows: RowIndexSet | None,
    residual_target: np.ndarray,
    cfg: WrapperConfig,
) -> ConstraintPartition:
    """Discovery against a residual vector instead of the original target.

    Residuals are continuous even for classification tasks, so scoring
    always takes the regression (least squares / R-squared) path.
    """
    rows = resolve_rows(ds, rows)
    residual_target = np.asarray(residual_target, dtype=np.float64)
    if residual_target.shape != (len(rows),):
        raise ValueError(
            f"residual target length {residual_target.shape} does not match {len(rows)} rows"
        )
    sub = replace_target(take_rows(ds, rows), residual_target, Task.REGRESSION)
    return _discover(sub, cfg)[0]
