"""Second-order gradient boosted trees with interaction-constraint partitions.

Trees are grown by exact greedy search: for every allowed feature the rows
are sorted and every boundary between distinct values is scored with the
second-order gain
    0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - (GL+GR)^2/(HL+HR+lambda)) - gamma.
Routing is strictly "go left iff x[feature] < threshold" with thresholds at
midpoints of adjacent distinct values; ties on gain break toward the lower
feature index, then the lower threshold, so training is bit-reproducible.

Constraint semantics: the root may split on any feature; once the root
splits on feature f under a partition, every split below is restricted to
f's group. A per-residual schedule re-runs partition discovery against the
current negative gradients for each of the first x trees.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import DataError, Dataset, RowIndexSet, Task, resolve_rows
from .discovery import (
    ConstraintPartition,
    WrapperConfig,
    discover_constraints_for_residuals,
)
from .linear import sigmoid


@dataclass(frozen=True)
class TrainParams:
    n_trees: int
    max_depth: int
    learning_rate: float
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_samples: int = 1
    min_child_hessian: float = 1e-6
    base_score: float | None = None  # None: mean target / log-odds of target mean
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.reg_lambda < 0 or self.gamma < 0:
            raise ValueError("reg_lambda and gamma must be >= 0")
        if self.min_child_samples < 1:
            raise ValueError("min_child_samples must be >= 1")
        if self.min_child_hessian < 0:
            raise ValueError("min_child_hessian must be >= 0")


@dataclass(frozen=True)
class Node:
    """Internal node (feature >= 0) or leaf (feature == -1, weight set)."""

    feature: int
    threshold: float
    left: int
    right: int
    weight: float

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @classmethod
    def make_leaf(cls, weight: float) -> "Node":
        return cls(-1, 0.0, -1, -1, float(weight))

    @classmethod
    def make_internal(cls, feature: int, threshold: float, left: int, right: int) -> "Node":
        return cls(int(feature), float(threshold), int(left), int(right), 0.0)


@dataclass(frozen=True, eq=False)
class Tree:
    """Binary regression tree addressed by node id; node 0 is the root."""

    nodes: tuple[Node, ...]
    root: int = 0
    used_group: int | None = None

    def leaf_values(self, X: np.ndarray) -> np.ndarray:
        """Leaf weight reached by each row of X (vectorized level-walk)."""
        feature = np.array([n.feature for n in self.nodes], dtype=np.int64)
        threshold = np.array([n.threshold for n in self.nodes])
        left = np.array([n.left for n in self.nodes], dtype=np.int64)
        right = np.array([n.right for n in self.nodes], dtype=np.int64)
        weight = np.array([n.weight for n in self.nodes])
        at = np.full(X.shape[0], self.root, dtype=np.int64)
        while True:
            active = np.nonzero(feature[at] >= 0)[0]
            if active.size == 0:
                break
            node_ids = at[active]
            goes_left = X[active, feature[node_ids]] < threshold[node_ids]
            at[active] = np.where(goes_left, left[node_ids], right[node_ids])
        return weight[at]


@dataclass(frozen=True, eq=False)
class GradHess:
    """Per-row first and second derivatives of the loss at current predictions."""

    g: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class NoConstraints:
    pass


@dataclass(frozen=True)
class FixedPartition:
    partition: ConstraintPartition


@dataclass(frozen=True)
class PerResidual:
    """Constrain the first `first_x` trees; tree 1 uses the original-target
    partition, trees 2..first_x each rediscover one from current residuals."""

    first_x: int
    wrapper_cfg: WrapperConfig
    first_tree_partition: ConstraintPartition

    def __post_init__(self):
        if self.first_x < 1:
            raise ValueError("first_x must be >= 1")


ConstraintSchedule = NoConstraints | FixedPartition | PerResidual


@dataclass(frozen=True, eq=False)
class Ensemble:
    trees: tuple[Tree, ...]
    params: TrainParams
    task: Task
    base_score: float
    n_features: int
    feature_names: tuple[str, ...]
    constraint_log: tuple[ConstraintPartition | None, ...]


def grad_hess(task: Task, y: np.ndarray, raw_pred: np.ndarray) -> GradHess:
    """Squared loss: g = raw - y, h = 1. Logistic: g = p - y, h = p(1-p)."""
    y = np.asarray(y, dtype=np.float64)
    raw_pred = np.asarray(raw_pred, dtype=np.float64)
    if y.shape != raw_pred.shape:
        raise ValueError("target and prediction lengths differ")
    if task is Task.REGRESSION:
        return GradHess(raw_pred - y, np.ones_like(y))
    p = np.clip(sigmoid(raw_pred), 1e-15, 1.0 - 1e-15)
    return GradHess(p - y, p * (1.0 - p))


def leaf_weight(grad_sum: float, hess_sum: float, reg_lambda: float) -> float:
    denom = hess_sum + reg_lambda
    if denom <= 0.0:
        raise ValueError(f"leaf weight undefined: hessian sum + lambda = {denom}")
    return -grad_sum / denom


def split_gain(
    left_grad: float,
    left_hess: float,
    right_grad: float,
    right_hess: float,
    reg_lambda: float,
    gamma: float,
) -> float:
    total_grad = left_grad + right_grad
    total_hess = left_hess + right_hess
    return 0.5 * (
        left_grad**2 / (left_hess + reg_lambda)
        + right_grad**2 / (right_hess + reg_lambda)
        - total_grad**2 / (total_hess + reg_lambda)
    ) - gamma


def _scan_feature(x, g, h, params: TrainParams):
    """Best boundary for one feature over one node's rows.

    Returns (gain, threshold) for the best valid positive-gain boundary, or
    None. Candidates with non-finite gain (possible when both reg_lambda and
    min_child_hessian are zero) are treated as invalid.
    """
    m = x.size
    if m < 2 * params.min_child_samples:
        return None
    order = np.argsort(x, kind="stable")
    xs = x[order]
    if xs[0] == xs[-1]:
        return None
    cg = np.cumsum(g[order])
    ch = np.cumsum(h[order])
    boundary = np.nonzero(xs[:-1] < xs[1:])[0]
    left_count = boundary + 1
    GL = cg[boundary]
    HL = ch[boundary]
    G = cg[-1]
    H = ch[-1]
    GR = G - GL
    HR = H - HL
    valid = (
        (left_count >= params.min_child_samples)
        & (m - left_count >= params.min_child_samples)
        & (HL >= params.min_child_hessian)
        & (HR >= params.min_child_hessian)
    )
    if not valid.any():
        return None
    lam = params.reg_lambda
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam)) - params.gamma
    gains[~valid | ~np.isfinite(gains)] = -np.inf
    best = int(np.argmax(gains))  # first max: lowest threshold wins ties
    if not gains[best] > 0.0:
        return None
    threshold = (xs[boundary[best]] + xs[boundary[best] + 1]) / 2.0
    return float(gains[best]), float(threshold)


@dataclass(frozen=True, eq=False)
class Split:
    feature: int
    threshold: float
    gain: float
    left_rows: RowIndexSet
    right_rows: RowIndexSet


def best_split(
    rows: RowIndexSet,
    allowed,
    gh: GradHess,
    ds: Dataset,
    params: TrainParams,
) -> Split | None:
    """Exact greedy best split over the allowed features, or None.

    `gh` is aligned with `rows` (entry i belongs to rows.indices[i]).
    """
    rows = resolve_rows(ds, rows)
    if len(rows) == 0:
        raise ValueError("best_split requires a nonempty row set")
    allowed = sorted(set(allowed))
    if not allowed:
        raise ValueError("best_split requires a nonempty allowed set")
    if gh.g.shape != (len(rows),) or gh.h.shape != (len(rows),):
        raise ValueError("gradient vectors must align with the row set")
    best = None
    for f in allowed:
        x = ds.features[rows.indices, f]
        found = _scan_feature(x, gh.g, gh.h, params)
        if found is not None and (best is None or found[0] > best[0]):
            best = (found[0], found[1], f)
    if best is None:
        return None
    gain, threshold, feature = best
    mask = ds.features[rows.indices, feature] < threshold
    return Split(
        feature=feature,
        threshold=threshold,
        gain=gain,
        left_rows=RowIndexSet(rows.indices[mask]),
        right_rows=RowIndexSet(rows.indices[~mask]),
    )


def _grow(
    rows: RowIndexSet,
    gh: GradHess,
    ds: Dataset,
    params: TrainParams,
    partition: ConstraintPartition | None,
) -> tuple[Tree, np.ndarray]:
    """Grow one tree; also returns each training row's leaf weight."""
    Xsub = ds.features[rows.indices, :]
    g, h = gh.g, gh.h
    if g.shape != (len(rows),) or h.shape != (len(rows),):
        raise ValueError("gradient vectors must align with the row set")
    all_features = tuple(range(ds.n_features))
    nodes: list[Node | None] = []
    train_values = np.empty(len(rows))
    used_group: list[int | None] = [None]

    def build(pos: np.ndarray, depth: int, allowed) -> int:
        found = None
        if depth < params.max_depth:
            for f in allowed:
                scan = _scan_feature(Xsub[pos, f], g[pos], h[pos], params)
                if scan is not None and (found is None or scan[0] > found[0]):
                    found = (scan[0], scan[1], f)
        if found is None:
            weight = leaf_weight(float(g[pos].sum()), float(h[pos].sum()), params.reg_lambda)
            nodes.append(Node.make_leaf(weight))
            train_values[pos] = weight
            return len(nodes) - 1
        _, threshold, feature = found
        if partition is not None and depth == 0:
            group_index = partition.group_index_of(feature)
            used_group[0] = group_index
            # ascending order keeps the lower-feature-index tie-break exact
            child_allowed = tuple(sorted(partition.groups[group_index]))
        else:
            child_allowed = allowed
        node_id = len(nodes)
        nodes.append(None)
        goes_left = Xsub[pos, feature] < threshold
        left_id = build(pos[goes_left], depth + 1, child_allowed)
        right_id = build(pos[~goes_left], depth + 1, child_allowed)
        nodes[node_id] = Node.make_internal(feature, threshold, left_id, right_id)
        return node_id

    root = build(np.arange(len(rows)), 0, all_features)
    return Tree(tuple(nodes), root, used_group[0]), train_values


def grow_tree(
    rows: RowIndexSet,
    gh: GradHess,
    ds: Dataset,
    params: TrainParams,
    partition: ConstraintPartition | None = None,
) -> Tree:
    """Depth-first exact greedy tree growth; see module doc for constraint rules."""
    rows = resolve_rows(ds, rows)
    if partition is not None:
        partition.validate_for(ds.n_features)
    return _grow(rows, gh, ds, params, partition)[0]


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def default_base_score(task: Task, y: np.ndarray) -> float:
    """Mean target for regression; log-odds of the clamped target mean otherwise."""
    if task is Task.REGRESSION:
        return float(np.mean(y))
    return _logit(min(max(float(np.mean(y)), 1e-6), 1.0 - 1e-6))


def _partition_for_round(
    schedule: ConstraintSchedule,
    tree_number: int,
    ds: Dataset,
    rows: RowIndexSet,
    gh: GradHess,
) -> ConstraintPartition | None:
    if isinstance(schedule, NoConstraints):
        return None
    if isinstance(schedule, FixedPartition):
        return schedule.partition
    if tree_number == 1:
        return schedule.first_tree_partition
    if tree_number <= schedule.first_x:
        return discover_constraints_for_residuals(ds, rows, -gh.g, schedule.wrapper_cfg)
    return None


def train(
    ds: Dataset,
    rows: RowIndexSet | None,
    params: TrainParams,
    schedule: ConstraintSchedule = NoConstraints(),
) -> Ensemble:
    """Boost `params.n_trees` trees under the given constraint schedule.

    Each round fits a tree to the current gradients/hessians and adds
    learning_rate times its leaf outputs to the raw predictions. The
    partition applied to each tree is recorded in the constraint log.
    """
    rows = resolve_rows(ds, rows)
    if len(rows) == 0:
        raise ValueError("training requires a nonempty row set")
    if isinstance(schedule, FixedPartition):
        schedule.partition.validate_for(ds.n_features)
    elif isinstance(schedule, PerResidual):
        schedule.first_tree_partition.validate_for(ds.n_features)
    y = ds.target[rows.indices]
    base = params.base_score if params.base_score is not None else default_base_score(ds.task, y)
    raw = np.full(len(rows), base)
    trees: list[Tree] = []
    log: list[ConstraintPartition | None] = []
    for tree_number in range(1, params.n_trees + 1):
        gh = grad_hess(ds.task, y, raw)
        partition = _partition_for_round(schedule, tree_number, ds, rows, gh)
        tree, contribution = _grow(rows, gh, ds, params, partition)
        raw = raw + params.learning_rate * contribution
        trees.append(tree)
        log.append(partition)
    return Ensemble(
        trees=tuple(trees),
        params=params,
        task=ds.task,
        base_score=float(base),
        n_features=ds.n_features,
        feature_names=ds.feature_names,
        constraint_log=tuple(log),
    )


def predict_raw_matrix(ens: Ensemble, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != ens.n_features:
        raise DataError(
            f"feature count mismatch: model expects {ens.n_features}, got {X.shape}"
        )
    raw = np.full(X.shape[0], ens.base_score)
    for tree in ens.trees:
        raw = raw + ens.params.learning_rate * tree.leaf_values(X)
    return raw


def predict_matrix(ens: Ensemble, X: np.ndarray) -> np.ndarray:
    raw = predict_raw_matrix(ens, X)
    if ens.task is Task.REGRESSION:
        return raw
    return sigmoid(raw)


def predict_raw(ens: Ensemble, ds: Dataset, rows: RowIndexSet | None = None) -> np.ndarray:
    rows = resolve_rows(ds, rows)
    return predict_raw_matrix(ens, ds.features[rows.indices, :])


def predict(ens: Ensemble, ds: Dataset, rows: RowIndexSet | None = None) -> np.ndarray:
    """Raw sum for regression; sigmoid of the raw sum for classification."""
    rows = resolve_rows(ds, rows)
    return predict_matrix(ens, ds.features[rows.indices, :])


# --- JSON serialization (schema documented in the README) -------------------


def _node_to_obj(node: Node) -> dict:
    if node.is_leaf:
        return {"leaf": node.weight}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": node.left,
        "right": node.right,
    }


def _node_from_obj(obj: dict) -> Node:
    if "leaf" in obj:
        return Node.make_leaf(float(obj["leaf"]))
    return Node.make_internal(obj["feature"], obj["threshold"], obj["left"], obj["right"])


def ensemble_to_json_obj(ens: Ensemble) -> dict:
    params = {
        "n_trees": ens.params.n_trees,
        "max_depth": ens.params.max_depth,
        "learning_rate": ens.params.learning_rate,
        "reg_lambda": ens.params.reg_lambda,
        "gamma": ens.params.gamma,
        "min_child_samples": ens.params.min_child_samples,
        "min_child_hessian": ens.params.min_child_hessian,
        "base_score": ens.params.base_score,
        "seed": ens.params.seed,
    }
    return {
        "task": ens.task.value,
        "params": params,
        "base_score": ens.base_score,
        "n_features": ens.n_features,
        "feature_names": list(ens.feature_names),
        "trees": [
            {
                "nodes": [_node_to_obj(n) for n in tree.nodes],
                "root": tree.root,
                "used_group": tree.used_group,
            }
            for tree in ens.trees
        ],
        "constraint_log": [
            None if p is None else p.to_json_obj() for p in ens.constraint_log
        ],
    }


def ensemble_from_json_obj(obj: dict) -> Ensemble:
    try:
        params = TrainParams(**obj["params"])
        trees = tuple(
            Tree(
                nodes=tuple(_node_from_obj(n) for n in t["nodes"]),
                root=int(t["root"]),
                used_group=t["used_group"],
            )
            for t in obj["trees"]
        )
        return Ensemble(
            trees=trees,
            params=params,
            task=Task.parse(obj["task"]),
            base_score=float(obj["base_score"]),
            n_features=int(obj["n_features"]),
            feature_names=tuple(obj["feature_names"]),
            constraint_log=tuple(
                None if p is None else ConstraintPartition.from_json_obj(p)
                for p in obj["constraint_log"]
            ),
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed model document: {exc}") from exc


def save_model(ens: Ensemble, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ensemble_to_json_obj(ens), fh, indent=2)
        fh.write("\n")


def load_model(path) -> Ensemble:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    return ensemble_from_json_obj(obj)
