"""Gradient-boosted regression trees with exact greedy splits.

Squared-error stagewise boosting: stage 0 predicts the target mean, every
later stage fits a depth-limited tree to the current residuals and is added
with a shrinkage factor. Split search is exhaustive over midpoints between
consecutive distinct feature values; the split with the largest residual-SSE
reduction wins, ties broken by lowest feature index then lowest threshold so
fits are reproducible. Feature importance is the classic split-count
(F-score) per feature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .features import FeatureMatrix


@dataclass(frozen=True)
class EarlyStopping:
    validation_fraction: float
    patience: int

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValidationError("validation_fraction must be in (0, 1)")
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")


@dataclass(frozen=True)
class GbrtParams:
    max_depth: int = 10
    n_estimators: int = 15
    learning_rate: float = 0.3
    min_samples_leaf: int = 1
    early_stopping: EarlyStopping | None = None

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValidationError("max_depth must be >= 1")
        if self.n_estimators < 1:
            raise ValidationError("n_estimators must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValidationError("learning_rate must be in (0, 1]")
        if self.min_samples_leaf < 1:
            raise ValidationError("min_samples_leaf must be >= 1")


@dataclass
class TreeNode:
    """Internal node (feature_index, threshold, children) or leaf (value)."""

    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_internal(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + self.left.n_internal() + self.right.n_internal()

    def to_dict(self) -> dict[str, Any]:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": self.feature_index,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "TreeNode":
        if "value" in doc:
            return cls(value=doc["value"])
        return cls(
            feature_index=doc["feature"],
            threshold=doc["threshold"],
            left=cls.from_dict(doc["left"]),
            right=cls.from_dict(doc["right"]),
        )


def best_split(
    rows: np.ndarray, residuals: np.ndarray, min_samples_leaf: int = 1
) -> tuple[int, float, float] | None:
    """Exhaustive greedy split of one node.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values of each feature; the score is the drop in residual SSE. Returns
    (feature_index, threshold, gain) or None when no candidate both respects
    ``min_samples_leaf`` and has positive gain.
    """
    X = np.asarray(rows, dtype=float)
    r = np.asarray(residuals, dtype=float)
    n = len(r)
    if X.ndim != 2 or X.shape[0] != n:
        raise ValidationError("rows/residuals shape mismatch")
    if n < 2:
        return None
    if np.all(r == r[0]):
        return None  # every gain is zero by definition; don't let rounding decide
    # Centering leaves every SSE difference unchanged but keeps the prefix-sum
    # arithmetic stable when residual means are large.
    r = r - r.mean()
    total = r.sum()
    parent_term = total * total / n
    best: tuple[float, int, float] | None = None
    for j in range(X.shape[1]):
        v = X[:, j]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        rs = r[order]
        cut = np.nonzero(vs[:-1] < vs[1:])[0]
        if cut.size == 0:
            continue
        n_left = cut + 1
        n_right = n - n_left
        ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not ok.any():
            continue
        left_sum = np.cumsum(rs)[cut]
        gain = left_sum**2 / n_left + (total - left_sum) ** 2 / n_right - parent_term
        gain[~ok] = -np.inf
        i = int(np.argmax(gain))  # first max -> lowest threshold
        g = float(gain[i])
        # Identical row partitions are reachable through different features and
        # have mathematically equal gains; a relative margin keeps rounding
        # noise from overriding the lowest-feature-index tie rule.
        if g > 0.0 and (best is None or g > best[0] * (1.0 + 1e-9)):
            best = (g, j, float((vs[cut[i]] + vs[cut[i] + 1]) / 2.0))
    if best is None:
        return None
    return best[1], best[2], best[0]


def _grow_tree(
    X: np.ndarray,
    residuals: np.ndarray,
    idx: np.ndarray,
    depth_left: int,
    min_samples_leaf: int,
    split_counts: np.ndarray,
    fitted: np.ndarray,
) -> TreeNode:
    node_r = residuals[idx]
    split = None
    if depth_left > 0 and idx.size >= 2:
        split = best_split(X[idx], node_r, min_samples_leaf)
    if split is None:
        value = float(node_r.mean())
        fitted[idx] = value
        return TreeNode(value=value)
    feature_index, threshold, _ = split
    split_counts[feature_index] += 1
    mask = X[idx, feature_index] < threshold
    left = _grow_tree(X, residuals, idx[mask], depth_left - 1, min_samples_leaf,
                      split_counts, fitted)
    right = _grow_tree(X, residuals, idx[~mask], depth_left - 1, min_samples_leaf,
                       split_counts, fitted)
    return TreeNode(feature_index=feature_index, threshold=threshold, left=left, right=right)


def _predict_tree(node: TreeNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if idx.size == 0:
        return
    if node.is_leaf:
        out[idx] = node.value
        return
    mask = X[idx, node.feature_index] < node.threshold
    _predict_tree(node.left, X, idx[mask], out)
    _predict_tree(node.right, X, idx[~mask], out)


def _route_row(node: TreeNode, row: np.ndarray) -> float:
    while not node.is_leaf:
        node = node.left if row[node.feature_index] < node.threshold else node.right
    return node.value


@dataclass
class TreeEnsemble:
    base_score: float
    trees: list[TreeNode]
    learning_rate: float
    column_names: list[str]
    split_counts: dict[str, int] = field(default_factory=dict)

    def predict(self, rows: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(rows, dtype=float))
        if X.shape[1] != len(self.column_names):
            raise ValidationError(
                f"expected {len(self.column_names)} columns, got {X.shape[1]}"
            )
        out = np.full(X.shape[0], self.base_score, dtype=float)
        idx = np.arange(X.shape[0])
        buf = np.empty(X.shape[0], dtype=float)
        for tree in self.trees:
            _predict_tree(tree, X, idx, buf)
            out += self.learning_rate * buf
        return out

    def predict_row(self, row: np.ndarray) -> float:
        row = np.asarray(row, dtype=float).ravel()
        if row.size != len(self.column_names):
            raise ValidationError(
                f"expected {len(self.column_names)} columns, got {row.size}"
            )
        return self.base_score + self.learning_rate * sum(
            _route_row(t, row) for t in self.trees
        )

    def n_internal_nodes(self) -> int:
        return sum(t.n_internal() for t in self.trees)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "tree_ensemble.v1",
                "base_score": self.base_score,
                "learning_rate": self.learning_rate,
                "columns": self.column_names,
                "split_counts": self.split_counts,
                "trees": [t.to_dict() for t in self.trees],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "TreeEnsemble":
        doc = json.loads(text)
        if doc.get("schema") != "tree_ensemble.v1":
            raise ValidationError(f"not an ensemble artifact: {doc.get('schema')!r}")
        return cls(
            base_score=doc["base_score"],
            trees=[TreeNode.from_dict(t) for t in doc["trees"]],
            learning_rate=doc["learning_rate"],
            column_names=list(doc["columns"]),
            split_counts={k: int(v) for k, v in doc["split_counts"].items()},
        )


@dataclass(frozen=True)
class FScoreReport:
    """(feature, split count) pairs, descending; ties by ascending column index."""

    scores: tuple[tuple[str, int], ...]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.scores)

    def ranked_names(self) -> list[str]:
        return [name for name, _ in self.scores]


def fit_gbrt(m: FeatureMatrix, params: GbrtParams = GbrtParams(), seed: int = 0) -> TreeEnsemble:
    """Fit the boosted ensemble on a feature matrix.

    With early stopping enabled, a seeded random fraction of rows is held out;
    boosting halts after ``patience`` rounds without a new best validation
    RMSE and the ensemble is truncated to the best round.
    """
    X = m.rows
    y = m.target
    n = len(y)
    if n < 2:
        raise InsufficientDataError("gbrt needs at least 2 rows")
    if params.early_stopping is not None:
        rng = np.random.default_rng(seed)
        perm = rng.permutation(n)
        n_val = max(1, int(round(params.early_stopping.validation_fraction * n)))
        if n - n_val < 2:
            raise InsufficientDataError("validation split leaves fewer than 2 training rows")
        val_idx, fit_idx = perm[:n_val], perm[n_val:]
    else:
        val_idx, fit_idx = None, np.arange(n)

    X_fit, y_fit = X[fit_idx], y[fit_idx]
    base = float(y_fit.mean())
    preds = np.full(len(fit_idx), base, dtype=float)
    counts = np.zeros(X.shape[1], dtype=int)
    counts_per_tree: list[np.ndarray] = []
    trees: list[TreeNode] = []

    val_preds = None
    best_rmse = np.inf
    best_round = 0
    rounds_since_best = 0
    if val_idx is not None:
        val_preds = np.full(len(val_idx), base, dtype=float)
        best_rmse = float(np.sqrt(np.mean((y[val_idx] - val_preds) ** 2)))

    all_fit = np.arange(len(fit_idx))
    for _ in range(params.n_estimators):
        residuals = y_fit - preds
        tree_counts = np.zeros(X.shape[1], dtype=int)
        fitted = np.empty(len(fit_idx), dtype=float)
        tree = _grow_tree(X_fit, residuals, all_fit, params.max_depth,
                          params.min_samples_leaf, tree_counts, fitted)
        trees.append(tree)
        counts_per_tree.append(tree_counts)
        preds += params.learning_rate * fitted
        if val_idx is not None:
            buf = np.empty(len(val_idx), dtype=float)
            _predict_tree(tree, X[val_idx], np.arange(len(val_idx)), buf)
            val_preds += params.learning_rate * buf
            rmse = float(np.sqrt(np.mean((y[val_idx] - val_preds) ** 2)))
            if rmse < best_rmse:
                best_rmse = rmse
                best_round = len(trees)
                rounds_since_best = 0
            else:
                rounds_since_best += 1
                if rounds_since_best >= params.early_stopping.patience:
                    break

    if val_idx is not None:
        trees = trees[:best_round]
        counts_per_tree = counts_per_tree[:best_round]

    counts = np.sum(counts_per_tree, axis=0) if counts_per_tree else counts
    split_counts = {name: int(c) for name, c in zip(m.column_names, counts)}
    return TreeEnsemble(
        base_score=base,
        trees=trees,
        learning_rate=params.learning_rate,
        column_names=m.column_names,
        split_counts=split_counts,
    )


def predict_ensemble(e: TreeEnsemble, row: np.ndarray) -> float:
    return e.predict_row(row)


def feature_importance(e: TreeEnsemble) -> FScoreReport:
    pairs = [(name, e.split_counts.get(name, 0)) for name in e.column_names]
    order = sorted(range(len(pairs)), key=lambda i: (-pairs[i][1], i))
    return FScoreReport(tuple(pairs[i] for i in order))
