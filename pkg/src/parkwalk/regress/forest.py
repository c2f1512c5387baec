"""Random forest regression built from variance-reduction CART trees."""
from __future__ import annotations

import math

import numpy as np

from . import _tree
from .base import FittedModel, check_xy


def resolve_max_features(max_features, d: int) -> int:
    if max_features == "n_features" or max_features is None:
        return d
    if max_features == "sqrt":
        return max(1, int(math.sqrt(d)))
    return max(1, min(d, int(max_features)))


def depth_limit(max_depth) -> int:
    return _tree.NO_DEPTH_LIMIT if max_depth is None else int(max_depth)


class ForestModel(FittedModel):
    family = "random-forest"

    def __init__(self, arrays, n_features, diagnostics):
        super().__init__(n_features, diagnostics)
        (self.offsets, self.feature, self.threshold, self.left, self.right,
         self.value, self.count, self.depth) = arrays

    @property
    def n_trees(self) -> int:
        return len(self.offsets) - 1

    def tree_predictions(self, X) -> np.ndarray:
        X = np.ascontiguousarray(self._check_X(X))
        return _tree.predict_trees(self.offsets, self.feature, self.threshold, self.left, self.right,
                                   self.value, X)

    def predict(self, X) -> np.ndarray:
        return self.tree_predictions(X).mean(axis=0)


def canonical_rows(X, y):
    """Rows sorted lexicographically by (x_0, ..., x_d-1, y).

    Bootstrap draws are keyed by row position, so growing on the canonical
    order makes the forest independent of how the caller ordered the rows.
    """
    order = np.lexsort(np.column_stack([X, y]).T[::-1])
    return np.ascontiguousarray(X[order]), np.ascontiguousarray(y[order])


def grow(X, y, n_estimators, max_features, min_samples_leaf, max_depth, min_samples_split, bootstrap, seed):
    X, y = canonical_rows(*check_xy(X, y))
    d = X.shape[1]
    return _tree.grow_forest(X, y, int(n_estimators), resolve_max_features(max_features, d),
                             int(min_samples_leaf), depth_limit(max_depth), int(min_samples_split),
                             bool(bootstrap), np.uint64(seed))


def fit_random_forest(X, y, n_estimators: int = 100, max_features="n_features", max_depth=None,
                      min_samples_split: int = 2, min_samples_leaf: int = 1, bootstrap: bool = True,
                      seed: int = 0) -> ForestModel:
    """Mean of ``n_estimators`` trees.

    Tree ``t`` draws its bootstrap sample and per-node feature orders from a
    hash of ``(seed, t)``, so results are reproducible and independent of the
    order in which trees are built.
    """
    X, y = check_xy(X, y)
    arrays = grow(X, y, n_estimators, max_features, min_samples_leaf, max_depth, min_samples_split,
                  bootstrap, seed)
    diag = {"iterations": int(n_estimators), "converged": True, "n_nodes": int(arrays[0][-1])}
    return ForestModel(arrays, X.shape[1], diag)
