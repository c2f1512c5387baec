"""Regression models benchmarked against a constant (mean) predictor."""
from __future__ import annotations

from .base import FAMILIES, FittedModel, NullModel, RegressorSpec, check_xy, fit_null, mae
from .forest import ForestModel, fit_random_forest
from .linear import LinearModel, fit_elastic_net, fit_lasso, lasso_alpha_max
from .svr import SVRModel, fit_svr, kernel_eval, kernel_matrix, resolve_gamma


def fit(spec: RegressorSpec, X, y) -> FittedModel:
    X, y = check_xy(X, y)
    p = dict(spec.params)
    fam = spec.family
    if fam == "null":
        return fit_null(y, X.shape[1])
    if fam == "lasso":
        return fit_lasso(X, y, p["alpha"])
    if fam == "elastic-net":
        return fit_elastic_net(X, y, p["alpha"], p["l1_ratio"])
    if fam.startswith("svr-"):
        return fit_svr(X, y, kernel=fam[4:], **p)
    return fit_random_forest(X, y, seed=spec.seed, **p)


def predict(model: FittedModel, X):
    return model.predict(X)


__all__ = [
    "FAMILIES",
    "RegressorSpec",
    "FittedModel",
    "NullModel",
    "LinearModel",
    "SVRModel",
    "ForestModel",
    "fit",
    "predict",
    "mae",
    "fit_null",
    "fit_lasso",
    "fit_elastic_net",
    "fit_svr",
    "fit_random_forest",
    "kernel_eval",
    "kernel_matrix",
    "resolve_gamma",
    "lasso_alpha_max",
]
