from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

from ..errors import ValidationError

FAMILIES = ("null", "svr-linear", "svr-rbf", "svr-poly", "lasso", "elastic-net", "random-forest")

_DEFAULTS: dict[str, dict[str, Any]] = {
    "null": {},
    "svr-linear": {"epsilon": 0.1},
    "svr-rbf": {"gamma": "scale", "epsilon": 0.1},
    "svr-poly": {"gamma": "scale", "degree": 3, "coef0": 0.0, "epsilon": 0.1},
    "lasso": {},
    "elastic-net": {},
    "random-forest": {
        "n_estimators": 100,
        "max_features": "n_features",
        "max_depth": None,
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "bootstrap": True,
    },
}
_REQUIRED = {
    "svr-linear": ("C",),
    "svr-rbf": ("C",),
    "svr-poly": ("C",),
    "lasso": ("alpha",),
    "elastic-net": ("alpha", "l1_ratio"),
}


@dataclass(frozen=True)
class RegressorSpec:
    """A model family plus its hyperparameters, validated on construction."""

    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown model family {self.family!r}")
        params = dict(_DEFAULTS[self.family])
        params.update(self.params)
        allowed = set(_DEFAULTS[self.family]) | set(_REQUIRED.get(self.family, ()))
        extra = set(params) - allowed
        if extra:
            raise ValidationError(f"{self.family}: unexpected hyperparameters {sorted(extra)}")
        missing = [k for k in _REQUIRED.get(self.family, ()) if k not in params]
        if missing:
            raise ValidationError(f"{self.family}: missing hyperparameters {missing}")
        _check(self.family, params)
        object.__setattr__(self, "params", MappingProxyType(params))

    def with_params(self, **kw) -> "RegressorSpec":
        p = dict(self.params)
        p.update(kw)
        return RegressorSpec(self.family, p, self.seed)

    def params_json(self) -> str:
        return json.dumps(dict(self.params), sort_keys=True)


def _check(family, p):
    if "C" in p and not p["C"] > 0:
        raise ValidationError("C must be positive")
    if "epsilon" in p and not p["epsilon"] >= 0:
        raise ValidationError("epsilon must be non-negative")
    if "alpha" in p and not p["alpha"] >= 0:
        raise ValidationError("alpha must be non-negative")
    if "l1_ratio" in p and not 0 <= p["l1_ratio"] <= 1:
        raise ValidationError("l1_ratio must lie in [0, 1]")
    if "degree" in p and (int(p["degree"]) != p["degree"] or p["degree"] < 1):
        raise ValidationError("degree must be a positive integer")
    if "gamma" in p and not (p["gamma"] in ("auto", "scale") or (isinstance(p["gamma"], (int, float)) and p["gamma"] > 0)):
        raise ValidationError(f"bad gamma {p['gamma']!r}")
    if family == "random-forest":
        if int(p["n_estimators"]) < 1:
            raise ValidationError("n_estimators must be >= 1")
        if p["max_depth"] is not None and int(p["max_depth"]) < 1:
            raise ValidationError("max_depth must be >= 1 or None")
        if int(p["min_samples_split"]) < 2:
            raise ValidationError("min_samples_split must be >= 2")
        if int(p["min_samples_leaf"]) < 1:
            raise ValidationError("min_samples_leaf must be >= 1")
        mf = p["max_features"]
        if not (mf in ("n_features", "sqrt") or (isinstance(mf, int) and mf >= 1)):
            raise ValidationError(f"bad max_features {mf!r}")


class FittedModel:
    """Common surface of every fitted regressor: ``predict`` plus training diagnostics."""

    family: str = ""

    def __init__(self, n_features: int, diagnostics: dict | None = None):
        self.n_features = n_features
        self.diagnostics = diagnostics or {}

    def _check_X(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValidationError(f"expected {self.n_features} features, got shape {X.shape}")
        return X

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError


class NullModel(FittedModel):
    family = "null"

    def __init__(self, mean: float, n_features: int = 0):
        super().__init__(n_features, {"iterations": 0, "converged": True})
        self.mean = float(mean)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.full(X.shape[0], self.mean)


def check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValidationError("X must be 2-d")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValidationError("y must be 1-d with one value per row of X")
    if X.shape[0] == 0:
        raise ValidationError("empty training set")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("training data contains NaN or infinity")
    return X, y


def fit_null(y, n_features: int = 0) -> NullModel:
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValidationError("empty target")
    return NullModel(y.mean(), n_features)


def mae(y_pred, y_true) -> float:
    a = np.asarray(y_pred, dtype=float)
    b = np.asarray(y_true, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"length mismatch {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))
