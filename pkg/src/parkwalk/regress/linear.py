"""LASSO and Elastic Net by cyclic coordinate descent with an unpenalized intercept."""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ._cd import enet_cd
from .base import FittedModel, check_xy

TOL = 1e-7
MAX_SWEEPS = 10_000


class LinearModel(FittedModel):
    def __init__(self, family, coef, intercept, diagnostics):
        super().__init__(len(coef), diagnostics)
        self.family = family
        self.coef = np.asarray(coef, dtype=float)
        self.intercept = float(intercept)

    def predict(self, X) -> np.ndarray:
        return self._check_X(X) @ self.coef + self.intercept


def centered_gram(X, y):
    """Column means and Gram statistics of the centered problem."""
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc = X - xm
    yc = y - ym
    return xm, ym, Xc.T @ Xc, Xc.T @ yc, float(yc @ yc)


def fit_elastic_net(X, y, alpha: float, l1_ratio: float, tol: float = TOL, max_sweeps: int = MAX_SWEEPS,
                    gram_stats=None, family: str = "elastic-net") -> LinearModel:
    """Minimize ``1/(2n)||y - Xw - b||^2 + alpha*(l1_ratio*|w|_1 + (1-l1_ratio)/2*|w|^2)``.

    ``gram_stats`` may carry a precomputed :func:`centered_gram` for ``(X, y)``.
    A run that hits ``max_sweeps`` is returned with ``converged=False``.
    """
    X, y = check_xy(X, y)
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")
    if not 0 <= l1_ratio <= 1:
        raise ValidationError("l1_ratio must lie in [0, 1]")
    n, d = X.shape
    xm, ym, gram, xty, yty = gram_stats if gram_stats is not None else centered_gram(X, y)
    w, sweeps, converged, hist = enet_cd(gram, xty, yty, float(n), float(alpha), float(l1_ratio),
                                         tol, max_sweeps, np.zeros(d))
    diag = {"iterations": int(sweeps), "converged": bool(converged), "objective": float(hist[-1]),
            "objective_history": hist}
    return LinearModel(family, w, ym - xm @ w, diag)


def fit_lasso(X, y, alpha: float, **kw) -> LinearModel:
    return fit_elastic_net(X, y, alpha, 1.0, family="lasso", **kw)


def lasso_alpha_max(X, y) -> float:
    """Smallest alpha at which every LASSO weight is zero."""
    X, y = check_xy(X, y)
    return float(np.max(np.abs((X - X.mean(0)).T @ (y - y.mean()))) / len(y))
