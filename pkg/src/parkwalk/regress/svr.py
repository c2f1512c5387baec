"""Epsilon-insensitive support vector regression with linear, polynomial and RBF kernels."""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ._smo import smo_svr
from .base import FittedModel, check_xy

KERNELS = ("linear", "poly", "rbf")
TOL = 1e-3
MAX_ITER = 10_000_000


def resolve_gamma(gamma, X) -> float:
    """``auto`` is ``1/d``; ``scale`` is ``1/(d * X.var())`` over all entries pooled."""
    d = X.shape[1]
    if gamma == "auto":
        return 1.0 / d
    if gamma == "scale":
        v = float(np.asarray(X, dtype=float).var())
        return 1.0 / (d * v) if v > 0 else 1.0
    return float(gamma)


def kernel_eval(kind: str, u, v, gamma: float = 1.0, degree: int = 3, coef0: float = 0.0) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValidationError(f"dimension mismatch {u.shape} vs {v.shape}")
    if kind == "linear":
        return float(u @ v)
    if kind == "poly":
        return float((gamma * (u @ v) + coef0) ** degree)
    if kind == "rbf":
        diff = u - v
        return float(np.exp(-gamma * (diff @ diff)))
    raise ValidationError(f"unknown kernel {kind!r}")


def kernel_matrix(kind: str, A, B, gamma: float = 1.0, degree: int = 3, coef0: float = 0.0) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if kind == "linear":
        return A @ B.T
    if kind == "poly":
        return (gamma * (A @ B.T) + coef0) ** degree
    if kind == "rbf":
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    raise ValidationError(f"unknown kernel {kind!r}")


class SVRModel(FittedModel):
    def __init__(self, kernel, gamma, degree, coef0, support, dual_coef, intercept, diagnostics):
        super().__init__(support.shape[1], diagnostics)
        self.family = f"svr-{kernel}"
        self.kernel = kernel
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.support = support
        self.dual_coef = dual_coef
        self.intercept = intercept

    def predict(self, X) -> np.ndarray:
        X = self._check_X(X)
        if len(self.dual_coef) == 0:
            return np.full(X.shape[0], self.intercept)
        K = kernel_matrix(self.kernel, X, self.support, self.gamma, self.degree, self.coef0)
        return K @ self.dual_coef + self.intercept


def fit_svr(X, y, kernel: str = "rbf", C: float = 1.0, epsilon: float = 0.1, gamma="scale",
            degree: int = 3, coef0: float = 0.0, tol: float = TOL, max_iter: int = MAX_ITER,
            K=None) -> SVRModel:
    """Solve the SVR dual by pairwise (SMO) updates.

    ``K`` may supply the precomputed training kernel matrix. The fitted
    model keeps only rows with nonzero dual coefficient; ``diagnostics``
    carries the full ``beta`` vector, the dual objective and the final
    KKT gap.
    """
    X, y = check_xy(X, y)
    if kernel not in KERNELS:
        raise ValidationError(f"unknown kernel {kernel!r}")
    if not C > 0:
        raise ValidationError("C must be positive")
    if not epsilon >= 0:
        raise ValidationError("epsilon must be non-negative")
    g = resolve_gamma(gamma, X)
    if K is None:
        K = kernel_matrix(kernel, X, X, g, degree, coef0)
    beta, rho, obj, n_iter, gap = smo_svr(np.ascontiguousarray(K), y, float(C), float(epsilon),
                                          float(tol), int(max_iter))
    sv = np.flatnonzero(beta != 0.0)
    diag = {"iterations": int(n_iter), "converged": bool(gap < tol), "objective": float(obj),
            "kkt_gap": float(gap), "beta": beta}
    return SVRModel(kernel, g, int(degree), float(coef0), X[sv].copy(), beta[sv].copy(), -float(rho), diag)
