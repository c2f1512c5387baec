import numpy as np
from numba import njit


@njit(cache=True)
def soft_threshold(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def enet_cd(gram, xty, yty, n, alpha, l1_ratio, tol, max_sweeps, w0):
    """Cyclic coordinate descent on centered data in Gram form.

    Minimizes ``1/(2n)||y - Xw||^2 + alpha*l1_ratio*|w|_1 + alpha*(1-l1_ratio)/2*|w|^2``
    with ``gram = X'X`` and ``xty = X'y``. Sweeps in ascending feature order
    until the largest coefficient change is below ``tol``.
    Returns ``(w, n_sweeps, converged, objective_history)``.
    """
    d = gram.shape[0]
    w = w0.copy()
    l1 = alpha * l1_ratio
    l2 = alpha * (1.0 - l1_ratio)
    gw = gram @ w
    hist = np.empty(max_sweeps + 1)
    hist[0] = _objective(w, gw, xty, yty, n, l1, l2)
    converged = False
    sweeps = 0
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(d):
            gjj = gram[j, j]
            if gjj == 0.0:
                continue
            old = w[j]
            rho = (xty[j] - gw[j] + gjj * old) / n
            new = soft_threshold(rho, l1) / (gjj / n + l2)
            if new != old:
                delta = new - old
                w[j] = new
                for k in range(d):
                    gw[k] += gram[k, j] * delta
                if abs(delta) > max_change:
                    max_change = abs(delta)
        sweeps = sweep + 1
        hist[sweeps] = _objective(w, gw, xty, yty, n, l1, l2)
        if max_change < tol:
            converged = True
            break
    return w, sweeps, converged, hist[: sweeps + 1].copy()


@njit(cache=True)
def _objective(w, gw, xty, yty, n, l1, l2):
    quad = yty - 2.0 * np.dot(w, xty) + np.dot(w, gw)
    return 0.5 * quad / n + l1 * np.abs(w).sum() + 0.5 * l2 * np.dot(w, w)
