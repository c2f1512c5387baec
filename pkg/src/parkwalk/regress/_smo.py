"""Numba SMO solver for the epsilon-insensitive SVR dual.

The dual is solved over ``2n`` variables ``a = (alpha, alpha*)``::

    min 1/2 a'Qa + p'a   s.t.  s'a = 0,  0 <= a <= C

with signs ``s = (+1, -1)``, ``Q_tu = s_t s_u K(t mod n, u mod n)`` and
``p = (eps - y, eps + y)``. Working pairs use second-order selection.
"""
import numpy as np
from numba import njit

TAU = 1e-12


@njit(cache=True)
def smo_svr(K, y, C, eps, tol, max_iter):
    """Returns ``(beta, rho, objective, n_iter, gap)``; predictions are ``K @ beta - rho``."""
    n = y.shape[0]
    l = 2 * n
    alpha = np.zeros(l)
    sgn = np.empty(l)
    G = np.empty(l)
    for t in range(n):
        sgn[t] = 1.0
        sgn[t + n] = -1.0
        G[t] = eps - y[t]
        G[t + n] = eps + y[t]
    diag = np.empty(n)
    for t in range(n):
        diag[t] = K[t, t]

    it = 0
    gap = np.inf
    while it < max_iter:
        # i: maximal violating index in the "up" set; halves scanned in index order
        gmax = -np.inf
        i = -1
        for t in range(n):
            if alpha[t] < C and -G[t] >= gmax:
                gmax = -G[t]
                i = t
        for t in range(n, l):
            if alpha[t] > 0 and G[t] >= gmax:
                gmax = G[t]
                i = t
        gmax2 = -np.inf
        j = -1
        best = np.inf
        if i >= 0:
            # s_i s_t K s_i = s_t K, so both halves use diag_i + diag_t - 2 K_it
            ii = i % n
            Ki = K[ii]
            di = diag[ii]
            for t in range(n):
                if alpha[t] > 0:
                    gt = G[t]
                    gd = gmax + gt
                    if gt >= gmax2:
                        gmax2 = gt
                    if gd > 0:
                        quad = di + diag[t] - 2.0 * Ki[t]
                        if quad <= 0:
                            quad = TAU
                        ob = -(gd * gd) / quad
                        if ob <= best:
                            best = ob
                            j = t
            for t in range(n):
                u = t + n
                if alpha[u] < C:
                    gt = G[u]
                    gd = gmax - gt
                    if -gt >= gmax2:
                        gmax2 = -gt
                    if gd > 0:
                        quad = di + diag[t] - 2.0 * Ki[t]
                        if quad <= 0:
                            quad = TAU
                        ob = -(gd * gd) / quad
                        if ob <= best:
                            best = ob
                            j = u
        gap = gmax + gmax2
        if gap < tol or j < 0:
            break
        it += 1

        ii = i % n
        jj = j % n
        si = sgn[i]
        sj = sgn[j]
        qij = si * sj * K[ii, jj]
        oi = alpha[i]
        oj = alpha[j]
        if si != sj:
            quad = diag[ii] + diag[jj] + 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = diag[ii] + diag[jj] - 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total

        di = (alpha[i] - oi) * si
        dj = (alpha[j] - oj) * sj
        for t in range(n):
            g = K[ii, t] * di + K[jj, t] * dj
            G[t] += g
            G[t + n] -= g

    # offset from free variables, or the midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(l):
        yg = sgn[t] * G[t]
        if alpha[t] >= C:
            if sgn[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if sgn[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    rho = sfree / nfree if nfree > 0 else 0.5 * (ub + lb)

    beta = np.empty(n)
    obj = 0.0
    for t in range(n):
        beta[t] = alpha[t] - alpha[t + n]
        obj += alpha[t] * (G[t] + eps - y[t]) + alpha[t + n] * (G[t + n] + eps + y[t])
    return beta, rho, 0.5 * obj, it, gap
