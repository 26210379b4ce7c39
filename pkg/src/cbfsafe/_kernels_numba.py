"""Numba-compiled kernels. Same signatures and results as ``_kernels_numpy``."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def lse_min(hvals, kappa):
    n = hvals.shape[0]
    m = hvals[0]
    for i in range(1, n):
        if hvals[i] < m:
            m = hvals[i]
    w = np.empty(n)
    s = 0.0
    for i in range(n):
        w[i] = math.exp(-kappa * (hvals[i] - m))
        s += w[i]
    for i in range(n):
        w[i] /= s
    return m - math.log(s) / kappa, w


@njit(cache=True)
def circle_composite(p, centers, radii_sq, kappa):
    n_obs = centers.shape[0]
    hvals = np.empty(n_obs)
    for i in range(n_obs):
        dx = p[0] - centers[i, 0]
        dy = p[1] - centers[i, 1]
        hvals[i] = dx * dx + dy * dy - radii_sq[i]
    h, lam = lse_min(hvals, kappa)
    grad = np.zeros(2)
    for i in range(n_obs):
        grad[0] += 2.0 * lam[i] * (p[0] - centers[i, 0])
        grad[1] += 2.0 * lam[i] * (p[1] - centers[i, 1])
    return hvals, h, lam, grad


@njit(cache=True)
def circle_composite_batch(P, centers, radii_sq, kappa):
    nb = P.shape[0]
    n_obs = centers.shape[0]
    H = np.empty((nb, n_obs))
    h = np.empty(nb)
    lam = np.empty((nb, n_obs))
    grad = np.zeros((nb, 2))
    for k in range(nb):
        m = np.inf
        for i in range(n_obs):
            dx = P[k, 0] - centers[i, 0]
            dy = P[k, 1] - centers[i, 1]
            H[k, i] = dx * dx + dy * dy - radii_sq[i]
            if H[k, i] < m:
                m = H[k, i]
        s = 0.0
        for i in range(n_obs):
            lam[k, i] = math.exp(-kappa * (H[k, i] - m))
            s += lam[k, i]
        h[k] = m - math.log(s) / kappa
        for i in range(n_obs):
            lam[k, i] /= s
            grad[k, 0] += 2.0 * lam[k, i] * (P[k, 0] - centers[i, 0])
            grad[k, 1] += 2.0 * lam[k, i] * (P[k, 1] - centers[i, 1])
    return H, h, lam, grad


@njit(cache=True)
def closed_form(lie_f, lie_g, h, ubar, gain, zero_tol):
    m = lie_g.shape[0]
    zero = True
    g2 = 0.0
    dot = 0.0
    for j in range(m):
        if abs(lie_g[j]) > zero_tol:
            zero = False
        g2 += lie_g[j] * lie_g[j]
        dot += lie_g[j] * ubar[j]
    us = ubar.copy()
    if zero:
        return us, 0.0
    eta = -(lie_f + dot + gain * h) / g2
    if eta > 0.0:
        for j in range(m):
            us[j] += eta * lie_g[j]
    return us, eta


@njit(cache=True)
def closed_form_batch(lie_f, lie_g, h, ubar, gain, zero_tol):
    nb, m = ubar.shape
    us = ubar.copy()
    eta = np.zeros(nb)
    for k in range(nb):
        zero = True
        g2 = 0.0
        dot = 0.0
        for j in range(m):
            if abs(lie_g[k, j]) > zero_tol:
                zero = False
            g2 += lie_g[k, j] * lie_g[k, j]
            dot += lie_g[k, j] * ubar[k, j]
        if zero:
            continue
        e = -(lie_f[k] + dot + gain * h[k]) / g2
        eta[k] = e
        if e > 0.0:
            for j in range(m):
                us[k, j] += e * lie_g[k, j]
    return us, eta


@njit(cache=True)
def circle_filter(x, centers, radii_sq, kappa, fx, gx, ubar, gain, zero_tol):
    """Packed [hvals, weights, grad, lie_g, u_s, jacobian (row-major), h, lie_f, eta, slack]."""
    n_obs = centers.shape[0]
    n = x.shape[0]
    m = gx.shape[1]
    out = np.zeros(2 * n_obs + n + 2 * m + m * m + 4)
    hvals, h, lam, grad2 = circle_composite(x[:2], centers, radii_sq, kappa)
    out[:n_obs] = hvals
    out[n_obs:2 * n_obs] = lam
    k = 2 * n_obs
    out[k] = grad2[0]
    out[k + 1] = grad2[1]
    lie_f = 0.0
    for i in range(n):
        lie_f += out[k + i] * fx[i]
    lg = out[k + n:k + n + m]
    for j in range(m):
        for i in range(n):
            lg[j] += out[k + i] * gx[i, j]
    us, eta = closed_form(lie_f, lg, h, ubar, gain, zero_tol)
    k += n + m
    slack = lie_f + gain * h
    g2 = 0.0
    for j in range(m):
        out[k + j] = us[j]
        slack += lg[j] * us[j]
        g2 += lg[j] * lg[j]
    k += m
    for i in range(m):
        out[k + i * m + i] = 1.0
        if eta > 0.0:
            for j in range(m):
                out[k + i * m + j] -= lg[i] * lg[j] / g2
    k += m * m
    out[k] = h
    out[k + 1] = lie_f
    out[k + 2] = eta
    out[k + 3] = slack
    return out


@njit(cache=True)
def circle_qp_rows(x, centers, radii_sq, fx, gx, gain):
    """Returns [A | b] with one row per barrier of A u >= b."""
    n_obs = centers.shape[0]
    m = gx.shape[1]
    ab = np.empty((n_obs, m + 1))
    for k in range(n_obs):
        dx = x[0] - centers[k, 0]
        dy = x[1] - centers[k, 1]
        # gradient is (2dx, 2dy, 0, ...)
        for j in range(m):
            ab[k, j] = 2.0 * (dx * gx[0, j] + dy * gx[1, j])
        ab[k, m] = -2.0 * (dx * fx[0] + dy * fx[1]) - gain * (dx * dx + dy * dy - radii_sq[k])
    return ab


@njit(cache=True)
def kkt_residual(A, b, ubar, u, lam):
    n_con, m = A.shape
    res = 0.0
    for j in range(m):
        r = u[j] - ubar[j]
        for i in range(n_con):
            r -= A[i, j] * lam[i]
        res = max(res, abs(r))
    for i in range(n_con):
        slack = -b[i]
        for j in range(m):
            slack += A[i, j] * u[j]
        res = max(res, -slack, -lam[i], abs(lam[i] * slack))
    return res


@njit(cache=True)
def dual_objective(A, b, ubar, lam):
    n_con, m = A.shape
    quad = 0.0
    for j in range(m):
        v = 0.0
        for i in range(n_con):
            v += A[i, j] * lam[i]
        quad += v * v
    lin = 0.0
    for i in range(n_con):
        s = -b[i]
        for j in range(m):
            s += A[i, j] * ubar[j]
        lin += lam[i] * s
    return -0.5 * quad - lin


@njit(cache=True)
def hildreth(A, b, ubar, tol, max_iter, trace):
    n_con, m = A.shape
    diag = np.zeros(n_con)
    for i in range(n_con):
        for j in range(m):
            diag[i] += A[i, j] * A[i, j]
    lam = np.zeros(n_con)
    u = ubar.copy()
    record = trace.shape[0] > 0
    if record:
        trace[0] = dual_objective(A, b, ubar, lam)
    res = np.inf
    sweeps = 0
    while sweeps < max_iter:
        for i in range(n_con):
            if diag[i] == 0.0:
                continue
            s = -b[i]
            for j in range(m):
                s += A[i, j] * u[j]
            new = max(0.0, lam[i] - s / diag[i])
            delta = new - lam[i]
            if delta != 0.0:
                for j in range(m):
                    u[j] += delta * A[i, j]
                lam[i] = new
        sweeps += 1
        if record:
            trace[sweeps] = dual_objective(A, b, ubar, lam)
        res = kkt_residual(A, b, ubar, u, lam)
        if res <= tol:
            break
    return u, lam, sweeps, res


@njit(cache=True)
def hildreth_packed(A, b, ubar, tol, max_iter, trace):
    """``hildreth`` with its results packed as [u, lam, sweeps, res]."""
    n_con, m = A.shape
    u, lam, sweeps, res = hildreth(A, b, ubar, tol, max_iter, trace)
    out = np.empty(m + n_con + 2)
    out[:m] = u
    out[m:m + n_con] = lam
    out[m + n_con] = sweeps
    out[m + n_con + 1] = res
    return out
