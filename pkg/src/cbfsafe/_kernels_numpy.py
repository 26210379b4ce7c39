"""Pure-numpy implementations of the hot kernels.

Signatures mirror ``_kernels_numba`` exactly; ``cbfsafe._backend`` picks one.
"""
import numpy as np


def lse_min(hvals, kappa):
    m = hvals.min()
    w = np.exp(-kappa * (hvals - m))
    s = w.sum()
    return m - np.log(s) / kappa, w / s


def circle_composite(p, centers, radii_sq, kappa):
    d = p[None, :] - centers
    hvals = np.einsum("ij,ij->i", d, d) - radii_sq
    h, lam = lse_min(hvals, kappa)
    grad = 2.0 * (lam @ d)
    return hvals, h, lam, grad


def circle_filter(x, centers, radii_sq, kappa, fx, gx, ubar, gain, zero_tol):
    """Packed [hvals, weights, grad, lie_g, u_s, jacobian (row-major), h, lie_f, eta, slack]."""
    hvals, h, lam, grad2 = circle_composite(x[:2], centers, radii_sq, kappa)
    grad = np.zeros(x.shape[0])
    grad[:2] = grad2
    lie_f = float(grad @ fx)
    lie_g = grad @ gx
    us, eta = closed_form(lie_f, lie_g, h, ubar, gain, zero_tol)
    slack = lie_f + lie_g @ us + gain * h
    jac = np.eye(lie_g.shape[0])
    if eta > 0.0:
        jac -= np.outer(lie_g, lie_g) / (lie_g @ lie_g)
    return np.concatenate([hvals, lam, grad, lie_g, us, jac.ravel(), [h, lie_f, eta, slack]])


def circle_qp_rows(x, centers, radii_sq, fx, gx, gain):
    """Returns [A | b] with one row per barrier of A u >= b."""
    d = x[None, :2] - centers
    grads = np.zeros((centers.shape[0], x.shape[0]))
    grads[:, :2] = 2.0 * d
    hvals = np.einsum("ij,ij->i", d, d) - radii_sq
    return np.column_stack([grads @ gx, -(grads @ fx) - gain * hvals])


def circle_composite_batch(P, centers, radii_sq, kappa):
    d = P[:, None, :] - centers[None, :, :]
    H = np.einsum("bij,bij->bi", d, d) - radii_sq[None, :]
    m = H.min(axis=1)
    w = np.exp(-kappa * (H - m[:, None]))
    s = w.sum(axis=1)
    h = m - np.log(s) / kappa
    lam = w / s[:, None]
    grad = 2.0 * np.einsum("bi,bij->bj", lam, d)
    return H, h, lam, grad


def closed_form(lie_f, lie_g, h, ubar, gain, zero_tol):
    if np.all(np.abs(lie_g) <= zero_tol):
        return ubar.copy(), 0.0
    eta = -(lie_f + lie_g @ ubar + gain * h) / (lie_g @ lie_g)
    if eta > 0.0:
        return ubar + eta * lie_g, eta
    return ubar.copy(), eta


def closed_form_batch(lie_f, lie_g, h, ubar, gain, zero_tol):
    nz = ~np.all(np.abs(lie_g) <= zero_tol, axis=1)
    g2 = np.where(nz, np.einsum("bj,bj->b", lie_g, lie_g), 1.0)
    eta = -(lie_f + np.einsum("bj,bj->b", lie_g, ubar) + gain * h) / g2
    eta = np.where(nz, eta, 0.0)
    us = ubar + np.maximum(eta, 0.0)[:, None] * lie_g
    return us, eta


def kkt_residual(A, b, ubar, u, lam):
    stat = np.max(np.abs(u - ubar - A.T @ lam)) if u.size else 0.0
    slack = A @ u - b
    primal = max(0.0, -slack.min()) if slack.size else 0.0
    dual = max(0.0, -lam.min()) if lam.size else 0.0
    comp = np.max(np.abs(lam * slack)) if lam.size else 0.0
    return max(stat, primal, dual, comp)


def dual_objective(A, b, ubar, lam):
    v = A.T @ lam
    return -0.5 * (v @ v) - lam @ (A @ ubar - b)


def hildreth(A, b, ubar, tol, max_iter, trace):
    n_con = A.shape[0]
    diag = np.einsum("ij,ij->i", A, A)
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
            new = max(0.0, lam[i] - (A[i] @ u - b[i]) / diag[i])
            delta = new - lam[i]
            if delta != 0.0:
                u += delta * A[i]
                lam[i] = new
        sweeps += 1
        if record:
            trace[sweeps] = dual_objective(A, b, ubar, lam)
        res = kkt_residual(A, b, ubar, u, lam)
        if res <= tol:
            break
    return u, lam, sweeps, res


def hildreth_packed(A, b, ubar, tol, max_iter, trace):
    u, lam, sweeps, res = hildreth(A, b, ubar, tol, max_iter, trace)
    return np.concatenate([u, lam, [sweeps, res]])
