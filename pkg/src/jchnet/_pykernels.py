"""Numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and return conventions; selected automatically when the
extension is missing or ``JCHNET_PURE_PYTHON`` is set.
"""
import numpy as np
from scipy import sparse


def power_iteration(indptr, indices, x0, shift, tol, max_iter):
    n = len(indptr) - 1
    data = np.ones(len(indices))
    a = sparse.csr_matrix((data, np.asarray(indices), np.asarray(indptr)), shape=(n, n))
    x = np.array(x0, dtype=float)
    scale = np.max(np.abs(x)) if n else 0.0
    if scale == 0.0:
        raise ValueError("start vector is zero")
    x /= scale
    lam = lam_prev = 0.0
    res = 0.0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        y = a @ x + shift * x
        xx = float(x @ x)
        lam = float(x @ y) / xx
        res = float(np.max(np.abs(y - lam * x))) / np.sqrt(xx)
        if it > 1 and abs(lam - lam_prev) < tol and res < tol:
            converged = True
            break
        lam_prev = lam
        scale = np.max(np.abs(y))
        if scale == 0.0:
            break
        x = y / scale
    return lam - shift, x / np.linalg.norm(x), it, res, converged


def jacobi_eigenvalues(a, tol, max_sweeps):
    m = np.array(a, dtype=float)
    n = m.shape[0]
    sweep = 0
    while True:
        off = np.sqrt(2.0 * np.sum(np.triu(m, 1) ** 2))
        if off < tol or sweep >= max_sweeps:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                with np.errstate(over="ignore"):
                    theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = m[p, p], m[q, q]
                col_p = m[:, p].copy()
                col_q = m[:, q].copy()
                m[:, p] = c * col_p - s * col_q
                m[:, q] = s * col_p + c * col_q
                m[p, :] = m[:, p]
                m[q, :] = m[:, q]
                m[p, p] = app - t * apq
                m[q, q] = aqq + t * apq
                m[p, q] = m[q, p] = 0.0
    return np.diag(m).copy(), sweep, off


def _cavity_operators(n_trunc):
    dim = 2 * (n_trunc + 1)
    photons = np.repeat(np.arange(n_trunc + 1), 2)
    spin = np.tile([0, 1], n_trunc + 1)
    a = np.zeros((dim, dim))
    coupling = np.zeros((dim, dim))
    for n in range(1, n_trunc + 1):
        for s in (0, 1):
            a[2 * (n - 1) + s, 2 * n + s] = np.sqrt(n)
        coupling[2 * n, 2 * n - 1] = coupling[2 * n - 1, 2 * n] = np.sqrt(n)
    return np.diag((photons + spin).astype(float)), np.diag(spin.astype(float)), coupling, a, photons >= n_trunc - 1


def local_ground_states(x, fields, delta, beta, n_trunc):
    number, spin, coupling, a, top_mask = _cavity_operators(n_trunc)
    x = np.asarray(x, dtype=float)
    fields = np.asarray(fields, dtype=float)
    if x.shape != fields.shape:
        raise ValueError("x and fields must have equal length")
    h = (x[:, None, None] * number + delta * spin + beta * coupling
         - fields[:, None, None] * (a + a.T))
    w, v = np.linalg.eigh(h)
    g = v[:, :, 0]
    psi = np.einsum("pi,ij,pj->p", g, a, g)
    top = (g[:, top_mask] ** 2).sum(axis=1)
    return psi, w[:, 0].copy(), top
