# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: power iteration, cyclic Jacobi and the mean-field cavity ground state."""
import numpy as np
cimport numpy as cnp
from libc.math cimport NAN, fabs, sqrt
from scipy.linalg.cython_lapack cimport dlamch, dsbevx

cnp.import_array()


def power_iteration(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                    x0, double shift, double tol, long max_iter):
    """Power iteration on ``A + shift*I`` for a 0/1 symmetric CSR matrix.

    Returns ``(lam, x, iterations, residual, converged)`` where ``lam`` is the
    Rayleigh estimate for ``A`` (shift removed), ``x`` the unit iterate and
    ``residual`` is ``max|A x - lam x|``. The iterate is kept max-normalized so
    the quotient is exact on regular graphs.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.array(x0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.empty(n, dtype=np.float64)
    cdef double[::1] x = xa
    cdef double[::1] y = ya
    cdef Py_ssize_t i, k
    cdef long it = 0
    cdef double lam = 0.0, lam_prev = 0.0, scale, acc, xy, xx, res = 0.0, r
    cdef bint have_prev = False, converged = False

    scale = 0.0
    for i in range(n):
        if fabs(x[i]) > scale:
            scale = fabs(x[i])
    if scale == 0.0:
        raise ValueError("start vector is zero")

    with nogil:
        for i in range(n):
            x[i] /= scale
        while it < max_iter:
            it += 1
            xy = 0.0
            xx = 0.0
            for i in range(n):
                acc = shift * x[i]
                for k in range(indptr[i], indptr[i + 1]):
                    acc = acc + x[indices[k]]
                y[i] = acc
                xy += x[i] * acc
                xx += x[i] * x[i]
            lam = xy / xx
            res = 0.0
            scale = 0.0
            for i in range(n):
                r = fabs(y[i] - lam * x[i])
                if r > res:
                    res = r
                if fabs(y[i]) > scale:
                    scale = fabs(y[i])
            res = res / sqrt(xx)
            if have_prev and fabs(lam - lam_prev) < tol and res < tol:
                converged = True
                break
            have_prev = True
            lam_prev = lam
            if scale == 0.0:
                break
            for i in range(n):
                x[i] = y[i] / scale
        xx = 0.0
        for i in range(n):
            xx += x[i] * x[i]
        xx = sqrt(xx)
        for i in range(n):
            x[i] /= xx
    return lam - shift, xa, it, res, converged


def jacobi_eigenvalues(a, double tol, long max_sweeps):
    """Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the Frobenius norm of the off-diagonal part drops below
    ``tol``. Returns ``(eigenvalues, sweeps, off_norm)``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] m = arr
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t p, q, k
    cdef long sweep = 0
    cdef double off, apq, theta, t, c, s, akp, akq

    with nogil:
        while True:
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    off += m[p, q] * m[p, q]
            off = sqrt(2.0 * off)
            if off < tol or sweep >= max_sweeps:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = m[p, q]
                    if apq == 0.0:
                        continue
                    theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                    if theta >= 0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        if k == p or k == q:
                            continue
                        akp = m[k, p]
                        akq = m[k, q]
                        m[k, p] = c * akp - s * akq
                        m[k, q] = s * akp + c * akq
                        m[p, k] = m[k, p]
                        m[q, k] = m[k, q]
                    m[p, p] = m[p, p] - t * apq
                    m[q, q] = m[q, q] + t * apq
                    m[p, q] = 0.0
                    m[q, p] = 0.0
    return np.diag(arr).copy(), sweep, off


def local_ground_states(x, fields, double delta, double beta, int n_trunc):
    """Lowest eigenpair of the mean-field cavity operator for each (x, field).

    ``x`` is omega - mu, ``fields`` is kappa*eta. Basis index 2n + s with
    n <= n_trunc photons and s = 0 (down) / 1 (up); the operator is banded
    with two superdiagonals and is solved by LAPACK dsbevx.
    Returns ``(psi, energy, top_weight)`` arrays.
    """
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(fields, dtype=np.float64)
    cdef Py_ssize_t npts = xv.shape[0]
    cdef int dim = 2 * (n_trunc + 1)
    cdef int kd = 2, ldab = 3, il = 1, iu = 1, m = 0, info = 0, ldq, ldz
    cdef double vl = 0.0, vu = 0.0
    cdef double abstol = 2.0 * dlamch("S")
    cdef char jobz = b"V", rng = b"I", uplo = b"U"
    cdef cnp.ndarray[cnp.float64_t, ndim=1] psi_a = np.empty(npts)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_a = np.empty(npts)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] top_a = np.empty(npts)
    cdef double[::1] psi = psi_a, e = e_a, top = top_a
    cdef double[::1] ab = np.empty(ldab * dim)
    cdef double[::1] q = np.empty(dim * dim)
    cdef double[::1] w = np.empty(dim)
    cdef double[::1] z = np.empty(dim)
    cdef double[::1] work = np.empty(7 * dim)
    cdef int[::1] iwork = np.empty(5 * dim, dtype=np.intc)
    cdef int[::1] ifail = np.empty(dim, dtype=np.intc)
    cdef double[::1] sq = np.sqrt(np.arange(n_trunc + 1, dtype=np.float64))
    cdef Py_ssize_t pt, j, n
    cdef int s
    cdef double acc, t, f
    ldq = dim
    ldz = dim
    if xv.shape[0] != fv.shape[0]:
        raise ValueError("x and fields must have equal length")
    with nogil:
        for pt in range(npts):
            f = fv[pt]
            # upper band storage: ab[kd + i - j + j*ldab] = H[i, j]
            for j in range(ldab * dim):
                ab[j] = 0.0
            for j in range(dim):
                n = j // 2
                s = j % 2
                ab[kd + j * ldab] = xv[pt] * (n + s) + delta * s
                if j >= 2 and n >= 1:
                    # <n-1, s| -f (a + a+) |n, s>
                    ab[kd - 2 + j * ldab] = -f * sq[n]
                if s == 0 and n >= 1:
                    # beta sqrt(n) between |n-1, up> (j - 1) and |n, down> (j)
                    ab[kd - 1 + j * ldab] = beta * sq[n]
            dsbevx(&jobz, &rng, &uplo, &dim, &kd, &ab[0], &ldab, &q[0], &ldq, &vl, &vu,
                   &il, &iu, &abstol, &m, &w[0], &z[0], &ldz, &work[0], &iwork[0], &ifail[0], &info)
            if info != 0 or m < 1:
                e[pt] = NAN
                psi[pt] = NAN
                top[pt] = NAN
                continue
            e[pt] = w[0]
            acc = 0.0
            for n in range(1, n_trunc + 1):
                for s in range(2):
                    acc += z[2 * (n - 1) + s] * sq[n] * z[2 * n + s]
            psi[pt] = acc
            t = 0.0
            for j in range(2 * (n_trunc - 1), dim):
                t += z[j] * z[j]
            top[pt] = t
    return psi_a, e_a, top_a
