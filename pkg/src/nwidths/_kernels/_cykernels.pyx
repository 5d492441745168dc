# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: dense two-phase simplex and batched lq descent.

Semantics mirror `_pykernels` (the pure-numpy reference); only the inner
loops differ.  Pivot choices follow Bland's rule with the same tie
handling, so both backends visit the same bases.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, pow

cnp.import_array()

OPTIMAL, INFEASIBLE, UNBOUNDED, ITER_CAP = 0, 1, 2, 3


cdef void _pivot(double[:, ::1] T, Py_ssize_t row, Py_ssize_t col) noexcept:
    cdef Py_ssize_t i, j, nr = T.shape[0], nc = T.shape[1]
    cdef double p = T[row, col], f
    for j in range(nc):
        T[row, j] /= p
    for i in range(nr):
        if i != row:
            f = T[i, col]
            if f != 0.0:
                for j in range(nc):
                    T[i, j] -= f * T[row, j]


cdef long _pivot_loop(double[:, ::1] T, long[::1] basis, Py_ssize_t nrow,
                      Py_ssize_t allowed, long max_iter, double tol,
                      unsigned char[::1] live) noexcept:
    cdef Py_ssize_t i, j, r, last = T.shape[1] - 1
    cdef long it
    cdef double rmin, ratio, cutoff
    for it in range(max_iter):
        j = -1
        for i in range(allowed):
            if T[nrow, i] < -tol:
                j = i
                break
        if j < 0:
            return it
        rmin = INFINITY
        for i in range(nrow):
            if live[i] and T[i, j] > tol:
                ratio = T[i, last] / T[i, j]
                if ratio < rmin:
                    rmin = ratio
        if rmin == INFINITY:
            return -2
        # additive slack: rmin can be slightly negative on degenerate bases
        cutoff = rmin + 1e-12 * (1.0 + fabs(rmin))
        r = -1
        for i in range(nrow):
            if live[i] and T[i, j] > tol:
                ratio = T[i, last] / T[i, j]
                if ratio <= cutoff:
                    if r < 0 or basis[i] < basis[r]:
                        r = i
        if r < 0:
            return -2
        _pivot(T, r, j)
        basis[r] = j
    return -1


def simplex_solve(c, A, b, long max_iter=10000, double tol=1e-9):
    """Solve min c.x s.t. A x = b, x >= 0; see _pykernels.simplex_solve."""
    cdef cnp.ndarray[double, ndim=2] A2 = np.ascontiguousarray(A, dtype=np.float64).copy()
    cdef cnp.ndarray[double, ndim=1] b2 = np.asarray(b, dtype=np.float64).copy()
    cdef cnp.ndarray[double, ndim=1] c2 = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t nrow = A2.shape[0], ncol = A2.shape[1]
    cdef Py_ssize_t i, j

    for i in range(nrow):
        if b2[i] < 0:
            b2[i] = -b2[i]
            for j in range(ncol):
                A2[i, j] = -A2[i, j]

    cdef cnp.ndarray[double, ndim=2] T = np.zeros((nrow + 1, ncol + nrow + 1))
    T[:nrow, :ncol] = A2
    T[:nrow, ncol:ncol + nrow] = np.eye(nrow)
    T[:nrow, ncol + nrow] = b2
    cdef cnp.ndarray[long, ndim=1] basis = np.arange(ncol, ncol + nrow)
    T[nrow, :] = -T[:nrow, :].sum(axis=0)
    T[nrow, ncol:ncol + nrow] = 0.0

    cdef cnp.ndarray[unsigned char, ndim=1] live = np.ones(nrow, dtype=np.uint8)
    cdef long iters = _pivot_loop(T, basis, nrow, ncol + nrow, max_iter, tol,
                                  live)
    if iters < 0:
        return ITER_CAP, _basic_solution(T, basis, nrow, ncol), np.inf, max_iter
    if -T[nrow, ncol + nrow] > tol * (1.0 + float(np.abs(b2).sum())):
        return INFEASIBLE, np.zeros(ncol), np.inf, iters

    cdef double[:, ::1] Tv = T
    for i in range(nrow):
        if basis[i] >= ncol:
            j = -1
            for j2 in range(ncol):
                if fabs(Tv[i, j2]) > tol:
                    j = j2
                    break
            if j >= 0:
                _pivot(Tv, i, j)
                basis[i] = j
            else:
                live[i] = 0
                T[i, :] = 0.0

    T[nrow, :] = 0.0
    T[nrow, :ncol] = c2
    for i in range(nrow):
        if live[i] and basis[i] < ncol:
            T[nrow, :] -= c2[basis[i]] * T[i, :]

    cdef long it2 = _pivot_loop(T, basis, nrow, ncol, max_iter, tol, live)
    x = _basic_solution(T, basis, nrow, ncol)
    if it2 == -2:
        return UNBOUNDED, x, -np.inf, iters
    if it2 < 0:
        return ITER_CAP, x, float(c2 @ x), max_iter
    return OPTIMAL, x, float(c2 @ x), iters + it2


def _basic_solution(T, basis, Py_ssize_t nrow, Py_ssize_t ncol):
    x = np.zeros(ncol)
    cdef Py_ssize_t i
    for i in range(nrow):
        if basis[i] < ncol:
            x[basis[i]] = T[i, T.shape[1] - 1]
    return x


cdef inline double _phi(double r, double qm1) noexcept:
    # sign(r) * |r|^(q-1)
    if r > 0:
        return pow(r, qm1)
    if r < 0:
        return -pow(-r, qm1)
    return 0.0


def lq_descent(B, X, double q, long max_iter=500, double tol=1e-11):
    """Batched lq distances to rowspace(B); see _pykernels.lq_descent."""
    cdef cnp.ndarray[double, ndim=2] B2 = np.ascontiguousarray(
        np.asarray(B, dtype=np.float64))
    cdef cnp.ndarray[double, ndim=2] X2 = np.ascontiguousarray(
        np.atleast_2d(np.asarray(X, dtype=np.float64)))
    cdef Py_ssize_t N = X2.shape[0], m = X2.shape[1], nb = B2.shape[0]
    cdef cnp.ndarray[double, ndim=1] dists = np.zeros(N)
    cdef cnp.ndarray[unsigned char, ndim=1] stale = np.zeros(N, dtype=np.uint8)

    if nb == 0:
        d = (np.abs(X2) ** q).sum(axis=1) ** (1.0 / q)
        return d, np.zeros((N, 0)), stale.astype(bool)

    cdef cnp.ndarray[double, ndim=2] C = X2 @ B2.T
    if fabs(q - 2.0) < 1e-15:
        R0 = X2 - C @ B2
        return np.linalg.norm(R0, axis=1), C, stale.astype(bool)
    if q < 2.0:
        return _irls_below_2(B2, X2, C, q, max_iter)

    cdef double[:, ::1] Bv = B2, Xv = X2, Cv = C
    cdef double qm1 = q - 1.0
    cdef Py_ssize_t i, j, l
    cdef long it, bt
    cdef double f, fnew, gn2, step, sy, ss, bb, acc, r
    cdef cnp.ndarray[double, ndim=1] rbuf = np.zeros(m)
    cdef cnp.ndarray[double, ndim=1] gbuf = np.zeros(nb)
    cdef cnp.ndarray[double, ndim=1] gnew = np.zeros(nb)
    cdef cnp.ndarray[double, ndim=1] ctry = np.zeros(nb)
    cdef double[::1] rv = rbuf, gv = gbuf, gnv = gnew, cv = ctry
    cdef bint moved, conv

    for i in range(N):
        # residual and objective at the warm start
        f = 0.0
        for l in range(m):
            r = Xv[i, l]
            for j in range(nb):
                r -= Cv[i, j] * Bv[j, l]
            rv[l] = r
            f += pow(fabs(r), q)
        for j in range(nb):
            acc = 0.0
            for l in range(m):
                acc += Bv[j, l] * _phi(rv[l], qm1)
            gv[j] = -q * acc
        step = 1.0
        conv = False
        for it in range(max_iter):
            gn2 = 0.0
            for j in range(nb):
                gn2 += gv[j] * gv[j]
            if gn2 <= (tol * (1.0 + f)) ** 2:
                conv = True
                break
            moved = False
            for bt in range(60):
                for j in range(nb):
                    cv[j] = Cv[i, j] - step * gv[j]
                fnew = 0.0
                for l in range(m):
                    r = Xv[i, l]
                    for j in range(nb):
                        r -= cv[j] * Bv[j, l]
                    rv[l] = r
                    fnew += pow(fabs(r), q)
                if fnew <= f - 1e-4 * step * gn2:
                    moved = True
                    break
                step *= 0.5
            if not moved:
                conv = True
                break
            if f - fnew <= 1e-15 * (1.0 + fnew):
                # progress below float resolution: done
                for j in range(nb):
                    Cv[i, j] = cv[j]
                f = fnew
                conv = True
                break
            for j in range(nb):
                acc = 0.0
                for l in range(m):
                    acc += Bv[j, l] * _phi(rv[l], qm1)
                gnv[j] = -q * acc
            sy = 0.0
            ss = 0.0
            for j in range(nb):
                sy += (cv[j] - Cv[i, j]) * (gnv[j] - gv[j])
                ss += (cv[j] - Cv[i, j]) * (cv[j] - Cv[i, j])
            if sy > 1e-300:
                bb = ss / sy
            else:
                bb = step * 2.0
            if bb < 1e-12:
                bb = 1e-12
            elif bb > 1e12:
                bb = 1e12
            step = bb
            for j in range(nb):
                Cv[i, j] = cv[j]
                gv[j] = gnv[j]
            f = fnew
        if not conv:
            stale[i] = 1
        dists[i] = pow(f, 1.0 / q)

    return dists, C, stale.astype(bool)


cdef int _solve_ppiv(double[:, ::1] M, double[::1] rhs, Py_ssize_t n) noexcept:
    """In-place Gaussian elimination with partial pivoting; solution in rhs.
    Returns 0 on success, -1 on (numerical) singularity."""
    cdef Py_ssize_t i, j, k, piv
    cdef double best, factor, tmp
    for k in range(n):
        piv = k
        best = fabs(M[k, k])
        for i in range(k + 1, n):
            if fabs(M[i, k]) > best:
                best = fabs(M[i, k])
                piv = i
        if best <= 1e-300:
            return -1
        if piv != k:
            for j in range(n):
                tmp = M[k, j]
                M[k, j] = M[piv, j]
                M[piv, j] = tmp
            tmp = rhs[k]
            rhs[k] = rhs[piv]
            rhs[piv] = tmp
        for i in range(k + 1, n):
            factor = M[i, k] / M[k, k]
            if factor != 0.0:
                for j in range(k, n):
                    M[i, j] -= factor * M[k, j]
                rhs[i] -= factor * rhs[k]
    for k in range(n - 1, -1, -1):
        tmp = rhs[k]
        for j in range(k + 1, n):
            tmp -= M[k, j] * rhs[j]
        rhs[k] = tmp / M[k, k]
    return 0


def _irls_below_2(cnp.ndarray[double, ndim=2] B2,
                  cnp.ndarray[double, ndim=2] X2,
                  cnp.ndarray[double, ndim=2] C, double q, long max_iter):
    """Per-row IRLS for 1 < q < 2; see _pykernels._irls_below_2."""
    cdef Py_ssize_t N = X2.shape[0], m = X2.shape[1], nb = B2.shape[0]
    cdef cnp.ndarray[double, ndim=1] dists = np.zeros(N)
    cdef cnp.ndarray[unsigned char, ndim=1] stale = np.zeros(N, dtype=np.uint8)
    cdef cnp.ndarray[double, ndim=2] Mbuf = np.zeros((nb, nb))
    cdef cnp.ndarray[double, ndim=1] rhs = np.zeros(nb)
    cdef cnp.ndarray[double, ndim=1] rbuf = np.zeros(m)
    cdef cnp.ndarray[double, ndim=1] wbuf = np.zeros(m)
    cdef double[:, ::1] Bv = B2, Xv = X2, Cv = C, Mv = Mbuf
    cdef double[::1] rhsv = rhs, rv = rbuf, wv = wbuf
    cdef Py_ssize_t i, j, k, l
    cdef long it
    cdef double eps, eps_floor, scale2, f_eps, f_prev, r, acc, f
    cdef bint conv

    for i in range(N):
        scale2 = 1e-300
        for l in range(m):
            r = Xv[i, l]
            for j in range(nb):
                r -= Cv[i, j] * Bv[j, l]
            rv[l] = r
            if r * r > scale2:
                scale2 = r * r
        eps = 0.1 * scale2
        eps_floor = 1e-20 * scale2 + 1e-300
        f_prev = INFINITY
        conv = False
        for it in range(max_iter):
            for l in range(m):
                wv[l] = pow(rv[l] * rv[l] + eps, q / 2.0 - 1.0)
            for j in range(nb):
                for k in range(j, nb):
                    acc = 0.0
                    for l in range(m):
                        acc += Bv[j, l] * wv[l] * Bv[k, l]
                    Mv[j, k] = acc
                    Mv[k, j] = acc
                acc = 0.0
                for l in range(m):
                    acc += Bv[j, l] * wv[l] * Xv[i, l]
                rhsv[j] = acc
            if _solve_ppiv(Mv, rhsv, nb) != 0:
                break
            for j in range(nb):
                Cv[i, j] = rhsv[j]
            f_eps = 0.0
            for l in range(m):
                r = Xv[i, l]
                for j in range(nb):
                    r -= Cv[i, j] * Bv[j, l]
                rv[l] = r
                f_eps += pow(r * r + eps, q / 2.0)
            if f_prev - f_eps <= 1e-15 * (1.0 + f_eps):
                if eps <= eps_floor:
                    conv = True
                    break
                eps = eps * 1e-3
                if eps < eps_floor:
                    eps = eps_floor
                f_prev = INFINITY
            else:
                f_prev = f_eps
        f = 0.0
        for l in range(m):
            f += pow(fabs(rv[l]), q)
        dists[i] = pow(f, 1.0 / q)
        if not conv:
            stale[i] = 1

    return dists, C, stale.astype(bool)
