"""Pure-numpy implementations of the hot kernels.

Mirrored by the compiled extension `_cykernels`; both expose the same
functions with the same semantics so either can back the package.

Kernels:

* `simplex_solve` -- dense two-phase simplex for standard-form LPs
  (min c.x s.t. A x = b, x >= 0) with Bland's anti-cycling rule.  Exact at
  desk scale; deterministic pivot order.
* `lq_descent` -- batched minimization of sum_j |x_ij - (C B)_ij|^q over
  the coefficient rows C, for 1 < q < inf, via gradient descent with
  Barzilai-Borwein steps and Armijo backtracking.
"""

from __future__ import annotations

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, ITER_CAP = 0, 1, 2, 3


def simplex_solve(c, A, b, max_iter=10000, tol=1e-9):
    """Solve min c.x s.t. A x = b, x >= 0.

    Returns (status, x, objective, iterations).  On ITER_CAP the returned x
    is the current (feasible) basic solution, so the objective is an upper
    bound on the optimum.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    nrow, ncol = A.shape

    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b = np.abs(b)

    # Tableau: original columns, artificial columns, rhs; last row = reduced
    # costs with T[-1, -1] = -objective.
    T = np.zeros((nrow + 1, ncol + nrow + 1))
    T[:nrow, :ncol] = A
    T[:nrow, ncol:ncol + nrow] = np.eye(nrow)
    T[:nrow, -1] = b
    basis = np.arange(ncol, ncol + nrow)

    # Phase 1 objective: minimize the artificial sum.
    T[-1, :] = -T[:nrow, :].sum(axis=0)
    T[-1, ncol:ncol + nrow] = 0.0

    iters = _pivot_loop(T, basis, nrow, allowed_cols=ncol + nrow,
                        max_iter=max_iter, tol=tol)
    if iters < 0:
        return ITER_CAP, _basic_solution(T, basis, nrow, ncol), np.inf, max_iter
    if -T[-1, -1] > tol * (1.0 + np.abs(b).sum()):
        return INFEASIBLE, np.zeros(ncol), np.inf, iters

    # Drive leftover artificials out of the basis where possible; rows that
    # cannot pivot are redundant and get neutralized.
    live = np.ones(nrow, dtype=bool)
    for i in range(nrow):
        if basis[i] >= ncol:
            row = T[i, :ncol]
            j = np.flatnonzero(np.abs(row) > tol)
            if j.size:
                _pivot(T, i, j[0])
                basis[i] = j[0]
            else:
                live[i] = False
                T[i, :] = 0.0

    # Phase 2 objective row rebuilt from the true costs.
    T[-1, :] = 0.0
    T[-1, :ncol] = c
    for i in range(nrow):
        if live[i] and basis[i] < ncol:
            T[-1, :] -= c[basis[i]] * T[i, :]

    it2 = _pivot_loop(T, basis, nrow, allowed_cols=ncol,
                      max_iter=max_iter, tol=tol, live=live)
    x = _basic_solution(T, basis, nrow, ncol)
    if it2 == -2:
        return UNBOUNDED, x, -np.inf, iters
    if it2 < 0:
        return ITER_CAP, x, float(c @ x), max_iter
    return OPTIMAL, x, float(c @ x), iters + it2


def _pivot(T, row, col):
    T[row, :] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row, :])


def _pivot_loop(T, basis, nrow, allowed_cols, max_iter, tol, live=None):
    """Bland-rule pivoting until optimal.  Returns iterations used,
    -1 on iteration cap, -2 on unbounded."""
    if live is None:
        live = np.ones(nrow, dtype=bool)
    for it in range(max_iter):
        reduced = T[-1, :allowed_cols]
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return it
        j = int(entering[0])
        col = T[:nrow, j]
        ok = (col > tol) & live
        if not ok.any():
            return -2
        ratios = np.full(nrow, np.inf)
        ratios[ok] = T[:nrow, -1][ok] / col[ok]
        rmin = ratios.min()
        # the slack must be additive: rmin can be (slightly) negative on
        # degenerate bases, where a multiplicative margin would exclude it
        cutoff = rmin + 1e-12 * (1.0 + abs(rmin))
        ties = np.flatnonzero(ratios <= cutoff)
        r = int(ties[np.argmin(basis[ties])])
        _pivot(T, r, j)
        basis[r] = j
    return -1


def _basic_solution(T, basis, nrow, ncol):
    x = np.zeros(ncol)
    for i in range(nrow):
        if basis[i] < ncol:
            x[basis[i]] = T[i, -1]
    return x


def lq_descent(B, X, q, max_iter=500, tol=1e-11):
    """Distances from the rows of X to the row space of B in the lq norm,
    1 < q < inf.

    B must have orthonormal rows (may be empty).  Returns
    (dists, C, stale) where C holds the per-row coefficient vectors and
    stale marks rows that hit the iteration cap.  Each returned distance
    is an upper bound on the true one (descent only ever lowers it).
    """
    B = np.asarray(B, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = X.shape[0]
    nb = B.shape[0]
    if nb == 0:
        d = np.abs(X) ** q
        return d.sum(axis=1) ** (1.0 / q), np.zeros((N, 0)), np.zeros(N, bool)

    C = X @ B.T  # Euclidean projection: exact for q = 2, warm start otherwise
    R = X - C @ B
    f = (np.abs(R) ** q).sum(axis=1)
    stale = np.zeros(N, dtype=bool)

    if abs(q - 2.0) < 1e-15:
        return f ** 0.5, C, stale
    if q < 2.0:
        return _irls_below_2(B, X, C, R, q, max_iter)

    G = -q * ((np.abs(R) ** (q - 1.0) * np.sign(R)) @ B.T)
    step = np.ones(N)
    converged = np.zeros(N, dtype=bool)
    for _ in range(max_iter):
        gn2 = (G * G).sum(axis=1)
        converged |= gn2 <= (tol * (1.0 + f)) ** 2
        if converged.all():
            break
        active = ~converged
        # Armijo backtracking, vectorized over the active rows.
        accept = np.zeros(N, dtype=bool)
        C_new, f_new = C.copy(), f.copy()
        for _bt in range(60):
            rows = active & ~accept
            if not rows.any():
                break
            trial = C[rows] - step[rows, None] * G[rows]
            r_tr = X[rows] - trial @ B
            f_tr = (np.abs(r_tr) ** q).sum(axis=1)
            ok = f_tr <= f[rows] - 1e-4 * step[rows] * gn2[rows]
            idx = np.flatnonzero(rows)
            good = idx[ok]
            C_new[good] = trial[ok]
            f_new[good] = f_tr[ok]
            accept[good] = True
            step[idx[~ok]] *= 0.5
        # Rows whose step underflowed cannot improve further.
        converged |= active & ~accept
        moved = active & accept
        if moved.any():
            # progress below float resolution: done
            converged |= moved & (f - f_new <= 1e-15 * (1.0 + f_new))
            R_new = X - C_new @ B
            G_new = -q * ((np.abs(R_new) ** (q - 1.0) * np.sign(R_new)) @ B.T)
            s = C_new - C
            y = G_new - G
            sy = (s * y).sum(axis=1)
            ss = (s * s).sum(axis=1)
            bb = np.where(sy > 1e-300, ss / np.maximum(sy, 1e-300), step * 2.0)
            step = np.where(moved, np.clip(bb, 1e-12, 1e12), step)
            C, f, G = C_new, f_new, G_new
    else:
        stale = ~converged

    return f ** (1.0 / q), C, stale


def _irls_below_2(B, X, C, R, q, max_iter):
    """Iteratively reweighted least squares for 1 < q < 2.

    Minimizes the smoothed objective sum (r^2 + eps)^(q/2) by weighted
    projections (each solve is a monotone majorize-minimize step because
    t^(q/2) is concave), driving eps down whenever progress at the current
    smoothing stalls.  Far better conditioned near q = 1 than descent.
    """
    N = X.shape[0]
    scale2 = np.maximum((R * R).max(axis=1), 1e-300)
    eps = 0.1 * scale2
    eps_floor = 1e-20 * scale2 + 1e-300
    f_prev = np.full(N, np.inf)
    converged = np.zeros(N, dtype=bool)
    for _ in range(max_iter):
        W = (R * R + eps[:, None]) ** (q / 2.0 - 1.0)
        M = np.einsum("jl,il,kl->ijk", B, W, B)
        rhs = np.einsum("jl,il->ij", B, W * X)
        C = np.linalg.solve(M, rhs[..., None])[..., 0]
        R = X - C @ B
        f_eps = ((R * R + eps[:, None]) ** (q / 2.0)).sum(axis=1)
        stalled = f_prev - f_eps <= 1e-15 * (1.0 + f_eps)
        at_floor = eps <= eps_floor
        converged |= stalled & at_floor
        if converged.all():
            break
        shrink = stalled & ~at_floor
        eps = np.where(shrink, np.maximum(eps * 1e-3, eps_floor), eps)
        f_prev = np.where(shrink, np.inf, f_eps)
    f = (np.abs(R) ** q).sum(axis=1)
    return f ** (1.0 / q), C, ~converged
