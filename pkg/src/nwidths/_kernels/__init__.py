"""Hot-kernel backend selection.

The compiled Cython extension is preferred when it was built; otherwise the
pure-numpy implementation backs the same interface.  Both expose
`simplex_solve` and `lq_descent` with identical semantics, and the status
codes OPTIMAL / INFEASIBLE / UNBOUNDED / ITER_CAP.
"""

from ._pykernels import INFEASIBLE, ITER_CAP, OPTIMAL, UNBOUNDED

from . import _pykernels

try:
    from . import _cykernels as _impl

    BACKEND = "cython"
except ImportError:  # extension not built; numpy fallback
    _impl = _pykernels

    BACKEND = "python"

simplex_solve = _impl.simplex_solve

if BACKEND == "cython":

    def lq_descent(B, X, q, max_iter=500, tol=1e-11):
        # above q = 2 the batched BLAS path outruns the compiled scalar
        # loops (see benchmarks/bench_backends.py); the compiled IRLS wins
        # below q = 2 and the q = 2 shortcut is identical either way
        if q > 2.0:
            return _pykernels.lq_descent(B, X, q, max_iter, tol)
        return _impl.lq_descent(B, X, q, max_iter, tol)

else:
    lq_descent = _impl.lq_descent

__all__ = [
    "BACKEND",
    "simplex_solve",
    "lq_descent",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITER_CAP",
]
