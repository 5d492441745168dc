"""Geometry oracles for the convex bodies under study.

Four body variants: lp balls, intersections B_p0 ∩ nu*B_p1, sign-pattern
polytopes V_k (hull of all vectors with exactly k entries equal to +-1;
V_1 is the cross-polytope, V_m the cube, and for integer k the identity
V_k = B_inf ∩ k*B_1 holds and is what the gauge uses), and scaled cubes.

Gauges and supports are closed-form everywhere except the support of a
general intersection, which is a flagged numeric ascent (the cube/
cross-polytope special case reduces to greedy mass placement and stays
exact).  Certificate sweeps check the inclusion chain used by the
closed-form width estimates on concrete vectors and report worst-case
deviations instead of raising.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._kernels import OPTIMAL, simplex_solve
from .errors import DimensionMismatchError, EnumerationCapError
from .exponents import Exponent, as_exponent, interpolation_lambda

__all__ = [
    "Ball",
    "Intersection",
    "VkPolytope",
    "ScaledCube",
    "Body",
    "DEFAULT_VERTEX_CAP",
    "lp_norm",
    "lp_norms",
    "dual_exponent",
    "gauge",
    "gauges",
    "support",
    "support_point_ball",
    "vk_base_pattern",
    "vk_vertices",
    "body_vertices",
    "is_polytope",
    "hull_gauge",
    "vk_gauge_probe",
    "CertReport",
    "cert_interpolation",
    "cert_vkl",
    "cert_cube",
]

DEFAULT_VERTEX_CAP = 10 ** 6


@dataclass(frozen=True)
class Ball:
    """Unit ball of the lp norm on R^m."""

    p: Exponent
    m: int

    def __post_init__(self):
        object.__setattr__(self, "p", as_exponent(self.p))
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")


@dataclass(frozen=True)
class Intersection:
    """B_p0 ∩ nu * B_p1 with p1 < p0 and nu > 0."""

    p0: Exponent
    p1: Exponent
    nu: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, "p0", as_exponent(self.p0))
        object.__setattr__(self, "p1", as_exponent(self.p1))
        if not self.p1.inv > self.p0.inv:
            raise ValueError(f"need p1 < p0, got p1={self.p1}, p0={self.p0}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")


@dataclass(frozen=True)
class VkPolytope:
    """Hull of all sign vectors with exactly k nonzero entries.

    Non-integer k is permitted only behind `extrapolated=True`: the gauge
    formula max(||x||_inf, ||x||_1 / k) still defines a body, but no vertex
    set backs it.
    """

    k: float
    m: int
    extrapolated: bool = False

    def __post_init__(self):
        if not 1 <= self.k <= self.m:
            raise ValueError(f"k={self.k} outside [1, m={self.m}]")
        if not self.extrapolated and self.k != int(self.k):
            raise ValueError(
                f"non-integer k={self.k} requires extrapolated=True"
            )


@dataclass(frozen=True)
class ScaledCube:
    """c * B_inf."""

    c: float
    m: int

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")


Body = Union[Ball, Intersection, VkPolytope, ScaledCube]


def lp_norm(x, p) -> float:
    """(sum |x_j|^p)^(1/p), or max |x_j| for p = inf."""
    x = np.asarray(x, dtype=float)
    pe = as_exponent(p)
    if x.size == 0:
        return 0.0
    if pe.is_inf:
        return float(np.abs(x).max())
    return float(np.linalg.norm(x.ravel(), ord=pe.value))


def lp_norms(X, p) -> np.ndarray:
    """Row-wise lp norms of a 2-d array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pe = as_exponent(p)
    ordv = np.inf if pe.is_inf else pe.value
    return np.linalg.norm(X, ord=ordv, axis=1)


def dual_exponent(p) -> Exponent:
    """p' with 1/p + 1/p' = 1 (1 <-> inf, 2 self-dual)."""
    pe = as_exponent(p)
    if pe.is_inf:
        return Exponent(1.0)
    if pe.value == 1.0:
        return Exponent(math.inf)
    return Exponent(pe.value / (pe.value - 1.0))


def _check_dim(body: Body, x: np.ndarray):
    if x.shape[-1] != body.m:
        raise DimensionMismatchError(
            f"vector length {x.shape[-1]} != ambient dimension {body.m}"
        )


def gauge(body: Body, x) -> float:
    """Minkowski functional: the smallest t >= 0 with x in t * body."""
    x = np.asarray(x, dtype=float)
    _check_dim(body, x)
    if isinstance(body, Ball):
        return lp_norm(x, body.p)
    if isinstance(body, Intersection):
        return max(lp_norm(x, body.p0), lp_norm(x, body.p1) / body.nu)
    if isinstance(body, VkPolytope):
        return max(lp_norm(x, "inf"), lp_norm(x, 1) / body.k)
    if isinstance(body, ScaledCube):
        return lp_norm(x, "inf") / body.c
    raise TypeError(f"unknown body {body!r}")


def gauges(body: Body, X) -> np.ndarray:
    """Row-wise gauges of a batch of vectors."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_dim(body, X)
    if isinstance(body, Ball):
        return lp_norms(X, body.p)
    if isinstance(body, Intersection):
        return np.maximum(lp_norms(X, body.p0),
                          lp_norms(X, body.p1) / body.nu)
    if isinstance(body, VkPolytope):
        return np.maximum(lp_norms(X, "inf"), lp_norms(X, 1) / body.k)
    if isinstance(body, ScaledCube):
        return lp_norms(X, "inf") / body.c
    raise TypeError(f"unknown body {body!r}")


def support_point_ball(p, y) -> np.ndarray:
    """A maximizer of <x, y> over the unit lp ball (any one if ties)."""
    y = np.asarray(y, dtype=float)
    pe = as_exponent(p)
    if not np.any(y):
        return np.zeros_like(y)
    if pe.is_inf:
        return np.sign(y) + (y == 0)  # interior signs are free; pick +1
    if pe.value == 1.0:
        x = np.zeros_like(y)
        j = int(np.argmax(np.abs(y)))
        x[j] = np.sign(y[j])
        return x
    pd = dual_exponent(pe).value
    x = np.sign(y) * np.abs(y) ** (pd - 1.0)
    return x / lp_norm(x, pe)


def support(body: Body, y, *, restarts: int = 8, iters: int = 200,
            seed: int = 0) -> float:
    """Support function h(y) = sup over the body of <x, y>.

    Closed-form for balls, sign-pattern polytopes, cubes, and
    cube/cross-polytope intersections (greedy mass placement).  Other
    intersections have no closed form; for them the value is a multistart
    ascent estimate, hence approximate (a lower bound).
    """
    y = np.asarray(y, dtype=float)
    _check_dim(body, y)
    if isinstance(body, Ball):
        return lp_norm(y, dual_exponent(body.p))
    if isinstance(body, VkPolytope):
        return _greedy_budget_sum(y, float(body.k), body.m)
    if isinstance(body, ScaledCube):
        return body.c * lp_norm(y, 1)
    if isinstance(body, Intersection):
        if body.p0.is_inf and body.p1.value == 1.0:
            return _greedy_budget_sum(y, min(body.nu, float(body.m)), body.m)
        return _support_intersection(body, y, restarts, iters, seed)
    raise TypeError(f"unknown body {body!r}")


def _greedy_budget_sum(y, budget: float, m: int) -> float:
    """sum of the `budget` largest |y_j| with a fractional last term: the
    support of B_inf ∩ budget*B_1."""
    a = np.sort(np.abs(y))[::-1]
    kf = int(math.floor(budget))
    h = float(a[:kf].sum())
    if kf < m:
        h += (budget - kf) * float(a[kf])
    return h


def _support_intersection(body: Intersection, y, restarts, iters, seed):
    # No closed form: climb along y over the gauge-1 surface, seeding with
    # gauge-normalized blends of the two constituent support points.
    rng = np.random.default_rng(seed)
    x0 = support_point_ball(body.p0, y)
    x1 = body.nu * support_point_ball(body.p1, y)
    starts = [th * x0 + (1.0 - th) * x1 for th in np.linspace(0.0, 1.0, 17)]
    for _ in range(restarts):
        starts.append(rng.standard_normal(body.m))
    X = np.array(starts)
    g = gauges(body, X)
    X = X[g > 1e-300]
    X /= gauges(body, X)[:, None]
    ynorm = lp_norm(y, 2)
    if ynorm == 0:
        return 0.0
    d = y / ynorm
    best = float((X @ y).max())
    for t in range(iters):
        X = X + (0.5 / (1.0 + 0.1 * t)) * d
        g = gauges(body, X)
        X = X / np.where(g > 0, g, 1.0)[:, None]
        best = max(best, float((X @ y).max()))
    return best


def vk_base_pattern(m: int, k: int) -> np.ndarray:
    """The base vector of V_k: ones on the first k coordinates, zeros after.

    Every vertex of V_k is a signed coordinate permutation of this pattern.
    """
    k = int(k)
    if not 1 <= k <= m:
        raise ValueError(f"k={k} outside [1, m={m}]")
    x = np.zeros(m)
    x[:k] = 1.0
    return x


def vk_vertices(m: int, k: int, cap: int = DEFAULT_VERTEX_CAP) -> np.ndarray:
    """All C(m,k) * 2^k vertices of the sign-pattern polytope."""
    k = int(k)
    if not 1 <= k <= m:
        raise ValueError(f"k={k} outside [1, m={m}]")
    count = math.comb(m, k) * 2 ** k
    if count > cap:
        raise EnumerationCapError(
            f"vertex count {count} exceeds cap {cap} (m={m}, k={k})"
        )
    signs = _sign_patterns(k)
    out = np.zeros((count, m))
    block = signs.shape[0]
    for i, supp in enumerate(itertools.combinations(range(m), k)):
        out[i * block:(i + 1) * block, supp] = signs
    return out


def _sign_patterns(k: int, fix_first: bool = False) -> np.ndarray:
    """All vectors in {+-1}^k (first entry fixed to +1 when requested)."""
    free = k - 1 if fix_first else k
    n = 2 ** free
    signs = np.ones((n, k))
    if free:
        bits = (np.arange(n)[:, None] >> np.arange(free)) & 1
        signs[:, k - free:] = 2.0 * bits - 1.0
    return signs


def is_polytope(body: Body) -> bool:
    """True for bodies whose deviation maxima are certified over vertices."""
    if isinstance(body, (VkPolytope, ScaledCube)):
        return not (isinstance(body, VkPolytope) and body.extrapolated)
    if isinstance(body, Ball):
        return body.p.value == 1.0 or body.p.is_inf
    return False


def body_vertices(body: Body, cap: int = DEFAULT_VERTEX_CAP,
                  half: bool = False) -> np.ndarray:
    """Vertex set of a polytopal body.

    With half=True only one vertex per antipodal pair is returned (valid
    for any use invariant under x -> -x, e.g. distances to subspaces).
    """
    if isinstance(body, Ball) and body.p.value == 1.0:
        eye = np.eye(body.m)
        return eye if half else np.vstack([eye, -eye])
    if isinstance(body, Ball) and body.p.is_inf:
        return _cube_vertices(body.m, cap, half)
    if isinstance(body, ScaledCube):
        return body.c * _cube_vertices(body.m, cap, half)
    if isinstance(body, VkPolytope) and not body.extrapolated:
        k = int(body.k)
        count = math.comb(body.m, k) * 2 ** (k - 1 if half else k)
        if count > cap:
            raise EnumerationCapError(
                f"vertex count {count} exceeds cap {cap}"
            )
        signs = _sign_patterns(k, fix_first=half)
        out = np.zeros((count, body.m))
        block = signs.shape[0]
        for i, supp in enumerate(itertools.combinations(range(body.m), k)):
            out[i * block:(i + 1) * block, supp] = signs
        return out
    raise TypeError(f"{body!r} has no enumerable vertex set")


def _cube_vertices(m: int, cap: int, half: bool) -> np.ndarray:
    count = 2 ** (m - 1) if half else 2 ** m
    if count > cap:
        raise EnumerationCapError(f"2^{m} cube vertices exceed cap {cap}")
    return _sign_patterns(m, fix_first=half)


def hull_gauge(vertices: np.ndarray, x, tol: float = 1e-9) -> float:
    """Exact membership scale min{t : x in t * conv(vertices)}.

    Solved as the LP  min sum(mu)  s.t.  V^T mu = x, mu >= 0, which is the
    atomic-norm form of the gauge for a symmetric vertex set.  Brute force
    by design: this is the independent oracle the closed-form gauges are
    validated against.
    """
    V = np.asarray(vertices, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return 0.0
    status, mu, obj, _ = simplex_solve(
        np.ones(V.shape[0]), V.T, x, max_iter=20000, tol=tol)
    if status != OPTIMAL:
        raise RuntimeError(f"hull membership LP failed with status {status}")
    return float(obj)


def vk_gauge_probe(x, k: float) -> float:
    """Gauge of V_k recovered through support-function duality.

    Probes y = sign pattern of x on its j largest-magnitude coordinates for
    every j; the ratio <x,y>/h(y) peaks at the gauge (j=1 recovers the
    sup-norm constraint, j=m the scaled l1 constraint).
    """
    a = np.sort(np.abs(np.asarray(x, dtype=float)))[::-1]
    csum = np.cumsum(a)
    j = np.arange(1, a.size + 1)
    return float((csum / np.minimum(j, k)).max())


@dataclass(frozen=True)
class CertReport:
    """Outcome of one certificate sweep: worst deviation vs tolerance."""

    name: str
    params: dict
    checks: int
    max_violation: float
    tol: float
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.max_violation <= self.tol


def cert_interpolation(p1, p0, q, m: int, samples: int = 10000,
                       seed: int = 0, lambda_shift: float = 0.0,
                       tol: float = 1e-12) -> CertReport:
    """Check ||x||_q <= ||x||_p1^(1-lam) * ||x||_p0^lam on random vectors.

    lam solves 1/q = (1-lam)/p1 + lam/p0; `lambda_shift` exists as a
    negative-control hook (a wrong lam must be caught as a violation).
    """
    lam = interpolation_lambda(p1, p0, q) + lambda_shift
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, m))
    lhs = lp_norms(X, q)
    rhs = lp_norms(X, p1) ** (1.0 - lam) * lp_norms(X, p0) ** lam
    rel = (lhs - rhs) / np.maximum(rhs, 1e-300)
    worst = float(max(0.0, rel.max()))
    return CertReport(
        name="interpolation",
        params={"p1": str(as_exponent(p1)), "p0": str(as_exponent(p0)),
                "q": str(as_exponent(q)), "m": m, "seed": seed,
                "lambda_shift": lambda_shift},
        checks=samples, max_violation=worst, tol=tol)


def cert_vkl(p0, p1, k: int, m: int, cap: int = DEFAULT_VERTEX_CAP,
             tol: float = 1e-12) -> CertReport:
    """Check that k^(-1/p0) V_k touches the intersection boundary exactly.

    On every vertex v both constraints of B_p0 ∩ nu*B_p1 must be tight:
    ||k^(-1/p0) v||_p0 = 1 and ||k^(-1/p0) v||_p1 / nu = 1.
    """
    p0e, p1e = as_exponent(p0), as_exponent(p1)
    nu = float(k) ** (p1e.inv - p0e.inv)
    V = vk_vertices(m, k, cap) * float(k) ** -p0e.inv
    g0 = lp_norms(V, p0e)
    g1 = lp_norms(V, p1e) / nu
    worst = float(np.max(np.maximum(np.abs(g0 - 1.0), np.abs(g1 - 1.0))))
    return CertReport(
        name="vkl",
        params={"p0": str(p0e), "p1": str(p1e), "k": k, "m": m},
        checks=V.shape[0], max_violation=worst, tol=tol)


def cert_cube(p0, p1, k: int, m: int, cap: int = DEFAULT_VERTEX_CAP,
              samples: int = 4096, seed: int = 0,
              tol: float = 1e-12) -> CertReport:
    """Check the scaled-cube inclusion c * B_inf ⊂ B_p0 ∩ nu*B_p1 with
    c = k^(1/p1-1/p0) m^(-1/p1).

    The p1 constraint must be exactly tight and the intersection gauge
    must not exceed 1 on cube vertices (all of them when 2^m fits under
    the cap, a seeded sample otherwise).
    """
    p0e, p1e = as_exponent(p0), as_exponent(p1)
    nu = float(k) ** (p1e.inv - p0e.inv)
    c = nu * float(m) ** -p1e.inv
    if 2 ** m <= cap:
        S = _sign_patterns(m)
    else:
        rng = np.random.default_rng(seed)
        S = 2.0 * rng.integers(0, 2, size=(samples, m)) - 1.0
    X = c * S
    g0 = lp_norms(X, p0e)
    g1 = lp_norms(X, p1e) / nu
    excess = float(np.max(np.maximum(g0, g1)) - 1.0)
    tight = float(np.max(np.abs(g1 - 1.0)))
    worst = max(max(0.0, excess), tight)
    return CertReport(
        name="cube",
        params={"p0": str(p0e), "p1": str(p1e), "k": k, "m": m},
        checks=X.shape[0], max_violation=worst, tol=tol)
