"""Exponent algebra for lp-scale parameters.

All formulas downstream are phrased in terms of reciprocals 1/p, so the
extended value p = inf is handled uniformly as 1/p = 0 and never needs a
special case in any arithmetic expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidExponentError

__all__ = [
    "Exponent",
    "INF",
    "as_exponent",
    "reciprocal",
    "interpolation_lambda",
    "lambda_pq",
    "k_from_nu",
    "nu_from_k",
    "regime_boundary",
    "effective_k",
    "ProblemParams",
]

# Relative slack when undoing floating-point powers (see effective_k).
_ROUND_EPS = 1e-9


@dataclass(frozen=True, order=True)
class Exponent:
    """An extended lp exponent in [1, inf], stored with its reciprocal."""

    value: float
    inv: float = field(init=False, compare=False)

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 1.0:
            raise InvalidExponentError(f"exponent must lie in [1, inf], got {v}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "inv", 0.0 if math.isinf(v) else 1.0 / v)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.value)

    def __str__(self) -> str:
        return "inf" if self.is_inf else format(self.value, "g")


INF = Exponent(math.inf)

ExponentLike = "Exponent | float | int | str"


def as_exponent(p) -> Exponent:
    """Coerce a number or the token 'inf' into an Exponent."""
    if isinstance(p, Exponent):
        return p
    if isinstance(p, str):
        s = p.strip().lower()
        return INF if s in ("inf", "infinity", "oo") else Exponent(float(s))
    return Exponent(float(p))


def reciprocal(p) -> float:
    """1/p with the convention 1/inf = 0. Rejects p < 1."""
    return as_exponent(p).inv


def interpolation_lambda(p1, p0, q) -> float:
    """Weight lam in [0, 1] with 1/q = (1-lam)/p1 + lam/p0.

    Computed entirely in reciprocal space:
    lam = (1/p1 - 1/q) / (1/p1 - 1/p0).  Requires p1 <= q <= p0, p1 < p0.
    """
    a1, a0, aq = reciprocal(p1), reciprocal(p0), reciprocal(q)
    if not a1 > a0:
        raise InvalidExponentError(f"need p1 < p0, got p1={p1}, p0={p0}")
    if not (a0 <= aq <= a1):
        raise InvalidExponentError(f"q={q} outside [p1, p0] = [{p1}, {p0}]")
    return (a1 - aq) / (a1 - a0)


def lambda_pq(p, q) -> float:
    """min{1, (1/p - 1/q) / (1/2 - 1/q)} for p <= q, 2 < q < inf."""
    pe, qe = as_exponent(p), as_exponent(q)
    if qe.is_inf or qe.inv >= 0.5:
        raise InvalidExponentError(f"q must satisfy 2 < q < inf, got {q}")
    if pe.inv < qe.inv:
        raise InvalidExponentError(f"need p <= q, got p={p} > q={q}")
    return min(1.0, (pe.inv - qe.inv) / (0.5 - qe.inv))


def k_from_nu(nu: float, p1, p0, m: int) -> float:
    """Invert nu = k^(1/p1 - 1/p0) and clamp the result into [1, m].

    Ratios nu <= 1 land on k = 1 (the second constraint swallows the first);
    nu >= m^(1/p1-1/p0) lands on k = m (the first swallows the second).
    """
    a1, a0 = reciprocal(p1), reciprocal(p0)
    if not a1 > a0:
        raise InvalidExponentError(f"need p1 < p0, got p1={p1}, p0={p0}")
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    k = nu ** (1.0 / (a1 - a0))
    # snap float round-trip error at the ends so nu >= m^(1/p1-1/p0)
    # lands exactly on m (and nu <= 1 exactly on 1)
    if k >= float(m) * (1.0 - 1e-12):
        return float(m)
    if k <= 1.0 + 1e-12:
        return 1.0
    return k


def nu_from_k(k: float, p1, p0) -> float:
    """The radius nu = k^(1/p1 - 1/p0) matched to an intersection scale k."""
    a1, a0 = reciprocal(p1), reciprocal(p0)
    if not a1 > a0:
        raise InvalidExponentError(f"need p1 < p0, got p1={p1}, p0={p0}")
    return k ** (a1 - a0)


def regime_boundary(k: float, m: int, q) -> float:
    """The index n* = k^(1-2/q) * m^(2/q) where the piecewise estimates switch.

    Satisfies n*(k=1) = m^(2/q) and n*(k=m) = m; constant in k at q = 2.
    """
    aq = reciprocal(q)
    if aq > 0.5:
        raise InvalidExponentError(f"regime boundary needs q >= 2, got q={q}")
    if not 1.0 <= k <= m:
        raise ValueError(f"k={k} outside [1, m={m}]")
    return k ** (1.0 - 2.0 * aq) * float(m) ** (2.0 * aq)


def effective_k(n: int, m: int, q, a: float = 1.0) -> int:
    """Ceiling of (a^(1/2) n^(-1/2) m^(1/q))^(1/(1/q-1/2)); inverse of
    regime_boundary on integers.

    `a` stands in for the unknown non-increasing calibration function of q
    (only its existence is guaranteed); default 1.
    """
    aq = reciprocal(q)
    if aq >= 0.5:
        raise InvalidExponentError(f"effective_k needs q > 2, got q={q}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    base = math.sqrt(a) * float(n) ** -0.5 * float(m) ** aq
    raw = base ** (1.0 / (aq - 0.5))
    # Floating-point powers can land a hair above an exact integer; a plain
    # ceil would then overshoot by one and break the round trip with
    # regime_boundary.
    nearest = round(raw)
    if abs(raw - nearest) <= _ROUND_EPS * max(1.0, abs(nearest)):
        raw = nearest
    return max(1, math.ceil(raw))


@dataclass(frozen=True)
class ProblemParams:
    """One width question: body B_p0 ∩ nu*B_p1 in R^m, approximated in lq
    by n-dimensional subspaces, with nu = k^(1/p1-1/p0)."""

    p0: Exponent
    p1: Exponent
    q: Exponent
    m: int
    n: int
    k: float
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "p0", as_exponent(self.p0))
        object.__setattr__(self, "p1", as_exponent(self.p1))
        object.__setattr__(self, "q", as_exponent(self.q))
        if not self.p1.inv > self.p0.inv:
            raise InvalidExponentError(
                f"need p1 < p0, got p1={self.p1}, p0={self.p0}"
            )
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.n < 0:
            raise ValueError(f"n must be non-negative, got {self.n}")
        if not 1.0 <= self.k <= self.m:
            raise ValueError(f"k={self.k} outside [1, m={self.m}]")
        expected = nu_from_k(self.k, self.p1, self.p0)
        if abs(self.nu - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError(
                f"nu={self.nu} inconsistent with k={self.k} "
                f"(expected {expected})"
            )

    @classmethod
    def from_k(cls, p0, p1, q, m: int, n: int, k: float) -> "ProblemParams":
        p0e, p1e = as_exponent(p0), as_exponent(p1)
        return cls(p0e, p1e, as_exponent(q), m, n, float(k),
                   nu_from_k(float(k), p1e, p0e))

    @classmethod
    def from_nu(cls, p0, p1, q, m: int, n: int, nu: float) -> "ProblemParams":
        """Build params with k derived from nu, clamping k into [1, m].

        The stored nu is the clamped, k-consistent radius; callers that need
        the raw nu (to detect the degenerate single-ball regimes) should
        compare against 1 and m^(1/p1-1/p0) before calling.
        """
        p0e, p1e = as_exponent(p0), as_exponent(p1)
        k = k_from_nu(float(nu), p1e, p0e, m)
        return cls(p0e, p1e, as_exponent(q), m, n, k, nu_from_k(k, p1e, p0e))
