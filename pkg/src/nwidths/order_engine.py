"""Constant-free closed-form width estimates.

Two kinds of values are produced:

* exact widths (m-n)^(1/q-1/p) for lp balls with q <= p;
* order magnitudes (all equivalence constants set to 1) for lp balls with
  p <= q and for intersection bodies B_p0 ∩ nu*B_p1, dispatched over six
  parameter cases plus the degenerate reductions.

Every estimate carries a case id, the piecewise regime that fired, and a
trace of justification tags naming the inclusion or ball estimate each side
of the bound rests on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import NotCoveredError
from .exponents import (
    Exponent,
    ProblemParams,
    as_exponent,
    lambda_pq,
    nu_from_k,
    regime_boundary,
)

__all__ = [
    "Case",
    "Regime",
    "OrderEstimate",
    "order_ball",
    "width_exact",
    "order_intersection",
    "order_intersection_from_nu",
    "boundary_mismatch",
    "describe_derivation",
]


class Case(str, Enum):
    TRIVIAL_SMALL_Q = "TrivialSmallQ"
    TRIVIAL_P0_LE_2 = "TrivialP0le2"
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    CASE5 = "Case5"
    CASE6 = "Case6"
    NU_CLAMP_LOW = "NuClampLow"
    NU_CLAMP_HIGH = "NuClampHigh"


class Regime(str, Enum):
    FLAT = "flat"
    INTERPOLATED = "interpolated"
    TAIL = "tail"


# Justification tags. The rendered meaning of each lives in _TAG_TEXT.
THM_A = "ThmA"
THM_B = "ThmB"
INCL_Q = "Incl-3"
INCL_2 = "Incl-4"
INCL_VK = "Incl-5"
INCL_CUBE = "Incl-6"
THM_C = "ThmC"
THM_D = "ThmD"
KQ2 = "kq2"
NORM_TRANSFER = "NormTransfer"


@dataclass(frozen=True)
class OrderEstimate:
    value: float
    case_id: Case
    regime: Regime
    trace: tuple

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"order value must be positive, got {self.value}")
        if not self.trace:
            raise ValueError("trace must be non-empty")


def _min_form(m: int, n: float, aq: float) -> float:
    """min{1, n^(-1/2) m^(1/q)}; n = 0 extends continuously to 1."""
    if n <= 0:
        return 1.0
    return min(1.0, float(n) ** -0.5 * float(m) ** aq)


def width_exact(p, q, m: int, n: int) -> float:
    """Exact width (m-n)^(1/q-1/p) of B_p in lq, valid for q <= p.

    n = m is rejected: the remainder exponent degenerates to 0^0 at p = q.
    """
    pe, qe = as_exponent(p), as_exponent(q)
    if qe.inv < pe.inv:
        raise NotCoveredError(
            f"no exact formula for q > p (q={qe}, p={pe})"
        )
    if not 0 <= n <= m:
        raise ValueError(f"need 0 <= n <= m, got n={n}, m={m}")
    if n == m:
        raise ValueError("n = m rejected (degenerate remainder)")
    return float(m - n) ** (qe.inv - pe.inv)


def order_ball(p, q, m: int, n: int) -> float:
    """Width of B_p in lq: exact for q <= p, constant-free order for p < q.

    The order branch requires q < inf and n <= m/2.
    """
    pe, qe = as_exponent(p), as_exponent(q)
    if qe.inv >= pe.inv:  # q <= p
        return width_exact(pe, qe, m, n)
    if qe.is_inf:
        raise NotCoveredError("no order estimate for p < q = inf")
    if n < 0 or 2 * n > m:
        raise NotCoveredError(
            f"order branch needs 0 <= n <= m/2, got n={n}, m={m}"
        )
    if qe.inv >= 0.5:  # p < q <= 2
        return 1.0
    return _min_form(m, n, qe.inv) ** lambda_pq(pe, qe)


def _tail_broad(k: float, a0: float, m: int, n: float, aq: float) -> float:
    """Tail branch shared by cases 1 and 4: k^(1/2-1/p0) n^(-1/2) m^(1/q)."""
    return k ** (0.5 - a0) * _min_form(m, n, aq)


def _tail_narrow(k: float, a1: float, a0: float, m: int, n: float, aq: float,
                 p1: Exponent, q: Exponent) -> float:
    """Tail branch shared by cases 2 and 3:
    k^(1/p1-1/p0) (n^(-1/2) m^(1/q))^((1/p1-1/q)/(1/2-1/q))."""
    return k ** (a1 - a0) * _min_form(m, n, aq) ** lambda_pq(p1, q)


def order_intersection(params: ProblemParams) -> OrderEstimate:
    """Constant-free order of the width of B_p0 ∩ nu*B_p1 in lq.

    Dispatches on the ordering of (p1, 2, q, p0): the two reductions with
    p0 <= q fire first, then cases 1-6 in order.  Within cases 1-4 the
    regime is selected by comparing n with m^(2/q) and with the boundary
    n* = k^(1-2/q) m^(2/q); ties resolve to the earlier regime.
    """
    p0, p1, q = params.p0, params.p1, params.q
    m, n, k = params.m, params.n, params.k
    a0, a1, aq = p0.inv, p1.inv, q.inv

    if n < 0 or 2 * n > m:
        raise NotCoveredError(f"need 0 <= n <= m/2, got n={n}, m={m}")

    # Reductions: p0 <= q makes the intersection order-equivalent to a ball.
    if a0 >= aq >= 0.5:  # p0 <= q <= 2
        return OrderEstimate(1.0, Case.TRIVIAL_SMALL_Q, Regime.FLAT, (THM_A,))
    if a0 >= 0.5 > aq:  # p0 <= 2 < q
        if q.is_inf:
            raise NotCoveredError("not covered: p0 <= 2 with q = inf")
        regime = Regime.FLAT if n <= float(m) ** (2 * aq) else Regime.TAIL
        return OrderEstimate(_min_form(m, n, aq), Case.TRIVIAL_P0_LE_2,
                             regime, (THM_A,))
    if q.is_inf:
        raise NotCoveredError("not covered by the six cases: q = inf")

    n_flat = float(m) ** (2 * aq)

    if a1 > 0.5 > a0 > aq:  # case 1: p1 < 2 < p0 < q < inf
        n_star = regime_boundary(k, m, q)
        if n <= n_flat:
            return OrderEstimate(1.0, Case.CASE1, Regime.FLAT, (THM_A,))
        if n <= n_star:
            value = _min_form(m, n, aq) ** lambda_pq(p0, q)
            return OrderEstimate(value, Case.CASE1, Regime.INTERPOLATED,
                                 (THM_A, INCL_VK, THM_C))
        return OrderEstimate(_tail_broad(k, a0, m, n, aq), Case.CASE1,
                             Regime.TAIL,
                             (INCL_2, THM_A, INCL_VK, THM_C, NORM_TRANSFER, KQ2))

    if a1 <= 0.5 and a1 > a0 > aq:  # case 2: 2 <= p1 < p0 < q < inf
        n_star = regime_boundary(k, m, q)
        if n <= n_flat:
            return OrderEstimate(1.0, Case.CASE2, Regime.FLAT, (THM_A,))
        if n <= n_star:
            value = _min_form(m, n, aq) ** lambda_pq(p0, q)
            return OrderEstimate(value, Case.CASE2, Regime.INTERPOLATED,
                                 (THM_A, INCL_VK, THM_C))
        value = _tail_narrow(k, a1, a0, m, n, aq, p1, q)
        return OrderEstimate(value, Case.CASE2, Regime.TAIL,
                             (THM_A, INCL_VK, THM_C, INCL_CUBE, THM_B))

    if a1 <= 0.5 and aq <= a1 and a0 <= aq:  # case 3: 2 <= p1 <= q <= p0
        n_star = regime_boundary(k, m, q)
        if n <= n_star:
            return OrderEstimate(k ** (aq - a0), Case.CASE3, Regime.FLAT,
                                 (INCL_Q, INCL_VK, THM_C))
        value = _tail_narrow(k, a1, a0, m, n, aq, p1, q)
        return OrderEstimate(value, Case.CASE3, Regime.TAIL,
                             (THM_A, INCL_VK, THM_C, INCL_CUBE, THM_B))

    if a1 > 0.5 > aq and a0 <= aq:  # case 4: p1 < 2 < q <= p0
        n_star = regime_boundary(k, m, q)
        if n <= n_star:
            return OrderEstimate(k ** (aq - a0), Case.CASE4, Regime.FLAT,
                                 (INCL_Q, INCL_VK, THM_C))
        return OrderEstimate(_tail_broad(k, a0, m, n, aq), Case.CASE4,
                             Regime.TAIL,
                             (INCL_2, THM_A, INCL_VK, THM_C, NORM_TRANSFER, KQ2))

    if aq >= 0.5 and a1 > aq > a0:  # case 5: q <= 2, p1 < q < p0
        return OrderEstimate(k ** (aq - a0), Case.CASE5, Regime.FLAT,
                             (INCL_Q, INCL_VK, THM_D))

    if aq >= a1:  # case 6: q <= p1 < p0
        value = k ** (a1 - a0) * float(m) ** (aq - a1)
        return OrderEstimate(value, Case.CASE6, Regime.FLAT,
                             (THM_B, INCL_CUBE))

    raise NotCoveredError(
        f"not covered by the six cases: p0={p0}, p1={p1}, q={q}"
    )


def order_intersection_from_nu(p0, p1, q, m: int, n: int,
                               nu: float) -> OrderEstimate:
    """Order estimate with nu given directly.

    nu < 1 collapses the body to nu*B_p1 and nu > m^(1/p1-1/p0) to B_p0;
    those degenerate regimes scale the plain ball estimate instead of
    entering the six-case dispatch.  Boundary values resolve to the
    clamped k (nu = 1 -> k = 1).
    """
    p0e, p1e, qe = as_exponent(p0), as_exponent(p1), as_exponent(q)
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    nu_max = nu_from_k(float(m), p1e, p0e)
    if nu < 1.0:
        value, regime, trace = _scaled_ball(p1e, qe, m, n, scale=nu)
        return OrderEstimate(value, Case.NU_CLAMP_LOW, regime, trace)
    if nu > nu_max:
        value, regime, trace = _scaled_ball(p0e, qe, m, n, scale=1.0)
        return OrderEstimate(value, Case.NU_CLAMP_HIGH, regime, trace)
    return order_intersection(
        ProblemParams.from_nu(p0e, p1e, qe, m, n, nu))


def _scaled_ball(p: Exponent, q: Exponent, m: int, n: int, scale: float):
    value = scale * order_ball(p, q, m, n)
    if q.inv >= p.inv:
        return value, Regime.FLAT, (THM_B,)
    regime = (Regime.FLAT if q.inv >= 0.5 or n <= float(m) ** (2 * q.inv)
              else Regime.TAIL)
    return value, regime, (THM_A,)


def boundary_mismatch(p0, p1, q, m: int, k: float) -> float:
    """Worst relative disagreement of adjacent regime formulas at their
    shared boundaries, evaluated at the real (non-integer) boundary index.

    Cases 1-2 are checked at n = m^(2/q) (flat vs interpolated) and at
    n* (interpolated vs tail); cases 3-4 at n* (flat vs tail).  Parameters
    matching a boundary-free case are rejected.
    """
    p0e, p1e, qe = as_exponent(p0), as_exponent(p1), as_exponent(q)
    a0, a1, aq = p0e.inv, p1e.inv, qe.inv
    if qe.is_inf or not a1 > a0:
        raise NotCoveredError("no regime boundary for these parameters")
    n_star = regime_boundary(k, m, qe)
    pairs = []
    if a0 > aq > 0 and a0 < 0.5:  # cases 1 and 2 (p0 < q, p0 > 2)
        n_flat = float(m) ** (2 * aq)
        interp_at_flat = _min_form(m, n_flat, aq) ** lambda_pq(p0e, qe)
        pairs.append((1.0, interp_at_flat))
        interp = _min_form(m, n_star, aq) ** lambda_pq(p0e, qe)
        if a1 > 0.5:
            tail = _tail_broad(k, a0, m, n_star, aq)
        else:
            tail = _tail_narrow(k, a1, a0, m, n_star, aq, p1e, qe)
        pairs.append((interp, tail))
    elif a0 <= aq < 0.5:  # cases 3 and 4 (2 < q <= p0)
        flat = k ** (aq - a0)
        if a1 > 0.5:
            tail = _tail_broad(k, a0, m, n_star, aq)
        else:
            tail = _tail_narrow(k, a1, a0, m, n_star, aq, p1e, qe)
        pairs.append((flat, tail))
    else:
        raise NotCoveredError(
            f"no regime boundary in the case of p0={p0e}, p1={p1e}, q={qe}"
        )
    return max(abs(u - v) / max(abs(u), abs(v), 1e-300) for u, v in pairs)


_TAG_TEXT = {
    THM_A: "ball order for p <= q: flat value 1, then min{1, n^(-1/2) m^(1/q)}"
           " raised to the interpolation exponent",
    THM_B: "exact ball width for q <= p: (m-n)^(1/q-1/p)",
    INCL_Q: "upper route: the intersection embeds into nu^(1-lambda) B_q"
            " = k^(1/q-1/p0) B_q",
    INCL_2: "upper route: the intersection embeds into k^(1/2-1/p0) B_2",
    INCL_VK: "lower route: the scaled sign-pattern polytope k^(-1/p0) V_k"
             " sits inside the intersection",
    INCL_CUBE: "lower route: the scaled cube k^(1/p1-1/p0) m^(-1/p1) B_inf"
               " sits inside the intersection",
    THM_C: "polytope lower bound of order k^(1/q) below the regime boundary"
           " (q > 2)",
    THM_D: "polytope lower bound of order k^(1/q) for q <= 2",
    KQ2: "averaging bound: Euclidean width of the sign-pattern polytope is"
         " at least k^(1/2) (1-n/m)^(1/2)",
    NORM_TRANSFER: "norm transfer: ||x||_q >= m^(1/q-1/2) ||x||_2 for q >= 2",
}


def describe_derivation(estimate: OrderEstimate) -> str:
    """Render the justification chain of an estimate, one tag per line."""
    head = (f"{estimate.case_id.value} [{estimate.regime.value}] "
            f"value={estimate.value:.17g}")
    lines = [head]
    for tag in estimate.trace:
        lines.append(f"  {tag}: {_TAG_TEXT[tag]}")
    return "\n".join(lines)
