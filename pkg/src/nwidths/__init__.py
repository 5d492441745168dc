"""Desk-scale laboratory for Kolmogorov n-widths of lp-ball intersections.

Subpackages/modules:

* `exponents`     parameter algebra (reciprocals, interpolation weights,
                  regime boundaries, the nu <-> k correspondence)
* `order_engine`  constant-free closed-form width estimates with
                  case/regime dispatch and derivation traces
* `bodies`        geometry oracles (norms, gauges, supports, vertex
                  enumeration) and inclusion certificates
* `widths`        numeric upper/lower width bounds (subspace search,
                  averaging/PCA lower bounds, norm transfer)
* `cli`           the `nwidths` command-line front end
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bodies import (
    Ball,
    CertReport,
    Intersection,
    ScaledCube,
    VkPolytope,
    cert_cube,
    cert_interpolation,
    cert_vkl,
    gauge,
    hull_gauge,
    lp_norm,
    support,
    vk_vertices,
)
from .exponents import (
    Exponent,
    INF,
    ProblemParams,
    as_exponent,
    effective_k,
    interpolation_lambda,
    k_from_nu,
    lambda_pq,
    reciprocal,
    regime_boundary,
)
from .order_engine import (
    Case,
    OrderEstimate,
    Regime,
    boundary_mismatch,
    describe_derivation,
    order_ball,
    order_intersection,
    order_intersection_from_nu,
    width_exact,
)
from .widths import (
    SearchConfig,
    Subspace,
    WidthBounds,
    deviation,
    dist_to_subspace,
    pca_lower_l2,
    transfer_lower,
    width_bounds,
    width_upper,
)

__version__ = "0.1.0"
