"""Invariant distances and complex geodesics on unit balls of finite-dimensional
l^p spaces, their direct sums and polydiscs."""

from .disc import (
    MobiusMap,
    artanh,
    circle_mean_laplacian,
    mobius_apply,
    poincare_distance,
    poincare_infinitesimal,
    pseudo_hyperbolic,
    richardson_laplacian,
)
from .errors import (
    ContractError,
    DomainError,
    EvaluationError,
    HolometError,
    InadmissibleParams,
    InvariantViolation,
    NonConvergence,
    PrecisionError,
)
from .family import (
    DirectSumGeodesicParams,
    GeodesicParams,
    boundary_norm_deviation,
    constraint_residuals,
    direct_sum_residuals,
    eval_direct_sum,
    linear_geodesic,
    make_admissible,
    make_admissible_direct_sum,
    polydisc_distance,
)
from .metrics import (
    ConvexityModulus,
    MetricEstimate,
    bracket,
    caratheodory_lower,
    convexity_modulus,
    curvature,
    infinitesimal_lower,
    kobayashi_upper,
    modulus_sweep,
    omega_c,
)
from .solver import NormalizedGeodesic, SolveConfig, distance, solve, solve_tangent, uniqueness_probe
from .spaces import (
    ComplexVector,
    DirectSum,
    DualFunctional,
    Lp,
    dual_norm,
    norm,
    pairing,
    project_head,
    support_functional,
    vector,
)
from .verify import VerificationReport, poisson_positivity_check, schwarz_pick_certificate, verify

__version__ = "0.1.0"

__all__ = [
    "ComplexVector",
    "ContractError",
    "ConvexityModulus",
    "DirectSum",
    "DirectSumGeodesicParams",
    "DomainError",
    "DualFunctional",
    "EvaluationError",
    "GeodesicParams",
    "HolometError",
    "InadmissibleParams",
    "InvariantViolation",
    "Lp",
    "MetricEstimate",
    "MobiusMap",
    "NonConvergence",
    "NormalizedGeodesic",
    "PrecisionError",
    "SolveConfig",
    "VerificationReport",
    "artanh",
    "boundary_norm_deviation",
    "bracket",
    "caratheodory_lower",
    "circle_mean_laplacian",
    "constraint_residuals",
    "convexity_modulus",
    "curvature",
    "direct_sum_residuals",
    "distance",
    "dual_norm",
    "eval_direct_sum",
    "infinitesimal_lower",
    "kobayashi_upper",
    "linear_geodesic",
    "make_admissible",
    "make_admissible_direct_sum",
    "mobius_apply",
    "modulus_sweep",
    "norm",
    "omega_c",
    "pairing",
    "poincare_distance",
    "poincare_infinitesimal",
    "poisson_positivity_check",
    "polydisc_distance",
    "project_head",
    "pseudo_hyperbolic",
    "richardson_laplacian",
    "schwarz_pick_certificate",
    "solve",
    "solve_tangent",
    "support_functional",
    "uniqueness_probe",
    "vector",
    "verify",
]
