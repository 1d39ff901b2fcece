"""Positive-invariance verification for convex sets under continuous dynamics.

The package decides whether a polyhedron, polytope, polyhedral cone,
ellipsoid, or quadratic (ice-cream) cone is positively invariant for a
linear system, and probes general nonlinear fields by boundary sampling and
trajectory falsification.
"""

from .checkers import (
    Certificate,
    Counterexample,
    Decision,
    Verdict,
    check,
    check_ellipsoid_linear,
    check_hpoly_linear,
    check_lorenz_linear,
    check_nonlinear_sampled,
    check_orthant_linear,
    check_vcone,
    check_vpolytope,
)
from .dynamics import Trajectory, expm, falsify, integrate, integrate_exact
from .expressions import build_expression_system, parse_formula
from .numerics import (
    DEFAULT_TOLS,
    EigenResult,
    Tolerances,
    gen_eig_max,
    minimize_scalar_convex,
    solve_linear,
    sym_eig,
)
from .sets import (
    BoundaryPoint,
    Ellipsoid,
    HPolyhedron,
    LorenzCone,
    Membership,
    VCone,
    VPolytope,
    active_constraints,
    membership,
    orthant_h,
    orthant_v,
    sample_boundary,
)
from .solvers import (
    LPFeasibilityProblem,
    OptResult,
    QPProblem,
    kkt_residuals,
    lp_dual_check,
    lp_feasible,
    qp_nearest,
)
from .systems import DynamicalSystem, GeneralSystem, LinearSystem
from .tangent import (
    TangentCone,
    cone_contains,
    tangent_cone_at,
    tangent_h,
    tangent_polytope,
    tangent_quadratic,
    tangent_vcone,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint", "Certificate", "Counterexample", "Decision",
    "DEFAULT_TOLS", "DynamicalSystem", "EigenResult", "Ellipsoid",
    "GeneralSystem", "HPolyhedron", "LPFeasibilityProblem", "LinearSystem",
    "LorenzCone", "Membership", "OptResult", "QPProblem", "TangentCone",
    "Tolerances", "Trajectory", "VCone", "VPolytope", "Verdict",
    "active_constraints", "build_expression_system", "check",
    "check_ellipsoid_linear", "check_hpoly_linear", "check_lorenz_linear",
    "check_nonlinear_sampled", "check_orthant_linear", "check_vcone",
    "check_vpolytope", "cone_contains", "expm", "falsify", "gen_eig_max",
    "integrate", "integrate_exact", "kkt_residuals", "lp_dual_check",
    "lp_feasible", "membership", "minimize_scalar_convex", "orthant_h",
    "orthant_v", "parse_formula", "qp_nearest", "sample_boundary",
    "solve_linear", "sym_eig", "tangent_cone_at", "tangent_h",
    "tangent_polytope", "tangent_quadratic", "tangent_vcone",
]
