"""Approximate competitive equilibria of conical economies.

Consumers carry strongly concave quadratic preferences on compact convex
sets; production is a finitely generated cone.  The solver normalizes prices
on a polytope cut from the polar cone, drives them through demand and a
boundary-crossing map, and certifies a price whose aggregate profit loss is
below any requested epsilon.
"""

from .equilibrium import (
    ApproximateEquilibrium,
    CheckReport,
    Economy,
    ValidationReport,
    check_equilibrium,
    interior_point,
    refine_sequence,
    solve,
    validate_economy,
    verify_certificate,
)
from .errors import (
    EquilibriumError,
    EquinoxError,
    FixedPointError,
    GeometryError,
    PreferenceError,
    SchemaError,
)
from .fixed_point import (
    GrMap,
    SimplicialSearchState,
    WeakApproximabilityReport,
    approximate_zero,
    build_gr_map,
    g_r_membership,
    g_r_select,
    kakutani_fixed_point,
    weak_approximability_check,
)
from .geometry import (
    Ball,
    Box,
    ClippedCone,
    ConvexBody,
    FiniteCone,
    Halfspace,
    PolarCone,
    PricePolytope,
    VPolytope,
    boundary_crossing,
    cone_distance,
    cone_project,
    crossing_modulus,
    epsilon_net,
    intersect_net,
    polar,
    price_polytope,
    support_sup,
)
from .preferences import (
    BudgetContext,
    Comparison,
    Preference,
    RotundityModulus,
    aggregate_demand,
    budget_context,
    demand,
    prefers,
    rotundity_delta,
)

__version__ = "0.1.0"
