"""Convex-geometric machinery: bodies, cones, polars, nets, crossings."""

from .bodies import (
    BOUNDARY_BAND,
    NET_POINT_CAP,
    Ball,
    Box,
    ConvexBody,
    Halfspace,
    VPolytope,
    as_vector,
    boundary_crossing,
    crossing_modulus,
    epsilon_net,
    intersect_net,
)
from .cones import (
    DIMENSION_CAP,
    ClippedCone,
    FiniteCone,
    PolarCone,
    PricePolytope,
    cone_distance,
    cone_project,
    polar,
    price_polytope,
    support_sup,
)

__all__ = [
    "BOUNDARY_BAND",
    "NET_POINT_CAP",
    "DIMENSION_CAP",
    "Ball",
    "Box",
    "ConvexBody",
    "ClippedCone",
    "FiniteCone",
    "Halfspace",
    "PolarCone",
    "PricePolytope",
    "VPolytope",
    "as_vector",
    "boundary_crossing",
    "cone_distance",
    "cone_project",
    "crossing_modulus",
    "epsilon_net",
    "intersect_net",
    "polar",
    "price_polytope",
    "support_sup",
]
