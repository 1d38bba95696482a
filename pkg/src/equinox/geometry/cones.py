"""Finitely generated cones, polars, and the normalized price polytope.

The production cone is given by generators; distances to it come from
nonnegative least squares, its facet description from the extreme rays of
the polar, and the price polytope from vertex enumeration of the polar
sliced by the normalizing hyperplane.
"""

import math

import numpy as np

from ..errors import GeometryError
from ._nnls import nnls
from ._rays import cone_rays, polyhedron_vertices
from ._wolfe import project_onto_hull
from .bodies import BOUNDARY_BAND, as_vector, epsilon_net

DIMENSION_CAP = 6
PROJECTION_TOL = 1e-10


class FiniteCone:
    """Closed convex cone generated by finitely many nonzero vectors."""

    def __init__(self, generators):
        G = np.atleast_2d(np.asarray(generators, dtype=float))
        if G.shape[0] == 0:
            raise GeometryError("cone needs at least one generator")
        norms = np.linalg.norm(G, axis=1)
        if np.any(norms <= 1e-12):
            raise GeometryError("cone generators must be nonzero")
        unit = G / norms[:, None]
        for i in range(len(unit)):
            for j in range(i + 1, len(unit)):
                if float(unit[i] @ unit[j]) > 1.0 - 1e-12:
                    raise GeometryError("duplicate cone generators")
        self.generators = G
        self.dim = G.shape[1]
        self._unit = unit
        self._polar_rays = None

    def project(self, x):
        """Nearest cone point (active-set NNLS over the generators)."""
        x = as_vector(x, self.dim)
        lam = nnls(self.generators.T, x, tol=PROJECTION_TOL)
        return self.generators.T @ lam

    def distance(self, x):
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self.project(x)))

    def polar_extreme_rays(self):
        """Unit extreme rays (plus ± lineality directions) of the polar cone."""
        if self._polar_rays is None:
            rays, lin = cone_rays(self._unit)
            pieces = [rays]
            if lin.shape[0]:
                pieces.extend([lin, -lin])
            allr = np.vstack([p for p in pieces if p.size]) if any(p.size for p in pieces) \
                else np.zeros((0, self.dim))
            self._polar_rays = allr
        return self._polar_rays

    def contains(self, x, band=BOUNDARY_BAND):
        x = as_vector(x, self.dim)
        rays = self.polar_extreme_rays()
        if rays.shape[0] == 0:
            return True  # polar is {0}: the cone is the whole space
        return bool(np.max(rays @ x) <= band * max(1.0, float(np.linalg.norm(x))))

    def contains_many(self, X, band=BOUNDARY_BAND):
        X = np.atleast_2d(X)
        rays = self.polar_extreme_rays()
        if rays.shape[0] == 0:
            return np.ones(X.shape[0], dtype=bool)
        scale = np.maximum(1.0, np.linalg.norm(X, axis=1))
        return np.max(X @ rays.T, axis=1) <= band * scale

    def interior_margin(self, x):
        x = as_vector(x, self.dim)
        rays = self.polar_extreme_rays()
        if rays.shape[0] == 0:
            return math.inf
        return float(np.min(-(rays @ x)))


class PolarCone:
    """Polar of a finite cone in H-representation: p with p . g <= 0 per generator."""

    def __init__(self, inequality_normals):
        A = np.atleast_2d(np.asarray(inequality_normals, dtype=float))
        if A.shape[0] == 0:
            raise GeometryError("polar cone needs at least one inequality")
        self.inequality_normals = A
        self.dim = A.shape[1]
        self._unit = A / np.linalg.norm(A, axis=1)[:, None]
        self._rays = None

    def contains(self, p, band=BOUNDARY_BAND):
        p = as_vector(p, self.dim)
        scale = max(1.0, float(np.linalg.norm(p)))
        return bool(np.max(self._unit @ p) <= band * scale)

    def extreme_rays(self):
        """Unit generating rays (± lineality included when present)."""
        if self._rays is None:
            rays, lin = cone_rays(self._unit)
            pieces = [rays]
            if lin.shape[0]:
                pieces.extend([lin, -lin])
            self._rays = np.vstack([p for p in pieces if p.size]) if any(p.size for p in pieces) \
                else np.zeros((0, self.dim))
        return self._rays


def cone_project(cone, x):
    """Nearest point of the cone to x."""
    return cone.project(x)


def cone_distance(cone, x):
    """Distance from x to the cone."""
    return cone.distance(x)


def polar(cone):
    """Polar cone {p : p . g <= 0 for every generator g}."""
    return PolarCone(cone.generators)


class ClippedCone:
    """Cone intersected with a centered ball; bounded stand-in for the cone.

    ``project`` composes the cone projection with the radial clip: a
    1-Lipschitz retraction onto the intersection (not the metric projection).
    """

    kind = "clipped_cone"

    def __init__(self, cone, radius):
        if radius <= 0:
            raise GeometryError("clip radius must be positive")
        self.cone = cone
        self.radius = float(radius)
        self.dim = cone.dim

    def contains(self, x, band=BOUNDARY_BAND):
        x = as_vector(x, self.dim)
        return (float(np.linalg.norm(x)) <= self.radius + band
                and self.cone.contains(x, band))

    def contains_many(self, X, band=BOUNDARY_BAND):
        X = np.atleast_2d(X)
        return (np.linalg.norm(X, axis=1) <= self.radius + band) \
            & self.cone.contains_many(X, band)

    def project(self, x):
        y = self.cone.project(x)
        nrm = float(np.linalg.norm(y))
        if nrm > self.radius:
            y = y * (self.radius / nrm)
        return y

    def project_many(self, X):
        return np.array([self.project(row) for row in np.atleast_2d(X)])

    def distance_lower_bound(self, X):
        """Cheap vectorized lower bound on distances to the clipped cone."""
        X = np.atleast_2d(X)
        lb = np.maximum(np.linalg.norm(X, axis=1) - self.radius, 0.0)
        rays = self.cone.polar_extreme_rays()
        if rays.shape[0]:
            lb = np.maximum(lb, np.max(X @ rays.T, axis=1))
        return lb

    def interior_margin(self, x):
        x = as_vector(x, self.dim)
        return min(self.cone.interior_margin(x),
                   self.radius - float(np.linalg.norm(x)))

    def bounding_box(self):
        return (np.full(self.dim, -self.radius), np.full(self.dim, self.radius))


class PricePolytope:
    """Polar prices normalized against the aggregate interior point.

    Vertex representation of {p : p . g <= 0 for all generators, p . xi = -1},
    together with the norm bound -1/M derived from the polar's extreme rays.
    """

    def __init__(self, vertices, normalizer, cone, norm_bound, tol=1e-7):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        self.vertices = V[np.lexsort(V.T[::-1])]
        self.normalizer = as_vector(normalizer)
        self.cone = cone
        self.norm_bound = float(norm_bound)
        self.dim = self.normalizer.size

        unit = cone.generators / np.linalg.norm(cone.generators, axis=1)[:, None]
        for v in self.vertices:
            if np.max(unit @ v) > tol:
                raise GeometryError("price vertex violates a polar inequality")
            if abs(float(v @ self.normalizer) + 1.0) > tol * max(1.0, np.linalg.norm(v)):
                raise GeometryError("price vertex violates the normalization")
            if np.linalg.norm(v) > self.norm_bound + tol:
                raise GeometryError("price vertex exceeds the norm bound")

        self._unit_gens = unit
        # Isometric affine chart for the (generally lower-dimensional) polytope.
        center = self.vertices.mean(axis=0)
        diffs = self.vertices - center
        _, sv, Vt = np.linalg.svd(diffs, full_matrices=False)
        scale = float(sv[0]) if sv.size else 1.0
        rank = int(np.sum(sv > 1e-10 * max(1.0, scale)))
        self._chart_center = center
        self._chart_basis = Vt[:rank].T  # dim x rank
        self._coords = diffs @ self._chart_basis

    # -- membership ------------------------------------------------------
    def contains(self, p, band=1e-7):
        p = as_vector(p, self.dim)
        scale = max(1.0, float(np.linalg.norm(p)))
        if np.max(self._unit_gens @ p) > band * scale:
            return False
        return abs(float(p @ self.normalizer) + 1.0) <= band * scale

    def project(self, p):
        return project_onto_hull(self.vertices, as_vector(p, self.dim))

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def max_norm(self):
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def centroid(self):
        return self.vertices.mean(axis=0)

    # -- nets --------------------------------------------------------------
    def affine_dim(self):
        return self._chart_basis.shape[1]

    def to_chart(self, p):
        return (as_vector(p, self.dim) - self._chart_center) @ self._chart_basis

    def from_chart(self, u):
        return self._chart_center + self._chart_basis @ np.asarray(u, dtype=float)

    def _intrinsic_net(self, eps, cap=2_000_000, offset=0.0):
        """eps-net built in the polytope's own affine chart (isometric)."""
        d = self.affine_dim()
        if d == 0:
            return self.vertices[:1].copy()
        U = self._coords
        lo, hi = U.min(axis=0), U.max(axis=0)
        pitch = 2.0 * 0.999 * eps / math.sqrt(d)
        counts = [max(2, int(math.ceil((h - l) / pitch)) + 1) for l, h in zip(lo, hi)]
        total = int(np.prod(counts))
        if total > cap:
            raise GeometryError(
                f"resolution cap exceeded: eps {eps:g} would need {total} grid points")
        axes = [np.linspace(l, h, c) for l, h, c in zip(lo, hi, counts)]
        if offset:
            shift = (offset % 1.0) * pitch
            axes = [np.clip(a + shift, lo[i], hi[i]) for i, a in enumerate(axes)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack(mesh, axis=-1).reshape(-1, d)

        if d == 1:
            clipped = np.clip(grid[:, 0], lo[0], hi[0])
            # 1-D chart: the polytope is the segment [lo, hi] itself.
            pts = np.unique(clipped)
            return np.array([self.from_chart([u]) for u in pts])

        from scipy.spatial import ConvexHull

        hull = ConvexHull(U)
        A, b = hull.equations[:, :d], hull.equations[:, d]
        inside = np.max(grid @ A.T + b, axis=1) <= 1e-12
        members = grid[inside]
        outside = grid[~inside]
        rho = pitch * math.sqrt(d) / 2.0
        shell = outside[np.max(outside @ A.T + b, axis=1) <= rho]
        projected = [project_onto_hull(U, g) for g in shell]
        pool = np.vstack([members] + ([np.array(projected)] if projected else []))
        seen = {}
        for u in pool:
            key = tuple(np.round(u, 9))
            if key not in seen:
                seen[key] = u
        return np.array([self.from_chart(u) for u in seen.values()])


def price_polytope(cone, xi_bar, tol=1e-9, dimension_cap=DIMENSION_CAP):
    """Vertex-enumerated price polytope for a production cone and normalizer.

    Raises "P unbounded" when the slice fails to be a nonempty bounded
    polytope, which happens exactly when xi_bar is not interior to the cone.
    """
    xi_bar = as_vector(xi_bar, cone.dim)
    if cone.dim > dimension_cap:
        raise GeometryError(f"dimension cap exceeded: N={cone.dim} > {dimension_cap}")

    unit = cone.generators / np.linalg.norm(cone.generators, axis=1)[:, None]
    vertices, recession = polyhedron_vertices(
        unit, np.zeros(len(unit)), np.atleast_2d(xi_bar), np.array([-1.0]), tol=tol)
    if recession.shape[0] > 0 or vertices.shape[0] == 0:
        raise GeometryError("P unbounded: normalizer is not interior to the cone")

    rays = polar(cone).extreme_rays()
    if rays.shape[0] == 0:
        raise GeometryError("P unbounded: polar cone is trivial")
    M = float(np.max(rays @ xi_bar))
    if M >= 0:
        raise GeometryError("P unbounded: normalizer is not interior to the cone")
    return PricePolytope(vertices, xi_bar, cone, norm_bound=-1.0 / M)


def support_sup(polytope_or_points, y):
    """Max of p . y over the polytope's vertices (or an explicit point list)."""
    if isinstance(polytope_or_points, PricePolytope):
        points = polytope_or_points.vertices
    else:
        points = np.atleast_2d(np.asarray(polytope_or_points, dtype=float))
    y = as_vector(y, points.shape[1])
    return float(np.max(points @ y))
