"""Compact convex bodies, halfspaces, epsilon-nets, and the boundary-crossing map.

Every region here exposes the same small surface: a membership test with a
tolerance band, a 1-Lipschitz retraction onto itself (``project``), an interior
margin, and a bounding box.  Nets, intersection nets, and boundary crossings
are built exclusively from that surface, so they work uniformly across kinds.
"""

import math

import numpy as np

from ..errors import GeometryError
from ._wolfe import project_onto_hull

BOUNDARY_BAND = 1e-9
SEGMENT_TOL = 1e-10
NET_POINT_CAP = 2_000_000


def as_vector(x, dim=None):
    """Coerce to a finite 1-D float array, optionally checking its length."""
    v = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise GeometryError("vector has non-finite entries")
    if dim is not None and v.size != dim:
        raise GeometryError(f"expected vector of length {dim}, got {v.size}")
    return v


class ConvexBody:
    """Base for the three compact convex consumption-set kinds.

    Subclasses fill in ``kind`` plus the geometric primitives.  All carry a
    certified interior point with an inner radius, and an outer radius bound
    on distances from the origin.
    """

    kind = None

    def __init__(self, interior_point, inner_radius, outer_radius):
        self.interior_point = interior_point
        self.inner_radius = float(inner_radius)
        self.outer_radius = float(outer_radius)
        self.dim = interior_point.size
        if self.inner_radius <= 0:
            raise GeometryError("interior point is not strictly inside the body")

    # -- primitives supplied per kind ------------------------------------
    def contains(self, x, band=BOUNDARY_BAND):
        raise NotImplementedError

    def contains_many(self, X, band=BOUNDARY_BAND):
        return np.array([self.contains(row, band) for row in np.atleast_2d(X)])

    def project(self, x):
        raise NotImplementedError

    def project_many(self, X):
        return np.array([self.project(row) for row in np.atleast_2d(X)])

    def interior_margin(self, x):
        """Distance from x to the complement; negative when outside."""
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def max_distance_from(self, point):
        raise NotImplementedError

    # -- shared ------------------------------------------------------------
    def distance(self, x):
        return float(np.linalg.norm(as_vector(x, self.dim) - self.project(x)))

    def support_min(self, p):
        """min p.x over the body (exact per kind)."""
        raise NotImplementedError

    def support_argmin(self, p):
        """A minimizer of p.x over the body (deterministic)."""
        raise NotImplementedError


class Box(ConvexBody):
    """Axis-aligned product of intervals."""

    kind = "box"

    def __init__(self, bounds, interior_point=None, inner_radius=None, outer_radius=None):
        self.bounds = np.asarray(bounds, dtype=float)
        if self.bounds.ndim != 2 or self.bounds.shape[1] != 2:
            raise GeometryError("box bounds must be an (N, 2) array")
        self.lo = self.bounds[:, 0].copy()
        self.hi = self.bounds[:, 1].copy()
        if np.any(self.hi <= self.lo):
            raise GeometryError("box has empty interior")
        ip = as_vector(interior_point, self.lo.size) if interior_point is not None \
            else 0.5 * (self.lo + self.hi)
        margin = float(min(np.min(ip - self.lo), np.min(self.hi - ip)))
        r = float(inner_radius) if inner_radius is not None else margin
        if r > margin + BOUNDARY_BAND:
            raise GeometryError("inner radius not certified by the box bounds")
        corners = self._corners()
        R_needed = float(np.max(np.linalg.norm(corners, axis=1)))
        R = float(outer_radius) if outer_radius is not None else R_needed
        if R < R_needed - BOUNDARY_BAND:
            raise GeometryError("outer radius smaller than the farthest corner")
        super().__init__(ip, r, R)

    def _corners(self):
        n = self.lo.size
        grids = np.meshgrid(*[[self.lo[i], self.hi[i]] for i in range(n)], indexing="ij")
        return np.stack(grids, axis=-1).reshape(-1, n)

    def contains(self, x, band=BOUNDARY_BAND):
        x = as_vector(x, self.dim)
        return bool(np.all(x >= self.lo - band) and np.all(x <= self.hi + band))

    def contains_many(self, X, band=BOUNDARY_BAND):
        X = np.atleast_2d(X)
        return np.all((X >= self.lo - band) & (X <= self.hi + band), axis=1)

    def project(self, x):
        return np.clip(as_vector(x, self.dim), self.lo, self.hi)

    def project_many(self, X):
        return np.clip(np.atleast_2d(X), self.lo, self.hi)

    def interior_margin(self, x):
        x = as_vector(x, self.dim)
        return float(min(np.min(x - self.lo), np.min(self.hi - x)))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def max_distance_from(self, point):
        point = as_vector(point, self.dim)
        far = np.where(np.abs(self.lo - point) > np.abs(self.hi - point), self.lo, self.hi)
        return float(np.linalg.norm(far - point))

    def support_min(self, p):
        p = as_vector(p, self.dim)
        return float(np.sum(np.where(p > 0, p * self.lo, p * self.hi)))

    def support_argmin(self, p):
        p = as_vector(p, self.dim)
        return np.where(p > 0, self.lo, self.hi).astype(float)


class Ball(ConvexBody):
    """Euclidean ball."""

    kind = "ball"

    def __init__(self, center, radius, interior_point=None, inner_radius=None, outer_radius=None):
        self.center = as_vector(center)
        self.radius = float(radius)
        if self.radius <= 0:
            raise GeometryError("ball radius must be positive")
        ip = as_vector(interior_point, self.center.size) if interior_point is not None \
            else self.center.copy()
        margin = self.radius - float(np.linalg.norm(ip - self.center))
        r = float(inner_radius) if inner_radius is not None else margin
        if r > margin + BOUNDARY_BAND:
            raise GeometryError("inner radius not certified by the ball")
        R_needed = float(np.linalg.norm(self.center)) + self.radius
        R = float(outer_radius) if outer_radius is not None else R_needed
        if R < R_needed - BOUNDARY_BAND:
            raise GeometryError("outer radius smaller than the ball's reach")
        super().__init__(ip, r, R)

    def contains(self, x, band=BOUNDARY_BAND):
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self.center)) <= self.radius + band

    def contains_many(self, X, band=BOUNDARY_BAND):
        X = np.atleast_2d(X)
        return np.linalg.norm(X - self.center, axis=1) <= self.radius + band

    def project(self, x):
        x = as_vector(x, self.dim)
        d = x - self.center
        nrm = float(np.linalg.norm(d))
        if nrm <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / nrm)

    def project_many(self, X):
        X = np.atleast_2d(X)
        D = X - self.center
        nrm = np.linalg.norm(D, axis=1)
        scale = np.where(nrm > self.radius, self.radius / np.maximum(nrm, 1e-300), 1.0)
        return self.center + D * scale[:, None]

    def interior_margin(self, x):
        x = as_vector(x, self.dim)
        return self.radius - float(np.linalg.norm(x - self.center))

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def max_distance_from(self, point):
        point = as_vector(point, self.dim)
        return float(np.linalg.norm(self.center - point)) + self.radius

    def support_min(self, p):
        p = as_vector(p, self.dim)
        return float(p @ self.center) - float(np.linalg.norm(p)) * self.radius

    def support_argmin(self, p):
        p = as_vector(p, self.dim)
        nrm = float(np.linalg.norm(p))
        if nrm == 0:
            return self.center.copy()
        return self.center - self.radius * p / nrm


class VPolytope(ConvexBody):
    """Convex hull of an explicit vertex list (full-dimensional)."""

    kind = "vpolytope"

    def __init__(self, vertices, interior_point=None, inner_radius=None, outer_radius=None):
        self.vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        n = self.vertices.shape[1]
        if self.vertices.shape[0] < n + 1:
            raise GeometryError("vpolytope needs at least N+1 vertices")
        from scipy.spatial import ConvexHull

        try:
            hull = ConvexHull(self.vertices)
        except Exception as exc:
            raise GeometryError(f"vpolytope is degenerate: {exc}") from exc
        # qhull equations: normal . x + offset <= 0, normals unit length
        self._normals = hull.equations[:, :n]
        self._offsets = hull.equations[:, n]

        ip = as_vector(interior_point, n) if interior_point is not None \
            else self.vertices.mean(axis=0)
        margin = float(np.min(-(self._normals @ ip + self._offsets)))
        r = float(inner_radius) if inner_radius is not None else margin
        if r > margin + BOUNDARY_BAND:
            raise GeometryError("inner radius not certified by the facets")
        R_needed = float(np.max(np.linalg.norm(self.vertices, axis=1)))
        R = float(outer_radius) if outer_radius is not None else R_needed
        if R < R_needed - BOUNDARY_BAND:
            raise GeometryError("outer radius smaller than the farthest vertex")
        super().__init__(ip, r, R)

    def contains(self, x, band=BOUNDARY_BAND):
        x = as_vector(x, self.dim)
        return bool(np.max(self._normals @ x + self._offsets) <= band)

    def contains_many(self, X, band=BOUNDARY_BAND):
        X = np.atleast_2d(X)
        return np.max(X @ self._normals.T + self._offsets, axis=1) <= band

    def project(self, x):
        x = as_vector(x, self.dim)
        if self.contains(x, band=0.0):
            return x.copy()
        return project_onto_hull(self.vertices, x)

    def project_many(self, X):
        X = np.atleast_2d(X)
        out = X.copy()
        inside = self.contains_many(X, band=0.0)
        for i in np.flatnonzero(~inside):
            out[i] = project_onto_hull(self.vertices, X[i])
        return out

    def interior_margin(self, x):
        x = as_vector(x, self.dim)
        return float(np.min(-(self._normals @ x + self._offsets)))

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def max_distance_from(self, point):
        point = as_vector(point, self.dim)
        return float(np.max(np.linalg.norm(self.vertices - point, axis=1)))

    def support_min(self, p):
        p = as_vector(p, self.dim)
        return float(np.min(self.vertices @ p))

    def support_argmin(self, p):
        p = as_vector(p, self.dim)
        vals = self.vertices @ p
        best = vals <= np.min(vals) + 1e-12 * max(1.0, float(np.max(np.abs(vals))))
        cands = self.vertices[best]
        return cands[np.lexsort(cands.T[::-1])][0].copy()


class Halfspace:
    """Region {x : normal . x <= offset}; used for budget constraints."""

    kind = "halfspace"

    def __init__(self, normal, offset=0.0):
        self.normal = as_vector(normal)
        self.norm = float(np.linalg.norm(self.normal))
        if self.norm <= 0:
            raise GeometryError("halfspace normal must be nonzero")
        self.offset = float(offset)
        self.dim = self.normal.size

    def contains(self, x, band=BOUNDARY_BAND):
        x = as_vector(x, self.dim)
        return float(self.normal @ x) <= self.offset + band * self.norm

    def contains_many(self, X, band=BOUNDARY_BAND):
        X = np.atleast_2d(X)
        return X @ self.normal <= self.offset + band * self.norm

    def project(self, x):
        x = as_vector(x, self.dim)
        excess = float(self.normal @ x) - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / self.norm**2) * self.normal

    def project_many(self, X):
        X = np.atleast_2d(X)
        excess = np.maximum(X @ self.normal - self.offset, 0.0)
        return X - np.outer(excess / self.norm**2, self.normal)

    def interior_margin(self, x):
        x = as_vector(x, self.dim)
        return (self.offset - float(self.normal @ x)) / self.norm

    def bounding_box(self):
        raise GeometryError("halfspace is unbounded; supply an explicit window")


def crossing_modulus(outer_radius, inner_radius, delta):
    """Worst-case displacement of the boundary-crossing map between outer-sphere
    points at distance ``delta``, for a convex body sandwiched between
    ball(center, inner_radius) and ball(0, outer_radius).

    Decreases to 0 with delta.
    """
    R = float(outer_radius)
    r = float(inner_radius)
    delta = float(delta)
    if not (0 < r < R):
        raise GeometryError("modulus domain error: need 0 < inner_radius < outer_radius")
    if not (0 < delta <= 2 * R):
        raise GeometryError("modulus domain error: need 0 < delta <= 2 * outer_radius")
    theta = math.acos(1.0 - delta**2 / (2.0 * R**2))
    beta = math.acos(delta / (2.0 * R))
    alpha = math.asin(r / R)
    return delta * abs(math.sin(beta)) / abs(math.sin(alpha + theta))


def boundary_crossing(region, xi, z, band=BOUNDARY_BAND, segment_tol=SEGMENT_TOL):
    """Intersection of the segment [xi, z] with the region's boundary.

    Returns (point, t) with point = t * xi + (1 - t) * z.  Points already in
    the (closed) region are fixed: (z, 0).  ``xi`` must be strictly interior.
    """
    xi = as_vector(xi)
    z = as_vector(z, xi.size)
    if region.interior_margin(xi) <= band:
        raise GeometryError("no interior witness: xi is not strictly interior")
    if region.contains(z, band):
        return z.copy(), 0.0

    seg_len = float(np.linalg.norm(xi - z))
    t_in, t_out = 1.0, 0.0
    while (t_in - t_out) * seg_len > segment_tol:
        mid = 0.5 * (t_in + t_out)
        point = mid * xi + (1.0 - mid) * z
        if region.contains(point, band):
            t_in = mid
        else:
            t_out = mid
    return t_in * xi + (1.0 - t_in) * z, t_in


def _axis_grid(lo, hi, pitch):
    counts = [max(2, int(math.ceil((h - l) / pitch)) + 1) if h > l else 1
              for l, h in zip(lo, hi)]
    axes = [np.linspace(l, h, c) for l, h, c in zip(lo, hi, counts)]
    return axes, int(np.prod([len(a) for a in axes]))


def _product_grid(axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, len(axes))


def _dedupe(points):
    points = np.atleast_2d(points)
    _, idx = np.unique(np.round(points, 9), axis=0, return_index=True)
    return points[np.sort(idx)]


def _batch_crossing(region, xi, Z, segment_tol=SEGMENT_TOL, band=BOUNDARY_BAND):
    """Boundary crossings of [xi, z] for many z at once (all z outside)."""
    Z = np.atleast_2d(Z)
    t_in = np.ones(Z.shape[0])
    t_out = np.zeros(Z.shape[0])
    seg_len = np.linalg.norm(Z - xi, axis=1)
    for _ in range(64):
        if float(np.max((t_in - t_out) * seg_len)) <= segment_tol:
            break
        mid = 0.5 * (t_in + t_out)
        points = mid[:, None] * xi + (1.0 - mid)[:, None] * Z
        inside = region.contains_many(points, band)
        t_in = np.where(inside, mid, t_in)
        t_out = np.where(inside, t_out, mid)
    return t_in[:, None] * xi + (1.0 - t_in)[:, None] * Z, t_in


def epsilon_net(region, eps, cap=NET_POINT_CAP, within=None, offset=0.0):
    """Finite eps-covering of a region: every region point lies within eps of
    a returned point and every returned point lies in the region.

    ``within`` restricts the candidate window (mandatory for unbounded
    regions); ``offset`` shifts the underlying grid by that fraction of the
    pitch, which yields a different but equally valid net.
    """
    if eps <= 0:
        raise GeometryError("eps must be positive")
    if hasattr(region, "_intrinsic_net") and within is None:
        return region._intrinsic_net(eps, cap=cap, offset=offset)

    lo, hi = within if within is not None else region.bounding_box()
    lo = as_vector(lo)
    hi = as_vector(hi)
    n = lo.size

    ip = getattr(region, "interior_point", None)
    if within is None and ip is not None and hasattr(region, "max_distance_from"):
        if region.max_distance_from(ip) <= 0.999 * eps:
            return np.atleast_2d(np.asarray(ip, dtype=float).copy())

    pitch = 2.0 * 0.999 * eps / math.sqrt(n)
    axes, total = _axis_grid(lo, hi, pitch)
    if total > cap:
        raise GeometryError(
            f"resolution cap exceeded: eps {eps:g} would need {total} grid points")
    if offset:
        shift = (offset % 1.0) * pitch
        axes = [np.clip(a + shift, lo[i], hi[i]) for i, a in enumerate(axes)]

    grid = _product_grid(axes)
    inside = region.contains_many(grid, band=1e-12)
    kept = [grid[inside]]

    # Outside grid points within the covering radius of the region still
    # matter for coverage near the boundary; retract them in.
    rho = pitch * math.sqrt(n) / 2.0
    outside = grid[~inside]
    if outside.size:
        blo, bhi = lo - rho, hi + rho
        near = np.all((outside >= blo) & (outside <= bhi), axis=1)
        candidates = outside[near]
        if candidates.shape[0] and hasattr(region, "distance_lower_bound"):
            candidates = candidates[region.distance_lower_bound(candidates) <= rho + 1e-12]
        if candidates.shape[0]:
            projected = region.project_many(candidates)
            close = np.linalg.norm(projected - candidates, axis=1) <= rho + 1e-12
            kept.append(projected[close])

    points = np.vstack([k for k in kept if k.size])
    if points.size == 0:
        raise GeometryError("epsilon_net produced no points; region may be empty")
    return _dedupe(points)


def intersect_net(X, Y, eps, xi, cap=NET_POINT_CAP, offset=0.0, window=None):
    """Finite eps-covering of X ∩ Y from a net of Y pulled onto X.

    Builds a fine net of Y near X, keeps the points close to X, and maps them
    through the boundary-crossing retraction toward the certified interior
    point ``xi`` of X ∩ Y.  Both the retained points and their images lie in
    X ∩ Y, and the images form an eps-approximation of it (restricted to
    ``window`` when one is supplied).
    """
    if eps <= 0:
        raise GeometryError("eps must be positive")
    xi = as_vector(xi)
    m_x = X.interior_margin(xi)
    m_y = Y.interior_margin(xi)
    if min(m_x, m_y) <= BOUNDARY_BAND:
        raise GeometryError("no interior witness: xi is not interior to X ∩ Y")
    r = min(m_x, m_y)

    lo, hi = X.bounding_box()
    if window is not None:
        lo = np.maximum(lo, as_vector(window[0], lo.size))
        hi = np.minimum(hi, as_vector(window[1], hi.size))
        if np.any(hi < lo):
            raise GeometryError("intersection window is empty")
    window = (lo - eps, hi + eps)
    corners = _product_grid([np.array([window[0][i], window[1][i]])
                             for i in range(lo.size)])
    D = float(np.max(np.linalg.norm(corners - xi, axis=1)))

    delta = min(eps / 4.0, 0.9 * eps / (1.5 + D / r))
    ynet = epsilon_net(Y, delta / 2.0, cap=cap, within=window, offset=offset)

    dists = np.linalg.norm(ynet - X.project_many(ynet), axis=1)
    keep = ynet[dists <= 0.75 * delta]
    if keep.shape[0] == 0:
        raise GeometryError("intersection net is empty; sets may not meet")

    keep_inside = X.contains_many(keep)
    images = [keep[keep_inside]]
    outside = keep[~keep_inside]
    if outside.shape[0]:
        crossed, _ = _batch_crossing(X, xi, outside)
        images.append(crossed)
    return _dedupe(np.vstack([part for part in images if part.size]))
