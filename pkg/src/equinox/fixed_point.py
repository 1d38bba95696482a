"""Approximate-zero search, the profit-tolerance price maps, and the
simplicial fixed-point search over the price polytope.

The set-valued map at tolerance r assigns to each production boundary point z
the prices p with p . z > -r.  A single-valued selection (argmax of p . z over
a fine net of the polytope) drives a Scarf-style vector-labeling search; a
point is only ever returned after it passes the caller's membership test.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import FixedPointError
from .geometry import ClippedCone, as_vector, boundary_crossing, epsilon_net
from .geometry.bodies import GeometryError

logger = logging.getLogger(__name__)


def approximate_zero(f, eps, modulus=None):
    """A point x in [0, 1] with |f(x)| <= eps, for f bracketing zero.

    ``modulus`` is the grid count n such that |s - t| <= 1/n implies
    |f(s) - f(t)| < eps/2; when omitted it is estimated from a fine sample
    of f (logged as heuristic).
    """
    if eps <= 0:
        raise FixedPointError("eps must be positive")
    f0, f1 = float(f(0.0)), float(f(1.0))
    if not (f0 <= -eps / 2.0 and f1 >= eps / 2.0):
        raise FixedPointError(
            f"bracket invalid: need f(0) <= -eps/2 and f(1) >= eps/2, got {f0:g}, {f1:g}")

    if modulus is None:
        probe = np.linspace(0.0, 1.0, 100_001)
        values = _evaluate(f, probe)
        lipschitz = float(np.max(np.abs(np.diff(values)))) / (probe[1] - probe[0])
        modulus = int(math.ceil(2.0 * lipschitz / eps)) + 1
        logger.info("approximate_zero: heuristic modulus n=%d from sampled slope %.3g",
                    modulus, lipschitz)
    n = max(int(modulus), 2)

    grid = np.linspace(0.0, 1.0, n + 1)
    values = _evaluate(f, grid)
    best = int(np.argmin(np.abs(values)))
    if abs(values[best]) > eps:
        raise FixedPointError("no approximate zero found; the modulus looks invalid")
    return float(grid[best])


def _evaluate(f, xs):
    try:
        values = np.asarray(f(xs), dtype=float)
        if values.shape == xs.shape:
            return values
    except Exception:
        pass
    return np.array([float(f(x)) for x in xs])


@dataclass(eq=False)
class GrMap:
    """Price polytope, a fine net of it, and the profit-loss tolerance r."""

    polytope: object
    net: np.ndarray
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise FixedPointError("r must be positive")
        self.net = np.atleast_2d(np.asarray(self.net, dtype=float))
        for q in self.net[:: max(1, len(self.net) // 64)]:
            if not self.polytope.contains(q, 1e-6):
                raise FixedPointError("net point lies outside the price polytope")


def build_gr_map(polytope, r, z_norm_bound, cap=400_000):
    """GrMap whose net pitch meets the selection guarantee r / (2 max ||z||)."""
    eps = r / (2.0 * max(1.0, float(z_norm_bound)))
    for _ in range(24):
        try:
            net = epsilon_net(polytope, eps, cap=cap)
            break
        except GeometryError:
            eps *= 2.0
    else:
        raise FixedPointError("could not build a price net within the point cap")
    return GrMap(polytope=polytope, net=net, r=r)


def _lexicographic_best(points):
    points = np.atleast_2d(points)
    return points[np.lexsort(points.T[::-1])][0].copy()


def g_r_select(gr_map, z, strict=True):
    """Argmax of p . z over the net, tie-broken lexicographically.

    With ``strict`` (the default), raises "g_r empty at resolution" when even
    the best net price violates p . z > -r; ``strict=False`` returns the
    argmax regardless, leaving acceptance to the caller's membership test.
    """
    z = as_vector(z, gr_map.net.shape[1])
    values = gr_map.net @ z
    best = float(np.max(values))
    if strict and best <= -gr_map.r:
        raise FixedPointError("g_r empty at resolution: best net price has p.z <= -r")
    scale = max(1.0, float(np.max(np.abs(values))))
    ties = gr_map.net[values >= best - 1e-12 * scale]
    return _lexicographic_best(ties)


def g_r_membership(gr_map, z, p):
    """True iff p . z > -r; p must lie in the price polytope."""
    p = as_vector(p, gr_map.net.shape[1])
    if not gr_map.polytope.contains(p, 1e-7):
        raise FixedPointError("not a price: point lies outside the polytope")
    return float(p @ as_vector(z, p.size)) > -gr_map.r


@dataclass
class WeakApproximabilityReport:
    samples: int
    evaluated: int
    counterexamples: int
    worst_value: float
    delta: float
    r: float
    skipped: int = 0


def weak_approximability_check(gr_map, samples, seed, delta_scale=1.0,
                               tol=1e-9, working_radius=None):
    """Sample nearby production-boundary pairs and verify that convex
    interpolants of half-tolerance selections keep p_t . z_t > -r - tol.

    With ``delta_scale`` = 1 the pair gap respects the uniform-continuity
    bound and no counterexamples are expected; larger scales deliberately
    violate it and simply count whatever failures appear.
    """
    polytope = gr_map.polytope
    cone = polytope.cone
    xi = polytope.normalizer
    r = gr_map.r
    if working_radius is None:
        working_radius = 2.0 * float(np.linalg.norm(xi)) + 2.0
    region = ClippedCone(cone, working_radius)
    if region.interior_margin(xi) <= 0:
        raise FixedPointError("normalizer is not interior to the clipped cone")

    half = GrMap(polytope=polytope, net=gr_map.net, r=r / 2.0)
    delta_base = (r / 2.0) / polytope.max_norm()
    delta = delta_base * delta_scale
    reach = 2.0 * (working_radius + float(np.linalg.norm(xi)) + 1.0)

    rng = np.random.default_rng(seed)
    evaluated = counterexamples = skipped = 0
    worst = math.inf
    for _ in range(samples):
        u = _outward_direction(cone, xi, reach, rng)
        if u is None:
            skipped += 1
            continue
        z, _ = boundary_crossing(region, xi, xi + reach * u)
        if cone.interior_margin(z) > 1e-7:
            skipped += 1  # crossing hit the clip sphere inside the cone
            continue
        noise = rng.normal(size=cone.dim)
        z2 = _nearby_boundary_point(region, xi, u, noise, reach, z,
                                    delta, want_far=delta_scale > 1.0)
        if z2 is None:
            skipped += 1
            continue
        try:
            p = g_r_select(half, z)
            p2 = g_r_select(half, z2)
        except FixedPointError:
            skipped += 1
            continue
        low = _min_bilinear_over_segment(p, p2, z, z2)
        evaluated += 1
        worst = min(worst, low)
        if low <= -r - tol:
            counterexamples += 1
    return WeakApproximabilityReport(samples=samples, evaluated=evaluated,
                                     counterexamples=counterexamples,
                                     worst_value=worst, delta=delta, r=r,
                                     skipped=skipped)


def _outward_direction(cone, xi, reach, rng, tries=64):
    """Unit direction whose far point from xi leaves the cone."""
    for _ in range(tries):
        u = rng.normal(size=cone.dim)
        u /= np.linalg.norm(u)
        if not cone.contains(xi + reach * u):
            return u
    return None


def _nearby_boundary_point(region, xi, u, noise, reach, z, delta, want_far):
    """Second boundary point at controlled distance from z."""
    tau = 0.5 if want_far else 0.05
    lo_gap = 0.5 * delta if want_far else 0.0
    for _ in range(80):
        v = u + tau * noise
        v /= np.linalg.norm(v)
        z2, _ = boundary_crossing(region, xi, xi + reach * v)
        gap = float(np.linalg.norm(z2 - z))
        if lo_gap < gap < delta:
            return z2
        tau *= 0.5 if gap >= delta else 1.5
    return None


def _min_bilinear_over_segment(p, p2, z, z2):
    """min over t in [0,1] of (t p + (1-t) p2) . (t z + (1-t) z2)."""
    a = float((p - p2) @ (z - z2))
    b = float(p @ z2 + p2 @ z - 2.0 * (p2 @ z2))
    c = float(p2 @ z2)
    values = [c, a + b + c]
    if a > 0:
        t = -b / (2.0 * a)
        if 0.0 < t < 1.0:
            values.append(a * t * t + b * t + c)
    return min(values)


@dataclass
class SimplicialSearchState:
    """Snapshot of one refinement round of the simplicial search."""

    simplices: list
    labels: dict = field(default_factory=dict)
    resolution: float = math.inf


def _min_linf_combination(labels):
    """Convex weights minimizing the sup-norm of the combined displacement."""
    L = np.atleast_2d(labels)
    s, n = L.shape
    c = np.zeros(s + 1)
    c[s] = 1.0
    rows = []
    for j in range(n):
        rows.append(np.append(L[:, j], -1.0))
        rows.append(np.append(-L[:, j], -1.0))
    A_ub = np.array(rows)
    b_ub = np.zeros(2 * n)
    A_eq = np.zeros((1, s + 1))
    A_eq[0, :s] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * s + [(0, None)], method="highs")
    if not res.success:
        return math.inf, np.full(s, 1.0 / s)
    return float(res.x[s]), res.x[:s]


def _barycentric_subdivide(simplex):
    """All chains-of-faces children of a simplex given by its vertex rows."""
    k = simplex.shape[0]
    children = []
    for perm in itertools.permutations(range(k)):
        chain = np.cumsum(simplex[list(perm)], axis=0) \
            / np.arange(1, k + 1, dtype=float)[:, None]
        children.append(chain)
    return children


def _simplex_diameter(simplex):
    diffs = simplex[:, None, :] - simplex[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=-1)))


def kakutani_fixed_point(selection, membership_test, polytope, r, max_refine=12,
                         score=None, simplex_budget=2048):
    """A polytope point passing ``membership_test``, found by probing plus a
    Scarf-style simplicial search on the selection's displacement labels.

    The returned point is always verified: membership_test(result) is true.
    Raises "no fixed point at resolution" after ``max_refine`` refinements.
    """
    if r <= 0:
        raise FixedPointError("r must be positive")
    centroid = polytope.centroid()
    tested = set()
    sel_cache = {}

    def _key(p):
        return tuple(np.round(np.asarray(p, dtype=float), 12))

    def _try(p):
        p = np.asarray(p, dtype=float)
        k = _key(p)
        if k in tested:
            return None
        tested.add(k)
        return p if membership_test(p) else None

    def _sel(p):
        k = _key(p)
        if k not in sel_cache:
            sel_cache[k] = np.asarray(selection(p), dtype=float)
        return sel_cache[k]

    # Cheap probes first: the centroid, the vertices, then short orbits of
    # the selection started from each.
    probes = [centroid, *polytope.vertices]
    for start in probes:
        found = _try(start)
        if found is not None:
            return found
    for start in probes:
        p = np.asarray(start, dtype=float)
        for _ in range(12):
            p_next = _sel(p)
            found = _try(p_next)
            if found is not None:
                return found
            if float(np.linalg.norm(p_next - p)) <= 1e-12:
                break
            p = p_next

    d = polytope.affine_dim()
    if d == 0:
        raise FixedPointError("no fixed point at resolution")

    coords = np.array([polytope.to_chart(v) for v in polytope.vertices])
    c0 = polytope.to_chart(centroid)
    if d == 1:
        lo, hi = float(np.min(coords)), float(np.max(coords))
        simplices = [np.array([[c0[0]], [lo]]), np.array([[c0[0]], [hi]])]
    else:
        from scipy.spatial import ConvexHull

        hull = ConvexHull(coords)
        simplices = [np.vstack([c0, coords[f]]) for f in hull.simplices]

    children_per_split = math.factorial(d + 1)
    for round_idx in range(max_refine):
        state = SimplicialSearchState(
            simplices=simplices,
            resolution=max(_simplex_diameter(s) for s in simplices))
        vertices = {}
        for s in simplices:
            for u in s:
                k = tuple(np.round(u, 12))
                if k not in vertices:
                    vertices[k] = (u, polytope.from_chart(u))

        items = sorted(vertices.items())
        if score is not None:
            items.sort(key=lambda kv: (-float(score(kv[1][1])), kv[0]))
        for _, (_, p) in items:
            found = _try(p)
            if found is not None:
                return found

        for k, (_, p) in sorted(vertices.items()):
            state.labels[k] = _sel(p) - p

        scored = []
        for s in simplices:
            L = np.array([state.labels[tuple(np.round(u, 12))] for u in s])
            t_star, lam = _min_linf_combination(L)
            scored.append((t_star, lam @ s, s))
        scored.sort(key=lambda item: item[0])

        for t_star, cand_u, _ in scored[:64]:
            p = polytope.from_chart(cand_u)
            found = _try(p)
            if found is not None:
                return found
            found = _try(_sel(p))
            if found is not None:
                return found

        keep = max(1, simplex_budget // children_per_split)
        simplices = []
        for _, _, s in scored[:keep]:
            simplices.extend(_barycentric_subdivide(s))
        logger.debug("refine round %d: %d simplices, resolution %.3g",
                     round_idx, len(simplices), state.resolution)

    raise FixedPointError("no fixed point at resolution")
