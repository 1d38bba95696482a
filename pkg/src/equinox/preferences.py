"""Strongly concave quadratic preferences and the consumer demand function.

A preference is u(x) = -(x - b)' Q (x - b) on a compact convex consumption
set.  Strong concavity (smallest eigenvalue of Q) certifies a rotundity
modulus and makes the best budget-feasible bundle unique, so demand is a
well-defined function of the price.
"""

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import PreferenceError
from .geometry import Halfspace, as_vector, intersect_net
from .geometry.bodies import GeometryError

logger = logging.getLogger(__name__)

SATIATION_MARGIN = 1e-6
STAGE_CAP = 40


class Comparison(enum.Enum):
    FIRST = "first"
    SECOND = "second"
    WITHIN_TOL = "within_tol"


class Preference:
    """Quadratic preference on a convex consumption set.

    Parameters
    ----------
    consumption_set : ConvexBody
    bliss_point : array
        Unconstrained maximizer of the utility.
    Q : (N, N) array, optional
        Symmetric positive definite curvature; identity by default.
    """

    def __init__(self, consumption_set, bliss_point, Q=None):
        self.consumption_set = consumption_set
        self.bliss = as_vector(bliss_point, consumption_set.dim)
        n = self.bliss.size
        self.Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
        if self.Q.shape != (n, n):
            raise PreferenceError(f"Q must be {n}x{n}")
        if np.max(np.abs(self.Q - self.Q.T)) > 1e-10 * max(1.0, np.max(np.abs(self.Q))):
            raise PreferenceError("Q must be symmetric")
        eigs = np.linalg.eigvalsh(self.Q)
        if eigs[0] <= 0:
            raise PreferenceError("Q must be positive definite")
        self.strong_concavity = float(eigs[0])
        self.curvature_max = float(eigs[-1])

    @property
    def dim(self):
        return self.bliss.size

    def utility(self, x):
        d = as_vector(x, self.dim) - self.bliss
        return -float(d @ self.Q @ d)

    def utility_many(self, X):
        D = np.atleast_2d(X) - self.bliss
        return -np.einsum("ij,jk,ik->i", D, self.Q, D)

    def gradient(self, x):
        return -2.0 * self.Q @ (as_vector(x, self.dim) - self.bliss)

    def lipschitz_bound(self):
        """Bound on the utility gradient norm over the consumption set."""
        reach = self.consumption_set.outer_radius + float(np.linalg.norm(self.bliss))
        return 2.0 * self.curvature_max * reach


@dataclass
class RotundityModulus:
    """Certified eps -> delta map for the uniform-rotundity property."""

    strong_concavity: float
    lipschitz: float

    def __call__(self, eps):
        if eps <= 0:
            raise PreferenceError("eps must be positive")
        return self.strong_concavity * eps**2 / (8.0 * (self.lipschitz + 1.0))


@dataclass
class BudgetContext:
    """Witnesses behind a demand computation at one price."""

    price: np.ndarray
    budget_net: np.ndarray
    inhabited_witness: np.ndarray
    satiation_witness: np.ndarray | None
    satiation_margin: float = field(default=float("nan"))


def prefers(pref, x, x2, tol):
    """Three-way utility comparison with a tolerance band."""
    if not pref.consumption_set.contains(x):
        raise PreferenceError("outside consumption set")
    if not pref.consumption_set.contains(x2):
        raise PreferenceError("outside consumption set")
    u1, u2 = pref.utility(x), pref.utility(x2)
    if u1 > u2 + tol:
        return Comparison.FIRST
    if u2 > u1 + tol:
        return Comparison.SECOND
    return Comparison.WITHIN_TOL


def rotundity_delta(pref, eps):
    """Certified rotundity radius for separation eps."""
    return RotundityModulus(pref.strong_concavity, pref.lipschitz_bound())(eps)


def _dykstra(projections, x0, tol=1e-12, max_cycles=2000):
    """Dykstra's alternating projections onto an intersection of convex sets."""
    x = np.asarray(x0, dtype=float).copy()
    corrections = [np.zeros_like(x) for _ in projections]
    scale = max(1.0, float(np.linalg.norm(x)))
    for _ in range(max_cycles):
        x_prev = x.copy()
        for i, proj in enumerate(projections):
            y = proj(x + corrections[i])
            corrections[i] = x + corrections[i] - y
            x = y
        if float(np.linalg.norm(x - x_prev)) <= tol * scale:
            break
    return x


def _min_price_point(body, p):
    """Cheapest bundle in the body and its price value."""
    x_min = body.support_argmin(p)
    return x_min, float(p @ x_min)


def _interior_budget_witness(body, p):
    """A point of the body with strictly negative price value and a certified
    interior radius inside body ∩ {p.x <= 0}; None when no interior exists."""
    p = np.asarray(p, dtype=float)
    p_norm = float(np.linalg.norm(p))
    xi = body.interior_point
    v_int = float(p @ xi)
    if v_int < -1e-9 * p_norm:
        radius = min(body.inner_radius, -v_int / p_norm)
        return xi.copy(), radius
    x_min, v_min = _min_price_point(body, p)
    if v_min >= -1e-12 * p_norm:
        return None
    s = 0.5 * v_min / (v_min - v_int) if v_int > v_min else 0.5
    x_w = (1.0 - s) * x_min + s * xi
    v_w = float(p @ x_w)
    if v_w >= 0:
        return None
    radius = min(s * body.inner_radius, -v_w / p_norm)
    if radius <= 1e-9:
        return None
    return x_w, radius


def budget_context(pref, p, eps):
    """Assemble the witnesses for demand at price p (net resolution eps)."""
    body = pref.consumption_set
    p = as_vector(p, body.dim)
    x_min, v_min = _min_price_point(body, p)
    if v_min > 1e-9 * (1.0 + np.linalg.norm(p)):
        raise PreferenceError("budget empty: no affordable bundle")
    witness = _interior_budget_witness(body, p)
    if witness is not None:
        net = intersect_net(body, Halfspace(p, 0.0), eps, witness[0])
    else:
        net = np.atleast_2d(x_min)
    unconstrained = _polish(pref, [body.project], body.interior_point, 1e-9)
    margin = pref.utility(unconstrained) - float(np.max(pref.utility_many(net)))
    satiation = unconstrained if margin > SATIATION_MARGIN else None
    return BudgetContext(price=p, budget_net=net,
                         inhabited_witness=x_min.copy(),
                         satiation_witness=satiation,
                         satiation_margin=margin)


def _lexicographic_argmax(points, values):
    scale = max(1.0, float(np.max(np.abs(values))))
    best = values >= np.max(values) - 1e-12 * scale
    cands = np.atleast_2d(points)[best]
    return cands[np.lexsort(cands.T[::-1])][0].copy()


def _polish(pref, projections, start, tol):
    """Projected gradient ascent; converges linearly for quadratic utility."""
    step = 1.0 / pref.curvature_max
    x = np.asarray(start, dtype=float).copy()
    stop = max(tol * pref.strong_concavity / (10.0 * pref.curvature_max), 1e-14)
    for _ in range(50_000):
        target = x - step * (pref.Q @ (x - pref.bliss))
        if len(projections) == 1:
            x_new = projections[0](target)
        else:
            x_new = _dykstra(projections, target)
        if float(np.linalg.norm(x_new - x)) <= stop:
            return x_new
        x = x_new
    logger.debug("demand polish hit the iteration cap")
    return x


def demand(pref, p, tol, net_offset=0.0):
    """Best budget-feasible bundle at price p.

    Refines budget nets geometrically to localize the maximizer, then runs a
    convergent projected-gradient stage down to ``tol``.  Raises "budget
    empty" when nothing is affordable and "satiated" when the bliss point
    itself sits strictly inside the budget set.
    """
    body = pref.consumption_set
    p = as_vector(p, body.dim)
    p_norm = float(np.linalg.norm(p))
    if p_norm <= 0:
        raise PreferenceError("price must be nonzero")
    if tol <= 0:
        raise PreferenceError("tol must be positive")

    if body.interior_margin(pref.bliss) > SATIATION_MARGIN \
            and float(p @ pref.bliss) < -SATIATION_MARGIN * p_norm:
        raise PreferenceError("satiated: bliss point is interior to the budget set")

    x_min, v_min = _min_price_point(body, p)
    if v_min > tol * (1.0 + p_norm):
        raise PreferenceError("budget empty: no affordable bundle")

    witness = _interior_budget_witness(body, p)
    halfspace = Halfspace(p, 0.0)
    start = x_min
    if witness is not None:
        xi_w, _ = witness
        L = pref.lipschitz_bound()
        mu = pref.strong_concavity
        eps_k = body.outer_radius / 4.0
        net_floor = body.outer_radius / 16.0
        winner = None
        window = None
        for _ in range(STAGE_CAP):
            try:
                net = intersect_net(body, halfspace, eps_k, xi_w,
                                    offset=net_offset, window=window)
            except GeometryError as exc:
                logger.debug("net stage stopped: %s", exc)
                break
            values = pref.utility_many(net)
            new_winner = _lexicographic_argmax(net, values)
            if winner is not None and np.linalg.norm(new_winner - winner) <= tol:
                winner = new_winner
                break
            winner = new_winner
            radius = np.sqrt(max(L * eps_k, 0.0) / mu)
            window = (winner - radius - 2 * eps_k, winner + radius + 2 * eps_k)
            eps_k *= 0.5
            if eps_k <= net_floor:
                break
        if winner is not None:
            start = winner

    return _polish(pref, [body.project, halfspace.project], start, tol)


def aggregate_demand(prefs, p, tol):
    """Sum of per-consumer demands; errors carry the consumer index."""
    total = None
    for i, pref in enumerate(prefs):
        try:
            f = demand(pref, p, tol)
        except PreferenceError as exc:
            raise PreferenceError(f"consumer {i}: {exc}") from exc
        total = f if total is None else total + f
    if total is None:
        raise PreferenceError("no consumers")
    return total
