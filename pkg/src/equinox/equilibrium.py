"""Economy model, hypothesis validation, and the approximate-equilibrium solver.

The solver normalizes prices against an aggregate interior point of the
production cone, maps each candidate price through aggregate demand and the
boundary crossing back onto the cone, and searches the price polytope for a
point whose profit loss clears the derived tolerance.  Every certificate is
re-verified clause by clause before it is returned.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EquilibriumError, PreferenceError
from .fixed_point import build_gr_map, g_r_select, kakutani_fixed_point
from .geometry import (
    ClippedCone,
    Halfspace,
    as_vector,
    boundary_crossing,
    epsilon_net,
    intersect_net,
    price_polytope,
)
from .geometry.bodies import GeometryError
from .preferences import demand, prefers

logger = logging.getLogger(__name__)

VERIFY_TOL = 1e-7


@dataclass(eq=False)
class Economy:
    """Consumers (preferences on compact sets) plus an aggregate production cone."""

    consumers: list
    production: object
    interior_points: list | None = None
    validation: object | None = None

    def __post_init__(self):
        if len(self.consumers) < 1:
            raise EquilibriumError("economy needs at least one consumer")
        n = self.production.dim
        for i, pref in enumerate(self.consumers):
            if pref.dim != n:
                raise EquilibriumError(f"consumer {i} dimension mismatch")
        if self.interior_points is not None:
            if len(self.interior_points) != len(self.consumers):
                raise EquilibriumError("need one interior point per consumer")
            self.interior_points = [as_vector(x, n) for x in self.interior_points]

    @property
    def dimension(self):
        return self.production.dim


@dataclass
class ValidationReport:
    pointedness: bool
    pointedness_certificate: dict
    interior_witnesses: list
    nonsatiation_pass: int
    nonsatiation_fail: int
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.pointedness and all(w is not None for w in self.interior_witnesses)

    def to_dict(self):
        return {
            "pointedness": self.pointedness,
            "pointedness_certificate": self.pointedness_certificate,
            "interior_witnesses": [
                None if w is None else {"point": list(w[0]), "radius": w[1]}
                for w in self.interior_witnesses],
            "nonsatiation_pass": self.nonsatiation_pass,
            "nonsatiation_fail": self.nonsatiation_fail,
            "notes": list(self.notes),
            "passed": self.passed,
        }


@dataclass
class ApproximateEquilibrium:
    """Price, allocations, aggregate bundle, and the certificate data."""

    price: np.ndarray
    allocations: list
    eta: np.ndarray
    zeta: np.ndarray
    t: float
    epsilon: float
    delta: float
    m_const: float
    metrics: dict

    def to_dict(self):
        return {
            "price": [float(v) for v in self.price],
            "allocations": [[float(v) for v in xi] for xi in self.allocations],
            "eta": [float(v) for v in self.eta],
            "zeta": [float(v) for v in self.zeta],
            "t": float(self.t),
            "epsilon": float(self.epsilon),
            "delta": float(self.delta),
            "m_const": float(self.m_const),
            "metrics": {
                "p_dot_eta": float(self.metrics["p_dot_eta"]),
                "dist_eta_to_Y": float(self.metrics["dist_eta_to_Y"]),
                "budget_residuals": [float(v) for v in self.metrics["budget_residuals"]],
            },
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            price=np.asarray(data["price"], dtype=float),
            allocations=[np.asarray(x, dtype=float) for x in data["allocations"]],
            eta=np.asarray(data["eta"], dtype=float),
            zeta=np.asarray(data["zeta"], dtype=float),
            t=float(data["t"]),
            epsilon=float(data["epsilon"]),
            delta=float(data["delta"]),
            m_const=float(data["m_const"]),
            metrics={
                "p_dot_eta": float(data["metrics"]["p_dot_eta"]),
                "dist_eta_to_Y": float(data["metrics"]["dist_eta_to_Y"]),
                "budget_residuals": [float(v) for v in data["metrics"]["budget_residuals"]],
            },
        )


def interior_point(X, Y, initial=None):
    """A point with a certified ball inside X ∩ Y, plus that radius.

    With ``initial`` supplied, certifies that point instead of searching.
    """
    if initial is not None:
        xi = as_vector(initial, X.dim)
        radius = min(X.interior_margin(xi), Y.interior_margin(xi))
        if radius <= 0:
            raise EquilibriumError("no interior point found: supplied point not interior")
        return xi, float(radius)

    best, best_margin = None, 0.0
    for eps in (X.outer_radius / 2.0, X.outer_radius / 4.0, X.outer_radius / 8.0):
        try:
            candidates = epsilon_net(X, eps)
        except GeometryError:
            continue
        margins = np.minimum(
            [X.interior_margin(c) for c in candidates],
            [Y.interior_margin(c) for c in candidates])
        idx = int(np.argmax(margins))
        if margins[idx] > best_margin:
            best, best_margin = candidates[idx], float(margins[idx])
        if best_margin > eps / 2.0:
            break
    if best is None or best_margin <= 1e-9:
        raise EquilibriumError("no interior point found in X ∩ Y")
    return np.asarray(best, dtype=float), best_margin


def _pointedness_search(cone, eps=0.05, cap=400_000):
    """Largest coordinate sum over near-orthant cone points in the unit ball."""
    for g in cone.generators:
        if np.all(g >= -1e-12 * np.linalg.norm(g)):
            return False, {"witness": list(map(float, g)), "value": float(np.sum(g)),
                           "eps": 0.0}
    region = ClippedCone(cone, 1.0)
    eps_eff = eps
    for _ in range(8):
        try:
            net = epsilon_net(region, eps_eff, cap=cap)
            break
        except GeometryError:
            eps_eff *= 1.7
    else:
        return False, {"witness": None, "value": math.inf, "eps": eps_eff}
    near_orthant = net[np.min(net, axis=1) >= -eps_eff / 2.0]
    if near_orthant.shape[0] == 0:
        return True, {"witness": None, "value": 0.0, "eps": eps_eff}
    sums = np.sum(near_orthant, axis=1)
    idx = int(np.argmax(sums))
    value = float(sums[idx])
    ok = value <= cone.dim * eps_eff
    return ok, {"witness": list(map(float, near_orthant[idx])), "value": value,
                "eps": eps_eff}


def validate_economy(econ, seed=0, price_samples=12):
    """Check pointedness, interior witnesses, and sampled nonsatiation."""
    notes = []
    pointed, cert = _pointedness_search(econ.production)

    witnesses = []
    for i, pref in enumerate(econ.consumers):
        initial = econ.interior_points[i] if econ.interior_points is not None else None
        try:
            witnesses.append(interior_point(pref.consumption_set, econ.production,
                                            initial=initial))
        except EquilibriumError as exc:
            witnesses.append(None)
            notes.append(f"consumer {i}: {exc}")

    ns_pass = ns_fail = 0
    if pointed and all(w is not None for w in witnesses):
        try:
            xi_bar = np.sum([w[0] for w in witnesses], axis=0)
            polytope = price_polytope(econ.production, xi_bar)
            chart_span = max(1e-9, float(np.max(np.linalg.norm(
                polytope.vertices - polytope.centroid(), axis=1))))
            net = epsilon_net(polytope, max(chart_span / max(price_samples, 1), 1e-6),
                              cap=50_000)
            rng = np.random.default_rng(seed)
            take = net if len(net) <= price_samples else \
                net[rng.choice(len(net), size=price_samples, replace=False)]
            for p in take:
                try:
                    allocations = [demand(pref, p, 1e-4) for pref in econ.consumers]
                except PreferenceError as exc:
                    notes.append(f"nonsatiation sample skipped: {exc}")
                    continue
                eta = np.sum(allocations, axis=0)
                if econ.production.distance(eta) > 0.05 * (1.0 + np.linalg.norm(eta)):
                    continue
                for pref, xi in zip(econ.consumers, allocations):
                    better = _improvement_exists(pref, xi)
                    if better:
                        ns_pass += 1
                    else:
                        ns_fail += 1
        except (GeometryError, EquilibriumError) as exc:
            notes.append(f"nonsatiation sampling unavailable: {exc}")
    else:
        notes.append("nonsatiation sampling skipped: prerequisites failed")

    report = ValidationReport(pointedness=pointed, pointedness_certificate=cert,
                              interior_witnesses=witnesses,
                              nonsatiation_pass=ns_pass, nonsatiation_fail=ns_fail,
                              notes=notes)
    econ.validation = report
    return report


def _improvement_exists(pref, x, eps_factor=8.0):
    body = pref.consumption_set
    try:
        net = epsilon_net(body, body.outer_radius / eps_factor, cap=100_000)
    except GeometryError:
        return True
    return bool(np.max(pref.utility_many(net)) > pref.utility(x) + 1e-6)


def _aggregate_interior(econ):
    """Aggregate interior point with every coordinate bounded away from zero."""
    if econ.validation is None:
        validate_economy(econ)
    if not econ.validation.passed:
        raise EquilibriumError("validation failed: economy violates the hypotheses")
    witnesses = list(econ.validation.interior_witnesses)
    points = [w[0].copy() for w in witnesses]
    radii = [w[1] for w in witnesses]
    xi_bar = np.sum(points, axis=0)
    nudge = min(radii) / 4.0
    for j in range(xi_bar.size):
        if abs(xi_bar[j]) < 1e-9:
            # Perturb the first consumer's witness inside its certified ball.
            direction = 1.0 if xi_bar[j] >= 0 else -1.0
            points[0][j] += direction * nudge
            radii[0] -= nudge
            xi_bar = np.sum(points, axis=0)
    return xi_bar, points, radii


def solve(econ, epsilon, seed=0, max_refine=12):
    """Construct an approximate competitive equilibrium at profit slack epsilon."""
    if epsilon <= 0:
        raise EquilibriumError("epsilon must be positive")
    if econ.validation is None:
        validate_economy(econ, seed=seed)
    if not econ.validation.passed:
        raise EquilibriumError("validation failed: economy violates the hypotheses")

    xi_bar, _, _ = _aggregate_interior(econ)
    polytope = price_polytope(econ.production, xi_bar)

    max_price_norm = polytope.max_norm()
    delta = 0.999 * (epsilon / 2.0) / max_price_norm
    reach_bound = float(sum(p.consumption_set.outer_radius for p in econ.consumers)) \
        + float(np.linalg.norm(xi_bar))
    m_const = min(epsilon / 2.0, delta / reach_bound)

    region = ClippedCone(econ.production, reach_bound)
    if region.interior_margin(xi_bar) <= 0:
        raise EquilibriumError("aggregate interior point lost its margin")

    demand_tol = min(1e-6, epsilon / 100.0)
    crossing_cache = {}

    def crossing(p):
        key = tuple(np.round(p, 12))
        if key not in crossing_cache:
            eta = _aggregate_demand(econ, p, demand_tol)
            zeta, t = boundary_crossing(region, xi_bar, eta)
            crossing_cache[key] = (eta, zeta, t)
        return crossing_cache[key]

    gr_map = build_gr_map(polytope, m_const / 2.0, reach_bound)

    def selection(p):
        # Non-strict: probe prices whose aggregate demand falls deep inside
        # the cone still get a label; the membership gate does the rejecting.
        _, zeta, _ = crossing(p)
        return g_r_select(gr_map, zeta, strict=False)

    def membership(p):
        _, zeta, _ = crossing(p)
        return float(p @ zeta) > -m_const

    def profit_score(p):
        _, zeta, _ = crossing(p)
        return float(p @ zeta)

    price = kakutani_fixed_point(selection, membership, polytope, m_const,
                                 max_refine=max_refine, score=profit_score)

    allocations = [demand(pref, price, demand_tol) for pref in econ.consumers]
    eta = np.sum(allocations, axis=0)
    zeta, t = boundary_crossing(region, xi_bar, eta)
    cert = ApproximateEquilibrium(
        price=price, allocations=allocations, eta=eta, zeta=zeta, t=float(t),
        epsilon=float(epsilon), delta=float(delta), m_const=float(m_const),
        metrics={
            "p_dot_eta": float(price @ eta),
            "dist_eta_to_Y": econ.production.distance(eta),
            "budget_residuals": [float(price @ xi) for xi in allocations],
        })
    failures = [c for c in verify_certificate(econ, cert) if not c[1]]
    if failures:
        raise EquilibriumError(f"certificate failed: {failures[0][0]} ({failures[0][2]})")
    return cert


def _aggregate_demand(econ, p, tol):
    allocations = []
    for i, pref in enumerate(econ.consumers):
        try:
            allocations.append(demand(pref, p, tol))
        except PreferenceError as exc:
            raise PreferenceError(f"consumer {i}: {exc}") from exc
    return np.sum(allocations, axis=0)


def verify_certificate(econ, cert, tol=VERIFY_TOL, demand_tol=None):
    """Re-check every certificate clause; returns (clause, ok, detail) triples."""
    clauses = []
    p = cert.price
    p_norm = float(np.linalg.norm(p))
    xi_bar, _, _ = _aggregate_interior(econ)

    total = np.sum(cert.allocations, axis=0)
    gap = float(np.max(np.abs(total - cert.eta)))
    clauses.append(("allocations sum to eta", gap <= 1e-12, f"gap {gap:.3g}"))

    if demand_tol is None:
        demand_tol = min(1e-6, cert.epsilon / 100.0)
    for i, (pref, xi) in enumerate(zip(econ.consumers, cert.allocations)):
        body = pref.consumption_set
        in_set = body.contains(xi, band=tol * (1.0 + body.outer_radius))
        clauses.append((f"allocation {i} lies in its consumption set", in_set, ""))
        residual = float(p @ xi)
        ok_budget = residual <= demand_tol * (1.0 + p_norm)
        clauses.append((f"allocation {i} is budget feasible", ok_budget,
                        f"p.xi {residual:.3g}"))
        try:
            recomputed = demand(pref, p, demand_tol / 10.0)
            dist = float(np.linalg.norm(recomputed - xi))
            ok_opt = dist <= 100.0 * demand_tol
            detail = f"|xi - F(p)| {dist:.3g}"
        except PreferenceError as exc:
            ok_opt, detail = False, str(exc)
        clauses.append((f"allocation {i} maximizes utility on the budget set",
                        ok_opt, detail))

    unit = econ.production.generators \
        / np.linalg.norm(econ.production.generators, axis=1)[:, None]
    polar_slack = float(np.max(unit @ p))
    clauses.append(("price lies in the polar cone", polar_slack <= tol * max(1.0, p_norm),
                    f"max slack {polar_slack:.3g}"))
    normalization = abs(float(p @ xi_bar) + 1.0)
    clauses.append(("price satisfies the normalization", normalization <= tol * max(1.0, p_norm),
                    f"|p.xi+1| {normalization:.3g}"))

    p_dot_eta = float(p @ cert.eta)
    clauses.append(("profit loss within epsilon", p_dot_eta > -cert.epsilon,
                    f"p.eta {p_dot_eta:.3g} vs -{cert.epsilon:g}"))
    clauses.append(("crossing parameter below m", cert.t < cert.m_const + 1e-12,
                    f"t {cert.t:.3g} vs m {cert.m_const:.3g}"))
    dist_eta = econ.production.distance(cert.eta)
    clauses.append(("aggregate bundle within delta of the production cone",
                    dist_eta <= cert.delta + tol, f"dist {dist_eta:.3g} vs {cert.delta:.3g}"))
    recon = cert.t * xi_bar + (1.0 - cert.t) * cert.eta
    recon_gap = float(np.linalg.norm(recon - cert.zeta))
    clauses.append(("crossing point is consistent", recon_gap <= 1e-6 * (1.0 + np.linalg.norm(cert.zeta)),
                    f"gap {recon_gap:.3g}"))
    return clauses


@dataclass
class CheckReport:
    clauses: list
    grid_oracle: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.clauses) \
            and all(ok for _, ok, _ in self.grid_oracle)

    def to_dict(self):
        return {
            "clauses": [{"name": n, "passed": ok, "detail": d} for n, ok, d in self.clauses],
            "grid_oracle": [{"name": n, "passed": ok, "detail": d}
                            for n, ok, d in self.grid_oracle],
            "passed": self.passed,
        }


def check_equilibrium(econ, cert):
    """Independent re-verification with a finer demand tolerance, plus a dense
    grid-argmax demand oracle in two dimensions."""
    clauses = verify_certificate(econ, cert, demand_tol=min(1e-7, cert.epsilon / 1000.0))
    oracle = []
    if econ.dimension == 2:
        for i, (pref, xi) in enumerate(zip(econ.consumers, cert.allocations)):
            body = pref.consumption_set
            lo, hi = body.bounding_box()
            axes = [np.linspace(lo[d], hi[d], 401) for d in range(2)]
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 2)
            pitch = float(np.max((hi - lo) / 400.0))
            feasible = grid[body.contains_many(grid) & (grid @ cert.price <= 0.0)]
            if feasible.shape[0] == 0:
                oracle.append((f"grid oracle {i}", False, "no feasible grid point"))
                continue
            best = float(np.max(pref.utility_many(feasible)))
            slack = pref.lipschitz_bound() * 2.0 * pitch
            ok = pref.utility(xi) >= best - slack
            oracle.append((f"grid oracle {i}", ok,
                           f"u(xi) {pref.utility(xi):.6g} vs net best {best:.6g}"))
    return CheckReport(clauses=clauses, grid_oracle=oracle)


def refine_sequence(econ, eps0, k, seed=0):
    """Certificates at epsilon = eps0 / 2**n for n = 0..k (k <= 12)."""
    if k > 12:
        raise EquilibriumError("k must be at most 12")
    results = []
    for n in range(k + 1):
        eps_n = eps0 * 2.0 ** (-n)
        try:
            results.append(solve(econ, eps_n, seed=seed))
        except (EquilibriumError, PreferenceError, GeometryError) as exc:
            logger.warning("refine stage %d failed: %s", n, exc)
            break
    return results
