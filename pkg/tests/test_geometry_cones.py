"""Cone projection, distances, polars, and the polar-of-polar equivalence."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import nnls as scipy_nnls

from equinox.errors import GeometryError
from equinox.geometry import FiniteCone, cone_distance, cone_project, polar

E1_GENERATORS = [[-1.0, 1.0], [0.0, -1.0], [-1.0, 0.0]]


def brute_force_projection(generators, x, grid=60, reach=4.0):
    """Dense nonnegative-combination search; slow but independent."""
    G = np.asarray(generators, dtype=float)
    best, best_d = np.zeros(G.shape[1]), np.linalg.norm(x)
    lams = np.linspace(0.0, reach, grid)
    for combo in itertools.product(lams, repeat=len(G)):
        y = np.asarray(combo) @ G
        d = np.linalg.norm(y - x)
        if d < best_d:
            best, best_d = y, d
    return best, best_d


def test_project_member_is_fixed():
    cone = FiniteCone(E1_GENERATORS)
    x = np.array([-0.85, 0.85])
    assert np.allclose(cone_project(cone, x), x, atol=1e-10)


def test_project_origin():
    cone = FiniteCone([[1.0, 2.0], [3.0, -1.0]])
    assert np.allclose(cone_project(cone, [0.0, 0.0]), 0.0)


def test_project_to_apex_matches_grid_oracle():
    cone = FiniteCone(E1_GENERATORS)
    x = np.array([1.0, 1.0])
    y = cone_project(cone, x)
    assert np.allclose(y, [0.0, 0.0], atol=1e-10)
    _, oracle_dist = brute_force_projection(E1_GENERATORS, x)
    assert cone_distance(cone, x) <= oracle_dist + 1e-6


def test_projection_kkt_conditions():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = rng.integers(2, 5)
        cone = FiniteCone(rng.normal(size=(rng.integers(1, 6), n)))
        x = rng.normal(size=n) * 2.0
        y = cone_project(cone, x)
        resid = x - y
        assert abs(float(resid @ y)) <= 1e-7 * (1.0 + np.linalg.norm(x) ** 2)
        assert np.max(cone.generators @ resid) <= 1e-7 * (1.0 + np.linalg.norm(x))


def test_projection_matches_scipy_nnls():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = rng.integers(2, 5)
        G = rng.normal(size=(rng.integers(1, 7), n))
        cone = FiniteCone(G)
        x = rng.normal(size=n) * 3.0
        mine = cone_distance(cone, x)
        lam, _ = scipy_nnls(G.T, x)
        theirs = float(np.linalg.norm(G.T @ lam - x))
        assert mine <= theirs + 1e-8


def test_distance_examples():
    assert cone_distance(FiniteCone([[-1.0, 1.0]]), [-1.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
    assert cone_distance(FiniteCone([[1.0, 0.0]]), [0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)
    assert cone_distance(FiniteCone(E1_GENERATORS), [1.0, 1.0]) == pytest.approx(np.sqrt(2), abs=1e-10)


def test_polar_of_quadrant():
    p = polar(FiniteCone([[1.0, 0.0], [0.0, 1.0]]))
    assert p.contains([-1.0, -2.0])
    assert not p.contains([0.1, -1.0])
    assert not p.contains([-1.0, 0.1])


def test_polar_e1_by_hand():
    # p.(-1,1) <= 0, p.(0,-1) <= 0, p.(-1,0) <= 0  <=>  p1 >= p2 >= 0
    p = polar(FiniteCone(E1_GENERATORS))
    assert p.contains([2.0, 1.0])
    assert p.contains([1.0, 1.0])
    assert not p.contains([1.0, 2.0])
    assert not p.contains([-0.1, 0.0])


def test_empty_generator_list_rejected():
    with pytest.raises(GeometryError):
        FiniteCone(np.zeros((0, 2)))


def test_zero_and_duplicate_generators_rejected():
    with pytest.raises(GeometryError):
        FiniteCone([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(GeometryError):
        FiniteCone([[1.0, 1.0], [2.0, 2.0]])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_polar_polar_membership_equivalence(n):
    """Membership via projection residual agrees with membership via the
    polar's extreme rays, across random cones and sample points."""
    rng = np.random.default_rng(100 + n)
    for _ in range(20):
        cone = FiniteCone(rng.normal(size=(rng.integers(1, n + 3), n)))
        rays = polar(cone).extreme_rays()
        points = rng.normal(size=(60, n)) * 2.0
        for x in points:
            scale = max(1.0, float(np.linalg.norm(x)))
            inside_proj = cone_distance(cone, x) <= 1e-7 * scale
            inside_rays = rays.shape[0] == 0 or np.max(rays @ x) <= 1e-7 * scale
            assert inside_proj == inside_rays


@pytest.mark.parametrize("n", [2, 3, 4])
def test_interior_ball_support_bound(n):
    """For certified interior balls, every unit polar ray has p.y <= -r/(2 sqrt N)."""
    rng = np.random.default_rng(200 + n)
    found = 0
    while found < 20:
        cone = FiniteCone(rng.normal(size=(n + 2, n)))
        rays = polar(cone).extreme_rays()
        if rays.shape[0] == 0:
            continue
        y = cone.generators.mean(axis=0)
        r = cone.interior_margin(y)
        if r <= 0.01:
            continue
        found += 1
        assert float(np.max(rays @ y)) <= -r / (2.0 * np.sqrt(n)) + 1e-9


def test_projection_idempotent():
    rng = np.random.default_rng(42)
    cone = FiniteCone(rng.normal(size=(4, 3)))
    for _ in range(30):
        x = rng.normal(size=3) * 2.0
        y = cone_project(cone, x)
        assert np.allclose(cone_project(cone, y), y, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_projection_nonexpansive(gens, xs, ys):
    G = np.asarray(gens).reshape(2, 3)
    if np.any(np.linalg.norm(G, axis=1) < 1e-3):
        return
    unit = G / np.linalg.norm(G, axis=1)[:, None]
    if abs(float(unit[0] @ unit[1])) > 1.0 - 1e-6:
        return
    cone = FiniteCone(G)
    x, y = np.asarray(xs), np.asarray(ys)
    px, py = cone_project(cone, x), cone_project(cone, y)
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-8
