"""Price polytope construction, norm bound, and linear support values."""

import numpy as np
import pytest

from equinox.errors import GeometryError
from equinox.geometry import FiniteCone, polar, price_polytope, support_sup

E1_CONE = FiniteCone([[-1.0, 1.0], [0.0, -1.0], [-1.0, 0.0]])
XI_BAR = np.array([-0.5, 0.3])


def test_e1_vertices():
    P = price_polytope(E1_CONE, XI_BAR)
    expected = np.array([[2.0, 0.0], [5.0, 5.0]])
    got = P.vertices[np.lexsort(P.vertices.T[::-1])]
    assert np.allclose(got, expected, atol=1e-8)


def test_unbounded_when_normalizer_outside():
    with pytest.raises(GeometryError, match="P unbounded"):
        price_polytope(E1_CONE, [1.0, 1.0])


def test_norm_bound_matches_hand_value():
    # M = max{(1,0).xi, (1,1)/sqrt2 . xi} = -0.2/sqrt2; bound = -1/M ~ 7.071
    P = price_polytope(E1_CONE, XI_BAR)
    assert P.norm_bound == pytest.approx(np.sqrt(2) / 0.2, rel=1e-9)
    assert np.max(np.linalg.norm(P.vertices, axis=1)) <= P.norm_bound + 1e-7


def test_vertex_invariants():
    P = price_polytope(E1_CONE, XI_BAR)
    unit = E1_CONE.generators / np.linalg.norm(E1_CONE.generators, axis=1)[:, None]
    for v in P.vertices:
        assert np.max(unit @ v) <= 1e-9
        assert abs(v @ XI_BAR + 1.0) <= 1e-9 * max(1.0, np.linalg.norm(v))


def test_support_sup_examples():
    P = price_polytope(E1_CONE, XI_BAR)
    assert support_sup(P, [-0.85, 0.85]) == pytest.approx(0.0, abs=1e-9)
    assert support_sup(P, XI_BAR) == pytest.approx(-1.0, abs=1e-12)
    assert support_sup(P, [0.0, 0.0]) == 0.0
    assert support_sup([[2.0, 0.0], [5.0, 5.0]], [-0.85, 0.85]) == pytest.approx(0.0, abs=1e-12)


def test_dimension_cap():
    cone = FiniteCone(-np.eye(7))
    with pytest.raises(GeometryError, match="dimension cap"):
        price_polytope(cone, -np.ones(7))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_norm_bound_holds_for_random_cones(n):
    """Every enumerated vertex obeys ||v|| <= -1/M with M recomputed from
    the polar's unit extreme rays."""
    rng = np.random.default_rng(50 + n)
    built = 0
    while built < 8:
        cone = FiniteCone(rng.normal(size=(n + 2, n)))
        xi = cone.generators.mean(axis=0)
        if cone.interior_margin(xi) <= 0.05:
            continue
        xi = xi / abs(np.linalg.norm(xi))
        try:
            P = price_polytope(cone, xi)
        except GeometryError:
            continue
        built += 1
        rays = polar(cone).extreme_rays()
        M = float(np.max(rays @ xi))
        assert M < 0
        assert np.max(np.linalg.norm(P.vertices, axis=1)) <= -1.0 / M + 1e-7


def test_intrinsic_net_covers_segment():
    P = price_polytope(E1_CONE, XI_BAR)
    net = P._intrinsic_net(0.25)
    ts = np.linspace(0, 1, 400)
    seg = ts[:, None] * np.array([2.0, 0.0]) + (1 - ts)[:, None] * np.array([5.0, 5.0])
    gap = max(float(np.min(np.linalg.norm(net - s, axis=1))) for s in seg)
    assert gap <= 0.25
    for q in net:
        assert P.contains(q, 1e-7)
