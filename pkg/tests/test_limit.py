import math

import numpy as np
import pytest

from depthlab.limit import (
    DRIFT,
    DirectionGrid,
    Lattice,
    bridge_covariance,
    evaluate_w,
    grid_covariance,
    limit_region_diameter,
    origin_in_hull,
    refinement_change,
    simulate_bridge,
    simulate_field,
)


def test_bridge_covariance_values():
    assert bridge_covariance(0.0) == 0.25
    assert bridge_covariance(math.pi) == -0.25
    assert bridge_covariance(math.pi / 2) == 0.0
    with pytest.raises(ValueError):
        bridge_covariance(4.0)


def test_perpendicular_orthant_monte_carlo():
    # Cov of indicators of two perpendicular halfplanes under N(0, I)
    Z = np.random.default_rng(0).standard_normal((1_000_000, 2))
    a = (Z[:, 0] >= 0).astype(float)
    b = (Z[:, 1] >= 0).astype(float)
    prod = (a - 0.5) * (b - 0.5)
    assert abs(prod.mean()) <= 3 * prod.std() / math.sqrt(prod.size)


def test_grid_invariants():
    g = DirectionGrid(16)
    assert np.allclose(np.mod(g.angles[8:] - g.angles[:8], 2 * math.pi), math.pi)
    with pytest.raises(ValueError):
        DirectionGrid(7)
    assert np.linalg.eigvalsh(grid_covariance(64)).min() > -1e-10


def test_bridge_antisymmetry_exact():
    g = DirectionGrid(64)
    G = simulate_bridge(g, 3)
    assert np.all(G[32:] + G[:32] == 0.0)
    assert np.array_equal(simulate_bridge(g, 3), G)


def test_bridge_moments():
    g = DirectionGrid(32)
    draws = np.array([simulate_bridge(g, s) for s in range(4000)])
    var = draws.var(axis=0)
    se_var = 0.25 * math.sqrt(2 / draws.shape[0])
    assert np.abs(var - 0.25).max() <= 4 * se_var
    prod = draws[:, 0] * draws[:, 8]
    assert abs(prod.mean()) <= 3 * prod.std() / math.sqrt(prod.size)


def test_w_at_origin_nonpositive_and_concave():
    f = simulate_field(m=128, radius=4.0, spacing=0.2, seed=1)
    at0 = f.w_values[np.all(f.indices == 0, axis=1)][0]
    assert at0 == f.bridge_values.min() and at0 <= 0
    W = f.as_grid()
    for A in (W, W.T):
        d2 = A[2:] - 2 * A[1:-1] + A[:-2]
        assert np.nanmax(d2) <= 1e-9
    assert np.hypot(*f.argmax) < 4.0


def test_deterministic_bridge_recovers_point():
    g = DirectionGrid(256)
    z0 = np.array([1.3, -0.7])
    f = evaluate_w(g.vectors @ z0 * DRIFT, g, Lattice(4.0, 0.1))
    assert f.argmax == pytest.approx(tuple(z0), abs=1e-12)
    assert abs(f.w_max) <= 1e-12
    assert f.refined_argmax == pytest.approx(tuple(z0), abs=1e-9)


def test_maximizer_subdifferential():
    for s in range(10):
        f = simulate_field(m=256, radius=8.0, spacing=0.2, seed=s)
        assert origin_in_hull(f.minimizer_angles)
        assert f.refined_w_max >= f.w_max - 1e-12


def test_origin_in_hull():
    assert origin_in_hull([0.0, 2.0, 4.0])
    assert not origin_in_hull([0.0, 1.0])
    assert origin_in_hull([0.0, math.pi])


def test_level_set_diameters():
    f = simulate_field(m=128, radius=4.0, spacing=0.1, seed=2)
    diams = [limit_region_diameter(f, b) for b in (0.5, 0.25, 0.1, 0.05, 0.01)]
    assert all(a >= b for a, b in zip(diams, diams[1:]))
    assert limit_region_diameter(f, 0.0) == 0.0
    full = limit_region_diameter(f, 10 * (f.w_values.max() - f.w_values.min()))
    assert full == pytest.approx(8.0)


def test_refinement_change_reported():
    d = refinement_change(64, 0, Lattice(2.0, 0.5))
    assert 0.0 <= d < 1.0
