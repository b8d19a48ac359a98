import math

import numpy as np
import pytest

from conftest import random_cloud
from depthlab import geometry as geo
from depthlab.cloud import PointCloud
from depthlab.depth import depth_counts_2d, depth_exact_2d, depth_oracle
from depthlab.regions import (
    LevelError,
    MedianSolver,
    depth_contours,
    depth_region,
    depth_region_1d,
    depth_region_reference,
    max_depth,
    median_set_1d,
    stahel_donoho_approx,
    tukey_median,
)


def test_square_examples(square):
    assert max_depth(square) == 2
    r = depth_region(square, 2).region
    assert r.kind == geo.POINT
    assert geo.round_region(r).vertices == ((0.0, 0.0),)
    assert depth_region(square, 3).region.is_empty
    assert tukey_median(square).point == pytest.approx((0.0, 0.0), abs=1e-12)


def test_triangle_examples(triangle):
    assert max_depth(triangle) == 1
    r = depth_region(triangle, 1).region
    assert geo.round_region(r).vertices == ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    tm = tukey_median(triangle)
    assert tm.point == (0.3333333333333333, 0.3333333333333333)
    assert depth_region(triangle, 2).region.is_empty
    assert geo.round_region(depth_contours(triangle, [1])[0].region) == geo.round_region(r)


def test_collinear_cloud():
    c = PointCloud(np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]))
    assert max_depth(c) == 2
    assert depth_oracle(c, (2.0, 0.0)).count == 2
    tm = tukey_median(c)
    assert tm.region.kind == geo.POINT
    assert tm.point == pytest.approx((2.0, 0.0), abs=1e-12)
    assert depth_region(c, 1).region.kind == geo.SEGMENT


def test_symmetric_cloud_median_is_center():
    rng = np.random.default_rng(2)
    p = np.array([0.7, -1.3])
    half = rng.standard_normal((20, 2))
    c = PointCloud(np.vstack([p + half, p - half]))
    assert np.allclose(tukey_median(c).point, p, atol=1e-9)


def test_max_depth_bounds_distinct_points():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 80))
        c = PointCloud(rng.standard_normal((n, 2)))
        k = max_depth(c)
        assert -(-n // 3) <= k <= -(-n // 2)
        assert depth_region(c, k + 1).region.is_empty if k < n else True


def test_max_depth_with_duplicates_exceeds_half():
    # three copies of one point: its depth is 3 of 4, above ceil(n/2)
    c = PointCloud(np.array([[0.0, 0.0]] * 3 + [[1.0, 1.0]]))
    assert max_depth(c) == 3
    assert depth_exact_2d(c, (0, 0)).count == 3


def test_region_membership_matches_depth():
    rng = np.random.default_rng(4)
    for i in range(30):
        c = random_cloud(rng, int(rng.integers(1, 13)), ("gaussian", "duplicated", "lattice")[i % 3])
        lo, hi = c.points.min(axis=0) - 0.5, c.points.max(axis=0) + 0.5
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], 21), np.linspace(lo[1], hi[1], 21))
        G = np.column_stack([gx.ravel(), gy.ravel()])
        counts = depth_counts_2d(c.points, G)
        for k in range(1, max_depth(c) + 1):
            r = depth_region(c, k).region
            for g, cnt in zip(G, counts):
                d = geo.distance_to_region(r, g)
                if abs(d) <= 1e-9:
                    continue
                assert (d < 0) == (cnt >= k)


def test_fast_engine_matches_reference():
    rng = np.random.default_rng(5)
    for i in range(40):
        c = random_cloud(rng, int(rng.integers(2, 65)), ("gaussian", "duplicated", "lattice")[i % 3])
        for k in sorted({1, max(1, c.n // 4), max_depth(c)}):
            fast = depth_region(c, k).region
            ref = depth_region_reference(c, k).region
            assert fast.kind == ref.kind
            assert np.allclose(fast.as_array(), ref.as_array(), atol=1e-9)


def test_regions_nested():
    rng = np.random.default_rng(6)
    c = PointCloud(rng.standard_normal((100, 2)))
    k_star = max_depth(c)
    regs = depth_contours(c, [10, 25, 40])
    assert all(r.region.kind == geo.POLYGON for r in regs)
    for a, b in zip(regs, regs[1:]):
        assert geo.region_subset(b.region, a.region, tol=1e-9)
    inner, outer = depth_contours(c, [1, k_star])[::-1]
    assert geo.region_subset(inner.region, outer.region, tol=1e-9)


def test_level_validation(square):
    with pytest.raises(LevelError):
        depth_region(square, 0)
    with pytest.raises(LevelError):
        depth_contours(square, [2, 1])
    with pytest.raises(LevelError):
        depth_contours(square, [1, 3])


def test_affine_equivariance():
    rng = np.random.default_rng(7)
    for _ in range(30):
        c = PointCloud(rng.standard_normal((int(rng.integers(5, 60)), 2)))
        M = rng.standard_normal((2, 2))
        if np.linalg.cond(M) > 100:
            continue
        b = rng.standard_normal(2)
        d = PointCloud(c.points @ M.T + b)
        z = rng.standard_normal(2)
        assert depth_exact_2d(c, z).count == depth_exact_2d(d, M @ z + b).count
        m1 = np.array(tukey_median(c).point)
        m2 = np.array(tukey_median(d).point)
        assert np.linalg.norm(m2 - (M @ m1 + b)) <= 1e-9 * max(1.0, np.linalg.norm(m2))


def test_one_dimensional_regions():
    x = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    assert median_set_1d(x) == (3, (3.0, 3.0))
    assert depth_region_1d(x, 2) == (2.0, 4.0)
    assert depth_region_1d(x, 4) is None
    assert median_set_1d(np.array([1.0, 2.0, 3.0, 4.0])) == (2, (2.0, 3.0))


def test_stahel_donoho(square):
    assert np.allclose(stahel_donoho_approx(square, 50, seed=0), 0.0, atol=1e-12)
    c = PointCloud(np.column_stack([[0.0, 0, 0, 0, 100], [-1.0, -0.5, 0.5, 1.0, 0.0]]))
    est = stahel_donoho_approx(c, 200, seed=1)
    assert 0.0 <= est[0] <= 1.0


def test_stahel_donoho_single_direction_is_weighted_1d_mean():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((25, 2))
    est = stahel_donoho_approx(PointCloud(X), 1, directions=np.array([[1.0, 0.0]]))
    x = X[:, 0]
    med = np.median(x)
    mad = np.median(np.abs(x - med))
    o = np.abs(x - med) / mad
    c = np.median(o)
    w = np.array([1.0 if oi <= c else (c / oi) ** 2 for oi in o])
    assert est[0] == pytest.approx(float((w * x).sum() / w.sum()), rel=1e-12)


def test_median_solver_caches():
    rng = np.random.default_rng(9)
    s = MedianSolver(PointCloud(rng.standard_normal((50, 2))))
    assert s.median_set is s.median_set
    assert geo.region_contains(s.median_set, s.median)
    assert math.isfinite(s.median[0])
