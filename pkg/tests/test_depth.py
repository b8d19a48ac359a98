import numpy as np
import pytest

from conftest import random_cloud
from depthlab.cloud import DimensionError, PointCloud
from depthlab.depth import depth, depth_1d, depth_approx, depth_counts_2d, depth_exact_2d, depth_oracle


def test_depth_1d_examples():
    c = PointCloud(np.array([1.0, 2, 3, 4, 5]))
    assert depth_1d(c, 3).count == 3
    assert depth_1d(c, 0).count == 0
    assert depth_1d(PointCloud(np.array([1.0, 2, 3, 4])), 2.5).count == 2


def test_square_and_triangle(square, triangle):
    assert depth_exact_2d(square, (0, 0)).count == 2
    assert depth_exact_2d(square, (0.1, 0)).count == 1
    assert depth_oracle(square, (0, 0)).count == 2
    assert depth_oracle(square, (0.1, 0)).count == 1
    assert depth_exact_2d(triangle, (0.25, 0.25)).count == 1
    assert depth_exact_2d(square, (5, 5)).count == 0


def test_single_point_and_duplicates():
    one = PointCloud(np.array([[2.0, 3.0]]))
    assert depth_exact_2d(one, (2, 3)).count == 1
    dup = PointCloud(np.array([[0.0, 0.0]] * 3 + [[1.0, 0.0]]))
    assert depth_exact_2d(dup, (0, 0)).count >= 3


def test_sweep_matches_oracle():
    rng = np.random.default_rng(11)
    for i in range(300):
        c = random_cloud(rng, int(rng.integers(1, 60)), ("gaussian", "student", "duplicated", "lattice")[i % 4])
        z = c.points[rng.integers(c.n)] if i % 3 == 0 else rng.standard_normal(2)
        assert depth_exact_2d(c, z).count == depth_oracle(c, z).count


def test_hull_vertices_have_depth_one_over_n():
    rng = np.random.default_rng(5)
    c = PointCloud(rng.standard_normal((40, 2)))
    ix = np.argmax(c.points[:, 0])
    assert depth_exact_2d(c, c.points[ix]).count == 1


def test_batch_counts_match_single():
    rng = np.random.default_rng(6)
    c = PointCloud(rng.standard_normal((30, 2)))
    Q = rng.standard_normal((20, 2))
    batch = depth_counts_2d(c.points, Q)
    assert [depth_exact_2d(c, q).count for q in Q] == batch.tolist()


def test_approx_is_an_upper_bound():
    rng = np.random.default_rng(7)
    for _ in range(200):
        c = random_cloud(rng, int(rng.integers(1, 40)))
        z = rng.standard_normal(2) * 0.5
        assert depth_approx(c, z, 20, seed=1).count >= depth_exact_2d(c, z).count


def test_approx_high_dimension_hull_point():
    rng = np.random.default_rng(8)
    c = PointCloud(rng.standard_normal((3, 5)))
    assert depth(c, c.points.mean(axis=0), n_dirs=500, seed=0).count == 1
    assert depth_approx(c, c.points.mean(axis=0), 500, seed=3) == depth_approx(c, c.points.mean(axis=0), 500, seed=3)


def test_dimension_checks():
    c = PointCloud(np.zeros((3, 3)))
    with pytest.raises(DimensionError):
        depth_exact_2d(c, (0, 0))
    with pytest.raises(DimensionError):
        depth_oracle(c, (0, 0, 0))
