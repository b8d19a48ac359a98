import numpy as np
import pytest

from depthlab.cloud import PointCloud


@pytest.fixture
def square():
    return PointCloud(np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]))


@pytest.fixture
def triangle():
    return PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))


def random_cloud(rng, n, kind="gaussian"):
    """Gaussian, heavy-tailed, duplicated or lattice clouds for stress tests."""
    if kind == "gaussian":
        X = rng.standard_normal((n, 2))
    elif kind == "student":
        X = rng.standard_normal((n, 2)) / np.sqrt(rng.gamma(1.05, 2.0, size=(n, 1)) / 2.1)
    elif kind == "duplicated":
        base = rng.standard_normal((max(1, n // 3), 2))
        X = base[rng.integers(0, base.shape[0], size=n)]
    else:
        X = rng.integers(-3, 4, size=(n, 2)).astype(float)
    return PointCloud(X)
