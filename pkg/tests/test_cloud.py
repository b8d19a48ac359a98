import numpy as np
import pytest

from depthlab.cloud import CloudError, DepthValue, PointCloud, cloud_from_csv, cloud_to_csv


def test_csv_round_trip_is_lossless():
    rng = np.random.default_rng(0)
    c = PointCloud(rng.standard_normal((50, 2)) * 1e3)
    text = cloud_to_csv(c)
    assert text.startswith("x1,x2\n") and text.endswith("\n") and "\r" not in text
    assert cloud_from_csv(text) == c


def test_csv_errors_report_line_numbers():
    with pytest.raises(CloudError, match="line 1"):
        cloud_from_csv("a,b\n1,2\n")
    with pytest.raises(CloudError, match="line 3"):
        cloud_from_csv("x1,x2\n1,2\n1,oops\n")
    with pytest.raises(CloudError, match="line 2"):
        cloud_from_csv("x1,x2\n1,2,3\n")
    with pytest.raises(CloudError):
        cloud_from_csv("x1,x2\n")


def test_cloud_validation():
    with pytest.raises(CloudError):
        PointCloud(np.array([[np.nan, 0.0]]))
    with pytest.raises(CloudError):
        PointCloud(np.zeros((0, 2)))
    c = PointCloud(np.array([1.0, 2.0, 3.0]))
    assert c.dim == 1 and c.n == 3


def test_depth_value():
    d = DepthValue(2, 4)
    assert d.to_dict() == {"count": 2, "n": 4, "depth": 0.5}
    with pytest.raises(ValueError):
        DepthValue(5, 4)
