"""Exact halfspace depth, depth regions and Tukey medians in the plane."""

__version__ = "0.1.0"

from .cloud import DepthValue, PointCloud, cloud_from_csv, cloud_to_csv  # noqa: E402
from .depth import depth, depth_1d, depth_approx, depth_exact_2d, depth_oracle  # noqa: E402
from .geometry import ConvexRegion, HalfPlane, intersect_halfplanes  # noqa: E402
from .regions import (  # noqa: E402
    depth_contours,
    depth_region,
    max_depth,
    stahel_donoho_approx,
    tukey_median,
)

__all__ = [
    "ConvexRegion", "DepthValue", "HalfPlane", "PointCloud", "cloud_from_csv", "cloud_to_csv",
    "depth", "depth_1d", "depth_approx", "depth_contours", "depth_exact_2d", "depth_oracle",
    "depth_region", "intersect_halfplanes", "max_depth", "stahel_donoho_approx",
    "tukey_median",
]
