"""Depth regions, maximal depth and Tukey medians of planar samples.

The region ``{z : n D_n(z) >= k}`` is the intersection over directions ``u``
of ``{z : <z, u> <= q_k(u)}`` where ``q_k(u)`` is the k-th largest projection
of the sample.  Between consecutive critical directions (normals of lines
through two sample points) the k-th point is fixed, so the intersection over
an arc reduces to its two endpoint halfplanes, and only endpoints at which
the k-th point changes identity matter.  Those are exactly the lines through
two sample points with fewer than ``k`` points strictly on one side and at
least ``k`` on that side or on the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from . import geometry as geo
from .cloud import PointCloud
from .depth import depth_counts_2d, row_stats
from .geometry import ConvexRegion


class LevelError(ValueError):
    pass


@dataclass(frozen=True)
class DepthRegionResult:
    level: int
    n: int
    region: ConvexRegion

    def to_dict(self) -> dict:
        return {"level": self.level, "n": self.n, "region": self.region.to_dict()}


@njit(cache=True)
def _level_pairs(X, klo, khi):
    """Directed pairs (i, j) whose left halfplane is tight for some level in [klo, khi].

    Returns pivot index, partner index, #strictly-left and #on-line counts.
    """
    n = X.shape[0]
    cap = 1024
    I = np.empty(cap, np.int64)
    J = np.empty(cap, np.int64)
    G = np.empty(cap, np.int64)
    E = np.empty(cap, np.int64)
    cnt = 0
    dx = np.empty(n)
    dy = np.empty(n)
    ccw = np.empty(n, np.int64)
    same = np.empty(n, np.int64)
    anti = np.empty(n, np.int64)
    for i in range(n):
        for m in range(n):
            dx[m] = X[m, 0] - X[i, 0]
            dy[m] = X[m, 1] - X[i, 1]
        zeros = row_stats(dx, dy, ccw, same, anti)
        for j in range(n):
            g = ccw[j]
            if g < 0 or g >= khi:
                continue
            e = zeros + same[j] + anti[j]
            if g + e < klo:
                continue
            if cnt == cap:
                cap *= 2
                I2 = np.empty(cap, np.int64)
                J2 = np.empty(cap, np.int64)
                G2 = np.empty(cap, np.int64)
                E2 = np.empty(cap, np.int64)
                I2[:cnt] = I[:cnt]
                J2[:cnt] = J[:cnt]
                G2[:cnt] = G[:cnt]
                E2[:cnt] = E[:cnt]
                I, J, G, E = I2, J2, G2, E2
            I[cnt] = i
            J[cnt] = j
            G[cnt] = g
            E[cnt] = e
            cnt += 1
    return I[:cnt], J[:cnt], G[:cnt], E[:cnt]


def _kth_largest(proj: np.ndarray, k: int) -> float:
    return float(np.partition(proj, proj.shape[0] - k)[proj.shape[0] - k])


class RegionEngine:
    """Depth regions of one planar cloud for levels inside a band.

    The expensive part, the per-pivot angular counts, is done once for the
    band ``[klo, khi]``; regions for any level inside the band are then a
    selection plus one halfplane intersection.
    """

    def __init__(self, cloud: PointCloud, klo: int = 1, khi: int | None = None,
                 tol: float = geo.DEFAULT_TOL):
        cloud.require_dim(2)
        self.cloud = cloud
        self.n = cloud.n
        self.klo = max(1, int(klo))
        self.khi = self.n if khi is None else min(self.n, int(khi))
        X = np.ascontiguousarray(cloud.points)
        self._X = X
        scale = float(np.abs(X).max()) if X.size else 1.0
        self.tol = tol * max(1.0, scale)
        # every region with k >= 1 lies in the hull, so a box a little larger
        # than the data keeps clipping error at the scale of the data
        lo, hi = X.min(axis=0), X.max(axis=0)
        self.center = 0.5 * (lo + hi)
        self.box_side = 2.0 * float((hi - lo).max()) + 2.0
        I, J, G, E = _level_pairs(X, self.klo, self.khi)
        d = X[J] - X[I]
        nrm = np.hypot(d[:, 0], d[:, 1])
        self._normals = np.column_stack([-d[:, 1], d[:, 0]]) / nrm[:, None]
        self._offsets = np.einsum("ij,ij->i", self._normals, X[I])
        self._G, self._E = G, E
        self._extra = self._extra_directions()

    def _extra_directions(self) -> np.ndarray:
        # axis directions are always valid constraints; a collinear cloud also
        # needs the directions along its line, where no pair normal points
        dirs = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        X = self._X
        far = X[np.argmax(np.hypot(*(X - X[0]).T))] - X[0]
        L = math.hypot(far[0], far[1])
        if L > 0:
            e = far / L
            off = (X - X[0]) @ np.array([-e[1], e[0]])
            if np.abs(off).max() <= self.tol:
                dirs += [(e[0], e[1]), (-e[0], -e[1])]
        return np.asarray(dirs)

    def halfplanes(self, k: int):
        if not (self.klo <= k <= self.khi):
            raise LevelError(f"level {k} outside engine band [{self.klo}, {self.khi}]")
        sel = (self._G < k) & (self._G + self._E >= k)
        normals = self._normals[sel]
        offsets = self._offsets[sel]
        ex = self._extra
        ex_off = np.array([_kth_largest(self._X @ u, k) for u in ex])
        return np.vstack([normals, ex]), np.concatenate([offsets, ex_off])

    def region(self, k: int) -> ConvexRegion:
        normals, offsets = self.halfplanes(k)
        return geo.intersect_arrays(normals, offsets, tol=self.tol, center=self.center,
                                    box_side=self.box_side)


def _check_level(cloud: PointCloud, k: int) -> None:
    if not (1 <= k <= cloud.n):
        raise LevelError(f"level k={k} must lie in [1, {cloud.n}]")


def depth_region(cloud: PointCloud, k: int) -> DepthRegionResult:
    """The set of points whose depth count is at least ``k``."""
    cloud.require_dim(2)
    _check_level(cloud, k)
    return DepthRegionResult(k, cloud.n, RegionEngine(cloud, k, k).region(k))


def depth_region_reference(cloud: PointCloud, k: int) -> DepthRegionResult:
    """Slow O(n^3) construction: k-th largest projection recomputed per direction.

    Kept as an independent check of :func:`depth_region` on small samples.
    """
    cloud.require_dim(2)
    _check_level(cloud, k)
    X = cloud.points
    n = cloud.n
    diff = (X[:, None, :] - X[None, :, :]).reshape(-1, 2)
    diff = diff[np.hypot(diff[:, 0], diff[:, 1]) > 0]
    normals = np.column_stack([-diff[:, 1], diff[:, 0]])
    normals = normals / np.hypot(normals[:, 0], normals[:, 1])[:, None]
    extra = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    if len(diff):
        # along-the-line directions matter only for collinear samples, but
        # including them is always valid
        extra += [tuple(v / np.hypot(*v)) for v in diff]
    normals = np.vstack([normals, np.asarray(extra)]) if len(normals) else np.asarray(extra)
    proj = X @ normals.T
    offsets = np.sort(proj, axis=0)[n - k]
    scale = max(1.0, float(np.abs(X).max()))
    lo, hi = X.min(axis=0), X.max(axis=0)
    region = geo.intersect_arrays(normals, offsets, tol=geo.DEFAULT_TOL * scale,
                                  center=0.5 * (lo + hi),
                                  box_side=2.0 * float((hi - lo).max()) + 2.0)
    return DepthRegionResult(k, n, region)


def _witness_level(cloud: PointCloud) -> int:
    """Depth count of the coordinatewise median: a cheap lower bound for k*."""
    z = np.median(cloud.points, axis=0)
    return int(depth_counts_2d(cloud.points, z[None, :])[0])


def _has_duplicates(X: np.ndarray) -> bool:
    return np.unique(X, axis=0).shape[0] < X.shape[0]


class MedianSolver:
    """Binary search for the maximal depth level and its region."""

    def __init__(self, cloud: PointCloud):
        cloud.require_dim(2)
        self.cloud = cloud
        n = cloud.n
        lo = max(-(-n // 3), _witness_level(cloud))
        hi = -(-n // 2)
        if _has_duplicates(cloud.points):
            # repeated points can push the maximal depth above ceil(n/2)
            hi = n
        lo = min(lo, hi)
        self.engine = RegionEngine(cloud, lo, hi)
        self._cache: dict[int, ConvexRegion] = {}
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.region(mid).is_empty:
                hi = mid - 1
            else:
                lo = mid
        self.k_star = lo

    def region(self, k: int) -> ConvexRegion:
        if k not in self._cache:
            self._cache[k] = self.engine.region(k)
        return self._cache[k]

    @cached_property
    def median_set(self) -> ConvexRegion:
        return self.region(self.k_star)

    @cached_property
    def median(self) -> tuple[float, float]:
        return geo.region_barycenter(self.median_set)


def max_depth(cloud: PointCloud) -> int:
    """Largest ``k`` whose depth region is nonempty."""
    return MedianSolver(cloud).k_star


@dataclass(frozen=True)
class TukeyMedian:
    point: tuple[float, float]
    region: ConvexRegion
    level: int
    n: int

    def to_dict(self) -> dict:
        return {"median": list(self.point), "set": self.region.to_dict(),
                "level": self.level, "n": self.n}


def tukey_median(cloud: PointCloud) -> TukeyMedian:
    s = MedianSolver(cloud)
    return TukeyMedian(s.median, s.median_set, s.k_star, cloud.n)


def depth_contours(cloud: PointCloud, levels) -> list[DepthRegionResult]:
    """Nested depth regions for ascending levels in ``[1, k*]``."""
    cloud.require_dim(2)
    levels = [int(k) for k in levels]
    if not levels:
        return []
    if levels != sorted(levels):
        raise LevelError("levels must be sorted ascending")
    if levels[0] < 1:
        raise LevelError(f"level {levels[0]} below 1")
    k_star = max_depth(cloud)
    if levels[-1] > k_star:
        raise LevelError(f"level {levels[-1]} exceeds the maximal depth {k_star}")
    engine = RegionEngine(cloud, levels[0], levels[-1])
    return [DepthRegionResult(k, cloud.n, engine.region(k)) for k in levels]


# -- one-dimensional analogues ------------------------------------------------


def depth_region_1d(x, k: int) -> tuple[float, float] | None:
    """``[x_(k), x_(n-k+1)]`` or ``None`` when that interval is empty."""
    xs = np.sort(np.asarray(x, dtype=float).reshape(-1))
    n = xs.shape[0]
    if not (1 <= k <= n):
        raise LevelError(f"level k={k} must lie in [1, {n}]")
    lo, hi = xs[k - 1], xs[n - k]
    return (float(lo), float(hi)) if lo <= hi else None


def median_set_1d(x) -> tuple[int, tuple[float, float]]:
    """Maximal depth count and the interval of deepest points on the line."""
    xs = np.sort(np.asarray(x, dtype=float).reshape(-1))
    n = xs.shape[0]
    k = -(-n // 2)
    while k < n and xs[k] <= xs[n - k - 1]:
        k += 1
    return k, (float(xs[k - 1]), float(xs[n - k]))


# -- Stahel-Donoho surrogate --------------------------------------------------


def stahel_donoho_approx(cloud: PointCloud, n_dirs: int, seed=0, directions=None) -> np.ndarray:
    """Outlyingness-weighted mean with weights ``min(1, (c / O)^2)``.

    Outlyingness is the largest standardised projection distance
    ``|<x, u> - med| / MAD`` over sampled unit directions; directions with
    zero MAD are skipped, and ``c`` is the median outlyingness.
    """
    X = cloud.points
    if cloud.n < 2:
        raise ValueError("need at least two points")
    if directions is None:
        if n_dirs < 1:
            raise ValueError("n_dirs must be >= 1")
        g = np.random.default_rng(seed).standard_normal((n_dirs, cloud.dim))
        directions = g / np.linalg.norm(g, axis=1, keepdims=True)
    U = np.asarray(directions, dtype=float).reshape(-1, cloud.dim)
    proj = X @ U.T
    med = np.median(proj, axis=0)
    mad = np.median(np.abs(proj - med), axis=0)
    ok = mad > 0
    if not ok.any():
        raise ValueError("every direction has zero MAD")
    out = (np.abs(proj[:, ok] - med[ok]) / mad[ok]).max(axis=1)
    c = float(np.median(out))
    with np.errstate(divide="ignore"):
        w = np.where(out > 0, np.minimum(1.0, (c / np.where(out > 0, out, 1.0)) ** 2), 1.0)
    return (w[:, None] * X).sum(axis=0) / w.sum()

