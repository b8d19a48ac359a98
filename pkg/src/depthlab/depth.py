"""Halfspace depth of a point with respect to an empirical sample.

The depth count of ``z`` is ``min_u #{j : <X_j - z, u> >= 0}`` over unit
directions ``u``.  In the plane this is computed exactly from the sorted
angles of ``X_j - z``: the smallest closed halfplane through ``z`` is the
complement of the fullest open one, and the fullest open halfplane can be
rotated until its trailing edge touches a sample ray.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .cloud import DepthValue, DimensionError, PointCloud

ANGLE_TOL = 1e-9
# sine of the angle below which two rays count as collinear
TIE_TOL = 1e-12


def depth_1d(cloud: PointCloud, z: float) -> DepthValue:
    cloud.require_dim(1)
    x = cloud.points[:, 0]
    z = float(z)
    return DepthValue(int(min(np.count_nonzero(x <= z), np.count_nonzero(x >= z))), cloud.n)


@njit(cache=True)
def _exact_row(dx, dy, j, ccw, same, anti):
    ex, ey = dx[j], dy[j]
    le = math.hypot(ex, ey)
    c = 0
    s = 0
    a = 0
    for m in range(dx.shape[0]):
        if dx[m] == 0.0 and dy[m] == 0.0:
            continue
        cr = ex * dy[m] - ey * dx[m]
        thr = TIE_TOL * le * math.hypot(dx[m], dy[m])
        if cr > thr:
            c += 1
        elif cr >= -thr:
            if ex * dx[m] + ey * dy[m] > 0.0:
                s += 1
            else:
                a += 1
    ccw[j] = c
    same[j] = s
    anti[j] = a


@njit(cache=True)
def row_stats(dx, dy, ccw, same, anti):
    """Angular statistics of the vectors ``(dx[m], dy[m])`` around the origin.

    For each nonzero vector ``d_j`` fills ``ccw[j]`` = #{m : d_j x d_m > 0},
    ``same[j]`` = #{m on the ray of d_j} and ``anti[j]`` = #{m on the
    opposite ray}; zero vectors get -1.  Returns the number of zero vectors.
    Angles are sorted once and scanned with a pointer that only moves
    forward; entries with another ray within ``ANGLE_TOL`` of their own ray
    or its opposite are recounted with exact cross products.
    """
    n = dx.shape[0]
    idx = np.empty(n, np.int64)
    ang = np.empty(n)
    m = 0
    for k in range(n):
        if dx[k] == 0.0 and dy[k] == 0.0:
            ccw[k] = -1
            same[k] = -1
            anti[k] = -1
        else:
            idx[m] = k
            ang[m] = math.atan2(dy[k], dx[k])
            m += 1
    zeros = n - m
    if m == 0:
        return zeros
    order = np.argsort(ang[:m])
    srt = ang[:m][order]
    dbl = np.empty(2 * m)
    dbl[:m] = srt
    dbl[m:] = srt + 2.0 * math.pi
    tol = ANGLE_TOL
    h = 1
    for p in range(m):
        a = srt[p]
        if h < p + 1:
            h = p + 1
        while dbl[h] < a + math.pi - tol:
            h += 1
        j = idx[order[p]]
        clean = True
        if m > 1:
            prev = dbl[p - 1] if p > 0 else dbl[m - 1] - 2.0 * math.pi
            if dbl[p + 1] - a <= tol or a - prev <= tol or dbl[h] <= a + math.pi + tol:
                clean = False
        if clean:
            ccw[j] = h - (p + 1)
            same[j] = 1
            anti[j] = 0
        else:
            _exact_row(dx, dy, j, ccw, same, anti)
    return zeros


def angular_counts(dx: np.ndarray, dy: np.ndarray):
    """Row-wise :func:`row_stats` over ``(r, n)`` arrays of difference vectors.

    Returns ``ccw, same, anti`` of shape ``(r, n)`` and ``zeros`` of shape
    ``(r,)``.
    """
    dx = np.ascontiguousarray(dx, dtype=float)
    dy = np.ascontiguousarray(dy, dtype=float)
    r, n = dx.shape
    ccw = np.empty((r, n), np.int64)
    same = np.empty((r, n), np.int64)
    anti = np.empty((r, n), np.int64)
    zeros = _all_rows(dx, dy, ccw, same, anti)
    return ccw, same, anti, zeros


@njit(cache=True)
def _all_rows(dx, dy, ccw, same, anti):
    r = dx.shape[0]
    zeros = np.empty(r, np.int64)
    for i in range(r):
        zeros[i] = row_stats(dx[i], dy[i], ccw[i], same[i], anti[i])
    return zeros


@njit(cache=True)
def _depth_counts(X, Q):
    n = X.shape[0]
    out = np.empty(Q.shape[0], np.int64)
    dx = np.empty(n)
    dy = np.empty(n)
    ccw = np.empty(n, np.int64)
    same = np.empty(n, np.int64)
    anti = np.empty(n, np.int64)
    for q in range(Q.shape[0]):
        for k in range(n):
            dx[k] = X[k, 0] - Q[q, 0]
            dy[k] = X[k, 1] - Q[q, 1]
        zeros = row_stats(dx, dy, ccw, same, anti)
        # fullest open halfplane = a ray plus everything strictly ccw of it
        fullest = 0
        for k in range(n):
            if ccw[k] >= 0 and ccw[k] + same[k] > fullest:
                fullest = ccw[k] + same[k]
        out[q] = n - fullest
    return out


def depth_counts_2d(points: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Exact depth counts of many query points."""
    X = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
    Q = np.ascontiguousarray(np.asarray(queries, dtype=float).reshape(-1, 2))
    return _depth_counts(X, Q)


def depth_exact_2d(cloud: PointCloud, z) -> DepthValue:
    cloud.require_dim(2)
    count = depth_counts_2d(cloud.points, np.asarray(z, dtype=float).reshape(1, 2))[0]
    return DepthValue(int(count), cloud.n)


def depth(cloud: PointCloud, z, n_dirs: int = 1000, seed=0) -> DepthValue:
    """Exact depth for d <= 2, direction-sampled approximation otherwise."""
    if cloud.dim == 1:
        return depth_1d(cloud, np.ravel(z)[0])
    if cloud.dim == 2:
        return depth_exact_2d(cloud, z)
    return depth_approx(cloud, z, n_dirs, seed)


def depth_oracle(cloud: PointCloud, z) -> DepthValue:
    """Brute-force depth for small samples, used to check the sweep.

    Evaluates the closed count in every direction perpendicular to some
    ``X_j - z`` and in the middle of every gap between consecutive such
    directions, and returns the minimum.  Cost is O(n^2).
    """
    n = cloud.n
    if cloud.dim > 2:
        raise DimensionError("the oracle handles d <= 2 only")
    if n > 500:
        raise ValueError(f"oracle limited to n <= 500, got {n}")
    pts = cloud.points
    if cloud.dim == 1:
        x = pts[:, 0]
        zz = float(np.ravel(z)[0])
        right = sum(1 for v in x if v - zz >= 0)
        left = sum(1 for v in x if zz - v >= 0)
        return DepthValue(min(left, right), n)

    z = np.asarray(z, dtype=float).reshape(2)
    d = pts - z
    moved = ~((d[:, 0] == 0.0) & (d[:, 1] == 0.0))
    pinned = n - int(moved.sum())
    d = d[moved]
    if d.shape[0] == 0:
        return DepthValue(n, n)
    best = d.shape[0]
    # perpendicular directions: u = rot90(d_j) gives <d_m, u> = d_j x d_m
    lens = np.hypot(d[:, 0], d[:, 1])
    for j in range(d.shape[0]):
        crs = d[:, 1] * d[j, 0] - d[:, 0] * d[j, 1]
        eps = 1e-12 * lens * lens[j]
        best = min(best, int((crs >= -eps).sum()), int((crs <= eps).sum()))
    # open arcs between consecutive critical angles
    base = np.arctan2(d[:, 1], d[:, 0])
    crit = np.sort(np.mod(np.concatenate([base + math.pi / 2, base - math.pi / 2]), 2 * math.pi))
    gaps = np.diff(np.append(crit, crit[0] + 2 * math.pi))
    for a, g in zip(crit, gaps):
        if g <= 1e-12:
            continue
        mid = a + g / 2
        proj = d[:, 0] * math.cos(mid) + d[:, 1] * math.sin(mid)
        best = min(best, int((proj >= 0).sum()))
    return DepthValue(best + pinned, n)


def depth_approx(cloud: PointCloud, z, n_dirs: int, seed=0) -> DepthValue:
    """Upper approximation of the depth from sampled directions.

    Minimises the closed halfspace count over ``n_dirs`` directions drawn
    uniformly on the sphere together with the normalised ``X_j - z``.
    """
    if n_dirs < 1:
        raise ValueError("n_dirs must be >= 1")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != cloud.dim:
        raise DimensionError(f"query has dim {z.shape[0]}, cloud has dim {cloud.dim}")
    d = cloud.points - z
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_dirs, cloud.dim))
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    norms = np.linalg.norm(d, axis=1)
    aug = d[norms > 0] / norms[norms > 0, None]
    dirs = np.vstack([dirs, aug])
    proj = d @ dirs.T
    counts = (proj >= 0).sum(axis=0)
    return DepthValue(int(counts.min()), cloud.n)
