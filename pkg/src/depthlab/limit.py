"""Simulation of the limiting depth process of a standard bivariate Gaussian.

``W(z) = min_v [G(v) - <z, v> / sqrt(2 pi)]`` where ``G`` is the Brownian
bridge indexed by halfplanes through the origin, discretised on an
equispaced grid of directions and evaluated on a square lattice clipped to
a disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from . import geometry as geo
from .models import box_muller

DRIFT = 1.0 / math.sqrt(2.0 * math.pi)
MIN_TOL = 1e-9


class FactorizationError(RuntimeError):
    pass


def bridge_covariance(theta: float) -> float:
    """Cov of halfplane indicators through the origin at angle ``theta`` apart."""
    theta = float(theta)
    if not (0.0 <= theta <= math.pi):
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return (math.pi - theta) / (2.0 * math.pi) - 0.25


@dataclass(frozen=True)
class DirectionGrid:
    m: int

    def __post_init__(self):
        if self.m < 2 or self.m % 2:
            raise ValueError(f"direction grid needs an even count, got {self.m}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.m) / self.m

    @property
    def vectors(self) -> np.ndarray:
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a)])


def grid_covariance(m: int) -> np.ndarray:
    a = 2.0 * math.pi * np.arange(m) / m
    diff = np.abs(a[:, None] - a[None, :])
    theta = np.minimum(diff, 2.0 * math.pi - diff)
    return (math.pi - theta) / (2.0 * math.pi) - 0.25


@lru_cache(maxsize=8)
def _half_factor(m: int) -> np.ndarray:
    C = grid_covariance(m)[: m // 2, : m // 2]
    w, V = np.linalg.eigh(C)
    if w.min() < -1e-8 * max(1.0, w.max()):
        raise FactorizationError(f"grid covariance not PSD: smallest eigenvalue {w.min():.3e}")
    F = V * np.sqrt(np.clip(w, 0.0, None))
    F.setflags(write=False)
    return F


def simulate_bridge(grid: DirectionGrid, seed) -> np.ndarray:
    """One draw of the bridge on the grid; the antipodal half is the negation."""
    if grid.m < 8:
        raise ValueError("need at least 8 directions")
    half = grid.m // 2
    F = _half_factor(grid.m)
    z = box_muller(np.random.default_rng(seed), half)
    g = F @ z
    return np.concatenate([g, -g])


@dataclass(frozen=True)
class Lattice:
    """Square lattice of spacing ``h`` restricted to the closed disk of ``radius``."""

    radius: float
    spacing: float

    @property
    def half_steps(self) -> int:
        return int(math.floor(self.radius / self.spacing + 1e-9))

    def indices(self) -> np.ndarray:
        s = self.half_steps
        ii, jj = np.meshgrid(np.arange(-s, s + 1), np.arange(-s, s + 1), indexing="ij")
        idx = np.column_stack([ii.ravel(), jj.ravel()])
        r = self.radius / self.spacing
        keep = idx[:, 0] ** 2 + idx[:, 1] ** 2 <= r * r + 1e-9
        return idx[keep]

    def points(self) -> np.ndarray:
        return self.indices() * self.spacing


@dataclass(frozen=True, eq=False)
class LimitField:
    grid: DirectionGrid
    bridge_values: np.ndarray
    lattice: Lattice
    points: np.ndarray
    indices: np.ndarray
    w_values: np.ndarray
    argmax: tuple[float, float]
    w_max: float
    refined_argmax: tuple[float, float]
    refined_w_max: float
    minimizer_angles: np.ndarray

    @property
    def spacing(self) -> float:
        return self.lattice.spacing

    def as_grid(self) -> np.ndarray:
        """W on the full square index grid, NaN outside the disk."""
        s = self.lattice.half_steps
        out = np.full((2 * s + 1, 2 * s + 1), np.nan)
        out[self.indices[:, 0] + s, self.indices[:, 1] + s] = self.w_values
        return out

    def summary(self) -> dict:
        return {"argmax": list(self.argmax), "w_max": self.w_max,
                "refined_argmax": list(self.refined_argmax),
                "refined_w_max": self.refined_w_max,
                "minimizer_angles": self.minimizer_angles.tolist(),
                "spacing": self.spacing, "m": self.grid.m}


def w_at(bridge: np.ndarray, grid: DirectionGrid, Z: np.ndarray, drift: float = DRIFT,
         chunk: int = 4096) -> np.ndarray:
    V = grid.vectors
    Z = np.asarray(Z, dtype=float).reshape(-1, 2)
    out = np.empty(Z.shape[0])
    for s in range(0, Z.shape[0], chunk):
        out[s:s + chunk] = (bridge[None, :] - drift * (Z[s:s + chunk] @ V.T)).min(axis=1)
    return out


def refine_maximizer(bridge: np.ndarray, grid: DirectionGrid, drift: float = DRIFT,
                     bound: float | None = None):
    """Exact maximiser of the discretised ``W`` as a linear program.

    maximise t subject to ``t <= G_i - drift <z, v_i>`` for every grid
    direction.  Returns ``(z, w_max, active_angles)``.
    """
    V = grid.vectors
    m = V.shape[0]
    A = np.column_stack([drift * V, np.ones(m)])
    bounds = [(None, None)] * 3 if bound is None else [(-bound, bound)] * 2 + [(None, None)]
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=A, b_ub=bridge, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"maximiser LP failed: {res.message}")
    z = res.x[:2]
    vals = bridge - drift * (V @ z)
    w = float(vals.min())
    active = grid.angles[vals <= w + MIN_TOL]
    return (float(z[0]), float(z[1])), w, active


def evaluate_w(bridge: np.ndarray, grid: DirectionGrid, lattice: Lattice,
               drift: float = DRIFT) -> LimitField:
    bridge = np.asarray(bridge, dtype=float)
    idx = lattice.indices()
    pts = idx * lattice.spacing
    w = w_at(bridge, grid, pts, drift)
    best = int(np.argmax(w))
    z_hat, w_ref, active = refine_maximizer(bridge, grid, drift)
    return LimitField(grid, bridge, lattice, pts, idx, w,
                      (float(pts[best, 0]), float(pts[best, 1])), float(w[best]),
                      z_hat, w_ref, active)


def simulate_field(m: int = 512, radius: float = 8.0, spacing: float = 0.1, seed=0) -> LimitField:
    grid = DirectionGrid(m)
    return evaluate_w(simulate_bridge(grid, seed), grid, Lattice(radius, spacing))


def limit_region_diameter(field: LimitField, beta: float) -> float:
    """Diameter of the lattice points with ``W >= max W - beta``."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    sel = field.points[field.w_values >= field.w_max - beta]
    return geo.region_diameter(geo.region_from_points(sel, tol=1e-12))


def origin_in_hull(angles, tol: float = 1e-6) -> bool:
    """Whether the unit vectors at ``angles`` have the origin in their convex hull."""
    a = np.sort(np.mod(np.asarray(angles, dtype=float), 2.0 * math.pi))
    if a.size == 0:
        return False
    # the origin is outside the hull iff all directions fit in an open half-circle
    gaps = np.diff(np.append(a, a[0] + 2.0 * math.pi))
    return bool(gaps.max() <= math.pi + tol)


def refinement_change(m: int, seed, lattice: Lattice) -> float:
    """Max |W_m - W_2m| over the lattice, the coarse bridge being a subsample of the fine one."""
    fine = DirectionGrid(2 * m)
    g_fine = simulate_bridge(fine, seed)
    coarse = DirectionGrid(m)
    pts = lattice.points()
    w_f = w_at(g_fine, fine, pts)
    w_c = w_at(g_fine[::2], coarse, pts)
    return float(np.abs(w_f - w_c).max())
