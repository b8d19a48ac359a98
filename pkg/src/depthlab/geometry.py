"""Planar convex geometry: halfplanes, convex regions, clipping.

Halfplanes are kept in support-function form ``{z : <z, u> <= c}`` with a
unit normal ``u``.  Intersections are computed by clipping a large box, and
degenerate results (a segment or a single point) are recognised after the
fact by collapsing vertices that lie within a tolerance of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

EMPTY = "empty"
POINT = "point"
SEGMENT = "segment"
POLYGON = "polygon"
KINDS = (EMPTY, POINT, SEGMENT, POLYGON)

DEFAULT_TOL = 1e-9
BOX_SIDE = 1e6


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class HalfPlane:
    """The closed halfplane ``{z : <z, normal> <= offset}``."""

    normal: tuple[float, float]
    offset: float

    def __post_init__(self):
        nx, ny = self.normal
        if not (math.isfinite(nx) and math.isfinite(ny) and math.isfinite(self.offset)):
            raise GeometryError("halfplane coefficients must be finite")
        if abs(math.hypot(nx, ny) - 1.0) > 1e-12:
            raise GeometryError(f"halfplane normal must be unit, got {self.normal}")

    @classmethod
    def from_vector(cls, u, c) -> "HalfPlane":
        """Build from an arbitrary nonzero normal, rescaling ``c`` to match."""
        ux, uy = float(u[0]), float(u[1])
        norm = math.hypot(ux, uy)
        if norm == 0.0:
            raise GeometryError("zero normal")
        return cls((ux / norm, uy / norm), float(c) / norm)

    def slack(self, p) -> float:
        return self.offset - (self.normal[0] * p[0] + self.normal[1] * p[1])


@dataclass(frozen=True)
class ConvexRegion:
    kind: str
    vertices: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeometryError(f"unknown region kind {self.kind!r}")
        expected = {EMPTY: (0, 0), POINT: (1, 1), SEGMENT: (2, 2)}
        lo, hi = expected.get(self.kind, (3, None))
        nv = len(self.vertices)
        if nv < lo or (hi is not None and nv > hi):
            raise GeometryError(f"{self.kind} region cannot have {nv} vertices")

    @property
    def is_empty(self) -> bool:
        return self.kind == EMPTY

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_dict(cls, obj: dict) -> "ConvexRegion":
        verts = tuple((float(x), float(y)) for x, y in obj.get("vertices", []))
        return cls(obj["kind"], verts)

    @classmethod
    def empty(cls) -> "ConvexRegion":
        return cls(EMPTY, ())


# -- canonical construction -------------------------------------------------


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _dedupe_cyclic(pts: list, tol: float) -> list:
    out: list = []
    for p in pts:
        if not out or math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > tol:
            out.append(p)
    while len(out) > 1 and math.hypot(out[0][0] - out[-1][0], out[0][1] - out[-1][1]) <= tol:
        out.pop()
    return out


def region_from_points(points, tol: float = DEFAULT_TOL) -> ConvexRegion:
    """Classify the convex hull of ``points`` into one of the four region kinds.

    Points closer than ``tol`` are merged; a hull whose width is below ``tol``
    becomes a segment.  The vertex list is counterclockwise and starts at the
    lexicographically smallest vertex.
    """
    pts = sorted({(float(x), float(y)) for x, y in np.asarray(points, dtype=float).reshape(-1, 2)})
    if not pts:
        return ConvexRegion.empty()
    # Andrew's monotone chain
    if len(pts) > 2:
        lower: list = []
        for p in pts:
            while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
                lower.pop()
            lower.append(p)
        upper: list = []
        for p in reversed(pts):
            while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
                upper.pop()
            upper.append(p)
        hull = lower[:-1] + upper[:-1]
    else:
        hull = list(pts)
    hull = _dedupe_cyclic(hull, tol)
    if len(hull) == 1:
        return ConvexRegion(POINT, (hull[0],))

    arr = np.asarray(hull)
    diff = arr[:, None, :] - arr[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    a, b = arr[i], arr[j]
    length = math.sqrt(d2[i, j])
    if length <= tol:
        return ConvexRegion(POINT, (tuple(min(hull)),))
    ex, ey = (b - a) / length
    offsets = (arr[:, 0] - a[0]) * (-ey) + (arr[:, 1] - a[1]) * ex
    if np.max(np.abs(offsets)) <= tol:
        ends = sorted([tuple(map(float, a)), tuple(map(float, b))])
        return ConvexRegion(SEGMENT, (ends[0], ends[1]))

    # prune vertices that are (nearly) collinear with their neighbours
    changed = True
    while changed and len(hull) > 3:
        changed = False
        for idx in range(len(hull)):
            p, q, r = hull[idx - 1], hull[idx], hull[(idx + 1) % len(hull)]
            base = math.hypot(r[0] - p[0], r[1] - p[1])
            if base > 0 and abs(_cross(p, q, r)) / base <= tol:
                del hull[idx]
                changed = True
                break
    # lexicographic start, treating coordinates within tol as equal
    xmin = min(p[0] for p in hull)
    start = min((t for t in range(len(hull)) if hull[t][0] <= xmin + tol),
                key=lambda t: hull[t][1])
    hull = hull[start:] + hull[:start]
    return ConvexRegion(POLYGON, tuple(hull))


# -- halfplane intersection --------------------------------------------------


def _clip(poly: list, ux: float, uy: float, c: float, tol: float) -> list:
    """Sutherland-Hodgman step of a convex vertex cycle against one halfplane."""
    m = len(poly)
    s = [ux * p[0] + uy * p[1] - c for p in poly]
    if max(s) <= tol:
        return poly
    if min(s) > tol:
        return []
    if m == 1:
        return poly if s[0] <= tol else []
    out = []
    for idx in range(m):
        p, sp = poly[idx], s[idx]
        q, sq = poly[(idx + 1) % m], s[(idx + 1) % m]
        if sp <= tol:
            out.append(p)
        if (sp <= tol) != (sq <= tol):
            denom = sp - sq
            t = sp / denom if denom != 0.0 else 0.0
            t = min(1.0, max(0.0, t))
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return _dedupe_cyclic(out, tol * 0.5) if len(out) > 1 else out


def intersect_arrays(normals: np.ndarray, offsets: np.ndarray, tol: float = DEFAULT_TOL,
                     center=(0.0, 0.0), box_side: float = BOX_SIDE) -> ConvexRegion:
    """Intersect ``{z : normals[i] . z <= offsets[i]}`` inside a bounding box.

    Halfplanes are fed to the clipper in rounds: each round clips with the
    few constraints that currently cut deepest, then discards every
    constraint already satisfied by all vertices.  The result is the same set
    as clipping with all constraints in turn.
    """
    normals = np.asarray(normals, dtype=float).reshape(-1, 2)
    offsets = np.asarray(offsets, dtype=float).reshape(-1)
    cx, cy = float(center[0]), float(center[1])
    h = box_side / 2.0
    poly = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)]
    active = np.arange(len(offsets))
    batch = 8
    while active.size:
        verts = np.asarray(poly)
        viol = (normals[active] @ verts.T).max(axis=1) - offsets[active]
        keep = viol > tol
        active, viol = active[keep], viol[keep]
        if not active.size:
            break
        order = np.argsort(-viol, kind="stable")[:batch]
        for idx in active[order]:
            poly = _clip(poly, normals[idx, 0], normals[idx, 1], offsets[idx], tol)
            if not poly:
                return ConvexRegion.empty()
        active = np.delete(active, order)
    return region_from_points(poly, tol)


def intersect_halfplanes(halfplanes: Sequence[HalfPlane], tol: float = DEFAULT_TOL,
                         box_side: float = BOX_SIDE) -> ConvexRegion:
    if not halfplanes:
        raise GeometryError("need at least one halfplane")
    normals = np.array([hp.normal for hp in halfplanes], dtype=float)
    offsets = np.array([hp.offset for hp in halfplanes], dtype=float)
    return intersect_arrays(normals, offsets, tol=tol, box_side=box_side)


# -- measures ----------------------------------------------------------------


def region_diameter(region: ConvexRegion) -> float:
    """Largest distance between two points of the region."""
    if region.kind in (EMPTY, POINT):
        return 0.0
    v = region.as_array()
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max()))


def region_barycenter(region: ConvexRegion) -> tuple[float, float]:
    if region.kind == EMPTY:
        raise GeometryError("barycenter of an empty region is undefined")
    v = region.as_array()
    if region.kind == POINT:
        return (float(v[0, 0]), float(v[0, 1]))
    if region.kind == SEGMENT:
        mid = 0.5 * (v[0] + v[1])
        return (float(mid[0]), float(mid[1]))
    # shoelace centroid about the first vertex for accuracy on small polygons
    o = v[0]
    p = v - o
    x0, y0 = p[:, 0], p[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cr = x0 * y1 - x1 * y0
    area2 = cr.sum()
    if area2 == 0.0:
        mid = v.mean(axis=0)
        return (float(mid[0]), float(mid[1]))
    cx = ((x0 + x1) * cr).sum() / (3.0 * area2)
    cy = ((y0 + y1) * cr).sum() / (3.0 * area2)
    return (float(o[0] + cx), float(o[1] + cy))


def region_area(region: ConvexRegion) -> float:
    if region.kind != POLYGON:
        return 0.0
    v = region.as_array()
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def region_facets(region: ConvexRegion) -> list[HalfPlane]:
    """Outward facet halfplanes of a polygon region."""
    if region.kind != POLYGON:
        raise GeometryError("facets are defined for polygons only")
    v = region.vertices
    out = []
    for idx in range(len(v)):
        p, q = v[idx], v[(idx + 1) % len(v)]
        # ccw order: outward normal is the edge direction rotated clockwise
        nx, ny = q[1] - p[1], -(q[0] - p[0])
        out.append(HalfPlane.from_vector((nx, ny), nx * p[0] + ny * p[1]))
    return out


def distance_to_region(region: ConvexRegion, p) -> float:
    """Signed distance: negative inside a polygon, positive outside."""
    if region.kind == EMPTY:
        return math.inf
    v = region.as_array()
    px, py = float(p[0]), float(p[1])
    if region.kind == POINT:
        return math.hypot(px - v[0, 0], py - v[0, 1])
    if region.kind == SEGMENT:
        return _segment_distance(px, py, v[0], v[1])
    slacks = [hp.slack((px, py)) for hp in region_facets(region)]
    if min(slacks) >= 0:
        return -min(slacks)
    m = len(v)
    return min(_segment_distance(px, py, v[i], v[(i + 1) % m]) for i in range(m))


def _segment_distance(px, py, a, b) -> float:
    ax, ay = float(a[0]), float(a[1])
    dx, dy = float(b[0]) - ax, float(b[1]) - ay
    L2 = dx * dx + dy * dy
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / L2))
    return math.hypot(px - ax - t * dx, py - ay - t * dy)


def region_contains(region: ConvexRegion, p, tol: float = DEFAULT_TOL) -> bool:
    return distance_to_region(region, p) <= tol


def region_subset(inner: ConvexRegion, outer: ConvexRegion, tol: float = DEFAULT_TOL) -> bool:
    """Convex containment, checked on the vertices of ``inner``."""
    if inner.kind == EMPTY:
        return True
    if outer.kind == EMPTY:
        return False
    return all(region_contains(outer, v, tol) for v in inner.vertices)


def support(region: ConvexRegion, u) -> float:
    """Support function ``max <v, u>`` over the region."""
    if region.kind == EMPTY:
        return -math.inf
    return float((region.as_array() @ np.asarray(u, dtype=float)).max())


def transform_region(region: ConvexRegion, M, b, tol: float = DEFAULT_TOL) -> ConvexRegion:
    if region.kind == EMPTY:
        return region
    v = region.as_array() @ np.asarray(M, dtype=float).T + np.asarray(b, dtype=float)
    return region_from_points(v, tol)


def round_region(region: ConvexRegion, ndigits: int = 9) -> ConvexRegion:
    verts = tuple((round(x, ndigits) + 0.0, round(y, ndigits) + 0.0) for x, y in region.vertices)
    return ConvexRegion(region.kind, verts)


def halfplanes_from_arrays(normals: Iterable, offsets: Iterable) -> list[HalfPlane]:
    return [HalfPlane.from_vector(u, c) for u, c in zip(normals, offsets)]
