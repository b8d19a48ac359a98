"""Point clouds and their CSV form."""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class CloudError(ValueError):
    pass


class DimensionError(CloudError):
    pass


@dataclass(frozen=True, eq=False)
class PointCloud:
    """An ordered sample of ``n`` points in ``R^dim``.

    ``points`` is stored as a read-only ``(n, dim)`` float array so clouds can
    be shared between workers without copies.
    """

    points: np.ndarray

    def __post_init__(self):
        arr = np.array(self.points, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise CloudError(f"a cloud needs at least one point, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise CloudError("cloud coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def require_dim(self, d: int) -> None:
        if self.dim != d:
            raise DimensionError(f"expected a {d}-dimensional cloud, got dim={self.dim}")

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, PointCloud) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


@dataclass(frozen=True)
class DepthValue:
    """Empirical depth ``count / n``, kept as integers."""

    count: int
    n: int

    def __post_init__(self):
        if not (0 <= self.count <= self.n):
            raise ValueError(f"depth count {self.count} outside [0, {self.n}]")

    @property
    def value(self) -> float:
        return self.count / self.n

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.count, self.n)

    def to_dict(self) -> dict:
        return {"count": self.count, "n": self.n, "depth": self.value}


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def cloud_to_csv(cloud: PointCloud) -> str:
    header = ",".join(f"x{i + 1}" for i in range(cloud.dim))
    lines = [header]
    lines.extend(",".join(format_float(v) for v in row) for row in cloud.points)
    return "\n".join(lines) + "\n"


def cloud_from_csv(text: str) -> PointCloud:
    """Parse the cloud CSV dialect; errors carry the offending line number."""
    rows = io.StringIO(text).read().split("\n")
    if rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise CloudError("line 1: missing header")
    header = [h.strip() for h in rows[0].split(",")]
    dim = len(header)
    if header != [f"x{i + 1}" for i in range(dim)]:
        raise CloudError(f"line 1: header must be x1,...,xd, got {rows[0]!r}")
    data = []
    for lineno, line in enumerate(rows[1:], start=2):
        fields = line.split(",")
        if len(fields) != dim:
            raise CloudError(f"line {lineno}: expected {dim} fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError as exc:
            raise CloudError(f"line {lineno}: {exc}") from None
        if not all(np.isfinite(vals)):
            raise CloudError(f"line {lineno}: non-finite coordinate")
        data.append(vals)
    if not data:
        raise CloudError("line 2: cloud has no points")
    return PointCloud(np.asarray(data, dtype=float))
