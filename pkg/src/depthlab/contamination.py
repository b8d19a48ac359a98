"""Adversarial replacement of a fraction of a sample."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud

FAR_CLUSTER = "far_cluster"
SMEAR = "smear"
REPLAY = "replay"


class PlanError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ContaminationPlan:
    """Replace ``floor(epsilon * n)`` points of a sample.

    ``far_cluster`` stacks them at ``centroid + radius * direction``;
    ``smear`` scatters them uniformly over a disk of ``radius`` around the
    centroid; ``replay`` substitutes caller-supplied points in order.
    """

    epsilon: float
    kind: str = FAR_CLUSTER
    radius: float = 0.0
    direction: tuple = (1.0, 0.0)
    points: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 0.5):
            raise PlanError(f"epsilon must lie in [0, 0.5), got {self.epsilon}")
        if self.kind not in (FAR_CLUSTER, SMEAR, REPLAY):
            raise PlanError(f"unknown strategy {self.kind!r}")
        if self.kind == FAR_CLUSTER:
            u = np.asarray(self.direction, dtype=float)
            nrm = float(np.linalg.norm(u))
            if nrm == 0:
                raise PlanError("far_cluster direction must be nonzero")
            object.__setattr__(self, "direction", tuple((u / nrm).tolist()))
        if self.kind == REPLAY:
            if self.points is None:
                raise PlanError("replay needs points")
            object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, float)))

    def count(self, n: int) -> int:
        return int(np.floor(self.epsilon * n + 1e-12))

    def to_dict(self) -> dict:
        strat: dict = {"kind": self.kind}
        if self.kind == FAR_CLUSTER:
            strat.update(direction=list(self.direction), radius=self.radius)
        elif self.kind == SMEAR:
            strat.update(radius=self.radius)
        else:
            strat.update(points=self.points.tolist())
        return {"epsilon": self.epsilon, "strategy": strat}

    @classmethod
    def from_dict(cls, obj: dict) -> "ContaminationPlan":
        try:
            strat = obj["strategy"]
            kind = strat["kind"]
            return cls(float(obj["epsilon"]), kind, float(strat.get("radius", 0.0)),
                       tuple(strat.get("direction", (1.0, 0.0))), strat.get("points"))
        except (KeyError, TypeError) as exc:
            raise PlanError(f"malformed plan: {exc}") from None


def contaminate(cloud: PointCloud, plan: ContaminationPlan, seed) -> PointCloud:
    n, d = cloud.n, cloud.dim
    m = plan.count(n)
    if m == 0:
        return cloud
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    Y = np.array(cloud.points)
    centroid = cloud.points.mean(axis=0)
    if plan.kind == FAR_CLUSTER:
        u = np.asarray(plan.direction, dtype=float)
        if u.shape[0] != d:
            raise PlanError(f"direction has dim {u.shape[0]}, cloud has dim {d}")
        Y[idx] = centroid + plan.radius * u
    elif plan.kind == SMEAR:
        g = rng.standard_normal((m, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = plan.radius * rng.random(m) ** (1.0 / d)
        Y[idx] = centroid + r[:, None] * g
    else:
        P = plan.points
        if P.shape[0] < m or P.shape[1] != d:
            raise PlanError(f"replay needs at least {m} points of dim {d}, got {P.shape}")
        Y[idx] = P[:m]
    return PointCloud(Y)
