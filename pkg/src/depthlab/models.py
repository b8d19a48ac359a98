"""Elliptically symmetric sampling models and shape-matrix summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud

GAUSSIAN = "gaussian"
STUDENT_T = "student_t"
UNIT_RADIUS = "unit_radius"
RADIAL_KINDS = (GAUSSIAN, STUDENT_T, UNIT_RADIUS)

SYM_TOL = 1e-12


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Radial:
    kind: str = GAUSSIAN
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in RADIAL_KINDS:
            raise ModelError(f"unknown radial law {self.kind!r}")
        if self.kind == STUDENT_T and not (self.nu is not None and self.nu > 0):
            raise ModelError("student_t needs nu > 0")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == STUDENT_T:
            out["nu"] = self.nu
        return out


def _check_spd(shape: np.ndarray, tol: float = SYM_TOL) -> np.ndarray:
    S = np.asarray(shape, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ModelError(f"shape matrix must be square, got {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ModelError("shape matrix must be finite")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > tol * scale:
        raise ModelError("shape matrix is not symmetric")
    if np.linalg.eigvalsh(0.5 * (S + S.T)).min() <= 0:
        raise ModelError("shape matrix is not positive definite")
    return S


def sqrtm_spd(S: np.ndarray) -> np.ndarray:
    """Symmetric square root; exact on diagonal input."""
    S = np.asarray(S, dtype=float)
    if np.count_nonzero(S - np.diag(np.diag(S))) == 0:
        return np.diag(np.sqrt(np.diag(S)))
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


@dataclass(frozen=True, eq=False)
class EllipticalModel:
    """``X = mu + Sigma^{1/2} (radial variable) U`` with ``U`` uniform on the sphere.

    The gaussian case is normalised so that its covariance is exactly
    ``shape``.
    """

    mu: np.ndarray
    shape: np.ndarray
    radial: Radial = Radial()

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        S = _check_spd(self.shape)
        if S.shape[0] != mu.shape[0]:
            raise ModelError(f"mu has dim {mu.shape[0]} but shape is {S.shape}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "shape", S)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @classmethod
    def standard(cls, d: int = 2, radial: Radial = Radial()) -> "EllipticalModel":
        return cls(np.zeros(d), np.eye(d), radial)

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "shape": self.shape.tolist(),
                "radial": self.radial.to_dict()}

    @classmethod
    def from_dict(cls, obj: dict) -> "EllipticalModel":
        try:
            rad = obj.get("radial", {"kind": GAUSSIAN})
            radial = Radial(rad["kind"], rad.get("nu"))
            return cls(np.asarray(obj["mu"], float), np.asarray(obj["shape"], float), radial)
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed model: {exc}") from None


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` standard normals from pairs of uniforms."""
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2.0 * math.pi * u2)
    z[1::2] = r * np.sin(2.0 * math.pi * u2)
    return z[:size]


def standard_normals(n: int, d: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return box_muller(rng, n * d).reshape(n, d)


def sample_elliptical(model: EllipticalModel, n: int, seed) -> PointCloud:
    if n < 1:
        raise ModelError("n must be >= 1")
    d = model.dim
    rng = np.random.default_rng(seed)
    Z = box_muller(rng, n * d).reshape(n, d)
    kind = model.radial.kind
    if kind == STUDENT_T:
        nu = float(model.radial.nu)
        W = rng.gamma(nu / 2.0, 2.0, size=n)
        Z = Z / np.sqrt(W / nu)[:, None]
    elif kind == UNIT_RADIUS:
        Z = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    return PointCloud(model.mu + Z @ sqrtm_spd(model.shape).T)


@dataclass(frozen=True)
class ShapeSummary:
    trace: float
    spectral_norm: float
    effective_rank: float

    def to_dict(self) -> dict:
        return {"trace": self.trace, "spectral_norm": self.spectral_norm,
                "effective_rank": self.effective_rank}


def shape_summary(shape) -> ShapeSummary:
    S = _check_spd(shape)
    tr = float(np.trace(S))
    norm = float(np.linalg.eigvalsh(0.5 * (S + S.T)).max())
    return ShapeSummary(tr, norm, tr / norm)
