"""Line parameterisation, kernels, point clouds and the exact score function.

Lines are written in Hesse normal form ``r = x cos(theta) + y sin(theta)``.
The parameter strip is ``R x [0, pi]`` with ``(r, 0)`` and ``(-r, pi)`` naming
the same line; :func:`canonicalize` picks the representative with
``theta in [0, pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import kernels


class Point(NamedTuple):
    x: float
    y: float


class LineParams(NamedTuple):
    r: float
    theta: float


class KernelKind(str, Enum):
    HAT = "hat"
    RBF = "rbf"


class NormalizationMode(str, Enum):
    MEAN = "mean"
    SUM = "sum"


def _finite(*vals: float) -> bool:
    return all(math.isfinite(v) for v in vals)


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"kernel width must be positive and finite, got {self.sigma!r}")

    @property
    def code(self) -> int:
        return kernels.HAT if self.kind is KernelKind.HAT else kernels.RBF

    @property
    def lipschitz(self) -> float:
        """Lipschitz constant of the kernel on ``[0, inf)``."""
        if self.kind is KernelKind.HAT:
            return 1.0 / self.sigma
        return 1.0 / (self.sigma * math.sqrt(math.e))

    def inverse(self, level: float) -> float:
        """Smallest distance ``x`` with ``kernel(x) <= level`` for ``0 < level < 1``."""
        if not 0.0 < level < 1.0:
            raise ValueError(f"kernel level must lie in (0, 1), got {level!r}")
        if self.kind is KernelKind.HAT:
            return self.sigma * (1.0 - level)
        return self.sigma * math.sqrt(2.0 * math.log(1.0 / level))

    def scaled(self, factor: float) -> "KernelSpec":
        return KernelSpec(self.kind, self.sigma * factor)


@dataclass(frozen=True)
class ScoreConfig:
    kernel: KernelSpec
    mode: NormalizationMode = NormalizationMode.MEAN

    def __post_init__(self):
        object.__setattr__(self, "mode", NormalizationMode(self.mode))

    def weight(self, n: int) -> float:
        """Per-point weight: ``1/n`` for mean scores, ``1`` for sums."""
        return 1.0 / n if self.mode is NormalizationMode.MEAN else 1.0

    def max_score(self, n: int) -> float:
        return 1.0 if self.mode is NormalizationMode.MEAN else float(n)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points stored in normalised coordinates inside the closed unit disk.

    ``raw = center + scale * xy``.  Build with :meth:`from_raw` to normalise
    arbitrary input, or :meth:`unit` for data already inside the disk.
    """

    xy: np.ndarray
    scale: float = 1.0
    center: Point = field(default_factory=lambda: Point(0.0, 0.0))

    def __post_init__(self):
        xy = np.array(self.xy, dtype=np.float64).reshape(-1, 2)
        if xy.shape[0] < 1:
            raise ValueError("point cloud is empty")
        if not np.all(np.isfinite(xy)):
            raise ValueError("point cloud contains non-finite coordinates")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("normalisation scale must be positive")
        if np.max(np.hypot(xy[:, 0], xy[:, 1])) > 1.0 + 1e-12:
            raise ValueError("normalised points must lie in the closed unit disk")
        xy.setflags(write=False)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "center", Point(*map(float, self.center)))

    @classmethod
    def from_raw(cls, points) -> "PointCloud":
        """Centre on the bounding-box midpoint and divide by the enclosing radius."""
        pts = np.array(points, dtype=np.float64).reshape(-1, 2)
        if pts.shape[0] < 1:
            raise ValueError("point cloud is empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        c = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
        rel = pts - c
        scale = float(np.max(np.hypot(rel[:, 0], rel[:, 1])))
        if scale == 0.0:
            scale = 1.0
        xy = rel / scale
        # guard the last ulp so the unit-disk check holds exactly
        norms = np.hypot(xy[:, 0], xy[:, 1])
        xy[norms > 1.0] /= norms[norms > 1.0, None]
        return cls(xy, scale, Point(float(c[0]), float(c[1])))

    @classmethod
    def unit(cls, points) -> "PointCloud":
        return cls(points)

    def __len__(self) -> int:
        return self.xy.shape[0]

    @property
    def raw(self) -> np.ndarray:
        return self.xy * self.scale + np.asarray(self.center)

    def to_raw_line(self, lp: LineParams) -> LineParams:
        """Map a line from normalised to input coordinates, canonicalised."""
        c, s = math.cos(lp.theta), math.sin(lp.theta)
        r = lp.r * self.scale + self.center.x * c + self.center.y * s
        return canonicalize(LineParams(r, lp.theta))

    def to_normalized_line(self, lp: LineParams) -> LineParams:
        c, s = math.cos(lp.theta), math.sin(lp.theta)
        r = (lp.r - self.center.x * c - self.center.y * s) / self.scale
        return canonicalize(LineParams(r, lp.theta))


def canonicalize(lp: LineParams) -> LineParams:
    r, theta = float(lp[0]), float(lp[1])
    if not _finite(r, theta):
        raise ValueError(f"line parameters must be finite, got {(r, theta)!r}")
    if 0.0 <= theta < math.pi:
        return LineParams(r, theta)
    k = math.floor(theta / math.pi)
    t = theta - k * math.pi
    if t >= math.pi:
        t -= math.pi
        k += 1
    if t < 0.0:
        t += math.pi
        k -= 1
    t = min(max(t, 0.0), math.nextafter(math.pi, 0.0))
    return LineParams(-r if k % 2 else r, t)


def point_line_distance(p, lp) -> float:
    x, y = p
    r, theta = lp
    if not _finite(x, y, r, theta):
        raise ValueError("inputs must be finite")
    return abs(r - x * math.cos(theta) - y * math.sin(theta))


def sinusoid(p, theta: float) -> float:
    """r-coordinate of the dual curve of ``p`` at angle ``theta``."""
    x, y = p
    return x * math.cos(theta) + y * math.sin(theta)


def kernel_eval(k: KernelSpec, x: float) -> float:
    if x < 0 or math.isnan(x):
        raise ValueError(f"kernel argument must be non-negative, got {x!r}")
    if k.kind is KernelKind.HAT:
        return max(0.0, 1.0 - x / k.sigma)
    return math.exp(-0.5 * (x / k.sigma) ** 2)


def score_many(cloud: PointCloud, r, theta, cfg: ScoreConfig) -> np.ndarray:
    """Vectorised score of lines given by arrays ``r`` and ``theta``."""
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    r, theta = np.broadcast_arrays(r, theta)
    shape = r.shape
    out = kernels.score_lines(
        cloud.xy, r.ravel(), theta.ravel(), cfg.kernel.code, cfg.kernel.sigma, cfg.weight(len(cloud))
    )
    return out.reshape(shape)


def score(cloud: PointCloud, lp, cfg: ScoreConfig) -> float:
    r, theta = lp
    if not _finite(r, theta):
        raise ValueError("line parameters must be finite")
    return float(score_many(cloud, [r], [theta], cfg)[0])
