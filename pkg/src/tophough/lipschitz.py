"""Global and box-local Lipschitz constants of the score function."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import KernelSpec, NormalizationMode, PointCloud, ScoreConfig


@dataclass(frozen=True)
class ParamBox:
    r_lo: float
    r_hi: float
    theta_lo: float
    theta_hi: float

    def __post_init__(self):
        if not (self.r_lo < self.r_hi and self.theta_lo < self.theta_hi):
            raise ValueError(f"degenerate box {self!r}")
        if self.theta_lo < 0.0 or self.theta_hi > math.pi:
            raise ValueError(f"box theta range must lie in [0, pi]: {self!r}")

    @property
    def diameter(self) -> float:
        return math.hypot(self.r_hi - self.r_lo, self.theta_hi - self.theta_lo)

    @property
    def midpoint(self) -> tuple[float, float]:
        return 0.5 * (self.r_lo + self.r_hi), 0.5 * (self.theta_lo + self.theta_hi)

    def contains(self, r: float, theta: float) -> bool:
        return self.r_lo <= r <= self.r_hi and self.theta_lo <= theta <= self.theta_hi

    @property
    def area(self) -> float:
        return (self.r_hi - self.r_lo) * (self.theta_hi - self.theta_lo)


def global_lipschitz(k: KernelSpec, radius: float = 1.0) -> float:
    """Bound on the gradient norm of the mean score for points within ``radius`` of the origin."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    return k.lipschitz * math.sqrt(1.0 + radius * radius)


def kernel_tail_lipschitz(k: KernelSpec, delta: float) -> float:
    """Lipschitz constant of the kernel restricted to ``[delta, inf)``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    return float(kernels._tail_scalar(k.code, k.sigma, float(delta)))


def vertical_distance(box: ParamBox, p) -> float:
    """Smallest r-gap between ``box`` and the dual curve of ``p``.

    The curve ``r(theta) = x cos(theta) + y sin(theta)`` is monotone between its
    critical angles, so its range over the box's theta interval is spanned by the
    interval endpoints and any interior extremum (``+-|p|``).
    """
    x, y = p
    return float(kernels._vdist_scalar(float(x), float(y), box.r_lo, box.r_hi, box.theta_lo, box.theta_hi))


def local_lipschitz(box: ParamBox, cloud: PointCloud, k: KernelSpec | ScoreConfig,
                    mode: NormalizationMode = NormalizationMode.MEAN) -> float:
    cfg = k if isinstance(k, ScoreConfig) else ScoreConfig(k, mode)
    out = kernels.box_lipschitz(
        cloud.xy,
        np.array([box.r_lo]), np.array([box.r_hi]),
        np.array([box.theta_lo]), np.array([box.theta_hi]),
        cfg.kernel.code, cfg.kernel.sigma, cfg.weight(len(cloud)),
    )
    return float(out[0])
