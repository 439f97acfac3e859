"""End-to-end line detection: normalise, approximate, persist, select."""
from __future__ import annotations

from dataclasses import dataclass

from .geometry import KernelSpec, NormalizationMode, PointCloud, ScoreConfig
from .persistence import (
    DetectedLine,
    NerveGraph,
    PersistencePair,
    SelectionPolicy,
    build_nerve,
    compute_persistence,
    select_lines,
)
from .subdivision import ApproxConfig, CellField, build_approximation


@dataclass(frozen=True, eq=False)
class Detection:
    cloud: PointCloud
    field: CellField
    graph: NerveGraph
    pairs: list[PersistencePair]
    lines: list[DetectedLine]


def detect(points, kernel: KernelSpec, epsilon: float, policy: SelectionPolicy,
           mode: NormalizationMode = NormalizationMode.MEAN, *, max_depth: int = 30,
           predicate: str = "local", twisted: bool = True, normalize: bool = True) -> Detection:
    """Detect lines in raw ``points``.

    ``kernel.sigma`` is given in input units and rescaled together with the
    cloud; ``epsilon`` is in score units of ``mode``.  With ``normalize=False``
    the points must already lie in the unit disk and are used as-is.
    """
    cloud = points if isinstance(points, PointCloud) else (
        PointCloud.from_raw(points) if normalize else PointCloud.unit(points))
    cfg = ScoreConfig(kernel.scaled(1.0 / cloud.scale), mode)
    field = build_approximation(cloud, cfg, ApproxConfig(epsilon, max_depth=max_depth, predicate=predicate))
    graph = build_nerve(field, twisted=twisted)
    pairs = compute_persistence(graph)
    lines = select_lines(pairs, field, cloud, policy)
    return Detection(cloud, field, graph, pairs, lines)
