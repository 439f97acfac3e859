"""Hough-style line detection with persistent homology.

Every point votes for the lines passing near it through a kernel, giving a
score function on the Moebius strip of lines.  The score is approximated by a
quad-tree of cells with a certified sup-norm error, and lines are reported as
the local maxima that persist longest in the super-levelset filtration.
"""
from .baseline import Accumulator, accumulate, vote_gap
from .detect import Detection, detect
from .geometry import (
    KernelKind,
    KernelSpec,
    LineParams,
    NormalizationMode,
    Point,
    PointCloud,
    ScoreConfig,
    canonicalize,
    kernel_eval,
    point_line_distance,
    score,
    sinusoid,
)
from .lipschitz import ParamBox, global_lipschitz, local_lipschitz, vertical_distance
from .persistence import (
    DetectedLine,
    NerveGraph,
    PersistencePair,
    SelectionPolicy,
    build_nerve,
    compute_persistence,
    select_lines,
)
from .scenes import LineSpec, Scene, demo_scene, gen_scene, sample_line
from .subdivision import ApproxConfig, Cell, CellField, build_approximation, locate

__version__ = "0.1.0"

__all__ = [
    "Accumulator", "ApproxConfig", "Cell", "CellField", "DetectedLine", "Detection", "KernelKind",
    "KernelSpec", "LineParams", "LineSpec", "NerveGraph", "NormalizationMode", "ParamBox",
    "PersistencePair", "Point", "PointCloud", "Scene", "ScoreConfig", "SelectionPolicy",
    "accumulate", "build_approximation", "build_nerve", "canonicalize", "compute_persistence",
    "demo_scene", "detect", "gen_scene", "global_lipschitz", "kernel_eval", "local_lipschitz",
    "locate", "point_line_distance", "sample_line", "score", "select_lines", "sinusoid",
    "vertical_distance", "vote_gap",
]
