"""Synthetic point clouds sampled from ground-truth lines in a square image.

Randomness comes from numpy's PCG64 bit generator seeded with
``SeedSequence([seed, index])``, so every scene of a batch has its own stream
and results are identical across platforms.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import KernelSpec, LineParams, canonicalize


class SceneGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LineSpec:
    n_points: int
    noise_halfwidth: float = 0.0
    params: LineParams | None = None  # None: draw a random line

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not self.noise_halfwidth >= 0:
            raise ValueError("noise_halfwidth must be >= 0")


@dataclass(frozen=True, eq=False)
class Scene:
    points: np.ndarray
    truth: list[LineSpec]
    extent: float
    seed: int
    index: int = 0
    labels: np.ndarray = field(default=None)

    @property
    def truth_lines(self) -> list[LineParams]:
        return [s.params for s in self.truth]

    def to_dict(self) -> dict:
        return {
            "extent": self.extent,
            "seed": self.seed,
            "index": self.index,
            "truth": [
                {"r": s.params.r, "theta": s.params.theta, "n": s.n_points, "noise": s.noise_halfwidth}
                for s in self.truth
            ],
            "points": [[float(format(x, ".9g")), float(format(y, ".9g"))] for x, y in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Scene":
        truth = [LineSpec(int(t["n"]), float(t["noise"]), LineParams(float(t["r"]), float(t["theta"])))
                 for t in data["truth"]]
        pts = np.array(data["points"], dtype=np.float64).reshape(-1, 2)
        return cls(pts, truth, float(data["extent"]), int(data["seed"]), int(data.get("index", 0)))


def scene_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def chord(lp: LineParams, extent: float) -> tuple[np.ndarray, np.ndarray, float, float] | None:
    """Foot point, direction and the parameter range of the line inside ``[0, extent]^2``."""
    c, s = math.cos(lp.theta), math.sin(lp.theta)
    foot = np.array([lp.r * c, lp.r * s])
    d = np.array([-s, c])
    lo, hi = -math.inf, math.inf
    for k in range(2):
        if abs(d[k]) < 1e-15:
            if not 0.0 <= foot[k] <= extent:
                return None
            continue
        a = (0.0 - foot[k]) / d[k]
        b = (extent - foot[k]) / d[k]
        lo = max(lo, min(a, b))
        hi = min(hi, max(a, b))
    if hi <= lo:
        return None
    return foot, d, lo, hi


def offset_range(theta: float, extent: float) -> tuple[float, float]:
    """Range of ``r`` for which ``(r, theta)`` meets the square."""
    c, s = math.cos(theta), math.sin(theta)
    vals = [x * c + y * s for x in (0.0, extent) for y in (0.0, extent)]
    return min(vals), max(vals)


def sample_line(spec: LineSpec, extent: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform random positions along the chord, displaced along the normal."""
    hit = chord(spec.params, extent)
    if hit is None:
        raise ValueError(f"line {spec.params} misses the [0, {extent}]^2 extent")
    foot, d, lo, hi = hit
    t = rng.uniform(lo, hi, spec.n_points)
    u = rng.uniform(-spec.noise_halfwidth, spec.noise_halfwidth, spec.n_points)
    normal = np.array([math.cos(spec.params.theta), math.sin(spec.params.theta)])
    return foot + t[:, None] * d + u[:, None] * normal


def random_line(n_points: int, extent: float, rng: np.random.Generator, attempts: int = 1000) -> LineParams:
    """Random line whose chord through the square is at least ``n_points / 2`` long."""
    need = n_points / 2.0
    for _ in range(attempts):
        theta = rng.uniform(0.0, math.pi)
        r_lo, r_hi = offset_range(theta, extent)
        r = rng.uniform(r_lo, r_hi)
        hit = chord(LineParams(r, theta), extent)
        if hit is not None and hit[3] - hit[2] >= need:
            return canonicalize(LineParams(r, theta))
    raise SceneGenerationError(f"no line with chord >= {need} found in {attempts} attempts")


def gen_scene(specs: list[LineSpec], extent: float, seed: int, index: int = 0) -> Scene:
    if not specs:
        raise ValueError("at least one line spec is required")
    if not extent > 0:
        raise ValueError("extent must be positive")
    rng = scene_rng(seed, index)
    truth, chunks, labels = [], [], []
    for k, spec in enumerate(specs):
        if spec.params is None:
            spec = LineSpec(spec.n_points, spec.noise_halfwidth, random_line(spec.n_points, extent, rng))
        truth.append(spec)
        chunks.append(sample_line(spec, extent, rng))
        labels.append(np.full(spec.n_points, k))
    return Scene(np.vstack(chunks), truth, float(extent), int(seed), int(index), np.concatenate(labels))


def random_specs(counts, noise: float) -> list[LineSpec]:
    return [LineSpec(int(n), float(noise)) for n in counts]


# the three-line use case: one dense, one medium and one sparse line, with the
# detector settings used to look at it
DEMO_EXTENT = 32.0
DEMO_LINES = (
    LineSpec(18, 1.0, LineParams(10.0, 0.35)),
    LineSpec(12, 1.0, LineParams(24.0, 1.25)),
    LineSpec(8, 1.0, LineParams(5.0, 2.3)),
)
DEMO_KERNEL = KernelSpec("rbf", 2.5)
DEMO_EPSILON = 0.02  # mean-score units


def demo_scene(seed: int = 0) -> Scene:
    return gen_scene(list(DEMO_LINES), DEMO_EXTENT, seed)
