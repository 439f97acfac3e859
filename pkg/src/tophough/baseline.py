"""Classical voting Hough accumulator, used as the comparison baseline."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from . import _accel
from .geometry import LineParams


@dataclass(frozen=True, eq=False)
class Accumulator:
    counts: np.ndarray  # shape (r_bins, theta_bins)
    r_max: float

    @property
    def r_bins(self) -> int:
        return self.counts.shape[0]

    @property
    def theta_bins(self) -> int:
        return self.counts.shape[1]

    @property
    def theta_centers(self) -> np.ndarray:
        return (np.arange(self.theta_bins) + 0.5) * math.pi / self.theta_bins

    def bin_line(self, flat_index: int) -> LineParams:
        """Line at the centre of a bin given its row-major index."""
        i, j = divmod(int(flat_index), self.theta_bins)
        width = 2.0 * self.r_max / self.r_bins
        return LineParams(-self.r_max + (i + 0.5) * width, float(self.theta_centers[j]))

    def ranked_bins(self) -> np.ndarray:
        """Row-major bin indices sorted by count descending, ties by index."""
        flat = self.counts.ravel()
        return np.lexsort((np.arange(flat.size), -flat))

    def top_lines(self, k: int) -> list[LineParams]:
        return [self.bin_line(b) for b in self.ranked_bins()[:k]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        np.savetxt(buf, self.counts, fmt="%d", delimiter=",")
        return buf.getvalue()


@njit
def _vote_nb(xs, ys, cos_t, sin_t, r_max, r_bins, counts):
    width = 2.0 * r_max / r_bins
    for p in range(xs.shape[0]):
        for j in range(cos_t.shape[0]):
            r = xs[p] * cos_t[j] + ys[p] * sin_t[j]
            i = int(math.floor((r + r_max) / width))
            if i == r_bins and r <= r_max:
                i = r_bins - 1
            if 0 <= i < r_bins:
                counts[i, j] += 1


def _vote_np(xs, ys, cos_t, sin_t, r_max, r_bins, counts):
    width = 2.0 * r_max / r_bins
    r = xs[:, None] * cos_t + ys[:, None] * sin_t
    i = np.floor((r + r_max) / width).astype(np.int64)
    i = np.where((i == r_bins) & (r <= r_max), r_bins - 1, i)
    cols = np.broadcast_to(np.arange(cos_t.shape[0]), i.shape)
    ok = (i >= 0) & (i < r_bins)
    np.add.at(counts, (i[ok], cols[ok]), 1)


def default_r_bins(r_max: float, resolution: float = 1.0) -> int:
    return max(1, 2 * math.ceil(r_max) * int(round(resolution)))


def accumulate(points, r_bins: int | None = None, theta_bins: int = 180, r_max: float | None = None) -> Accumulator:
    """One vote per (point, theta column) in the r bin containing the point's dual curve."""
    pts = np.array(points, dtype=np.float64).reshape(-1, 2)
    radius = float(np.max(np.hypot(pts[:, 0], pts[:, 1]))) if pts.size else 0.0
    if r_max is None:
        r_max = max(radius, 1.0)
    if r_max < radius:
        raise ValueError(f"r_max={r_max} is below the largest point norm {radius}")
    if r_bins is None:
        r_bins = default_r_bins(r_max)
    if r_bins < 1 or theta_bins < 1:
        raise ValueError("bin counts must be >= 1")
    t = (np.arange(theta_bins) + 0.5) * math.pi / theta_bins
    counts = np.zeros((r_bins, theta_bins), dtype=np.int64)
    args = (np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), np.cos(t), np.sin(t),
            float(r_max), int(r_bins), counts)
    if _accel.use_numba():
        _vote_nb(*args)
    else:
        _vote_np(*args)
    return Accumulator(counts, float(r_max))


def vote_gap(acc: Accumulator | np.ndarray, k_true: int) -> int:
    """Count of the k-th ranked bin minus the (k+1)-th."""
    counts = acc.counts if isinstance(acc, Accumulator) else np.asarray(acc)
    flat = counts.ravel()
    if np.count_nonzero(flat) < k_true + 1:
        raise ValueError(f"need at least {k_true + 1} non-empty bins")
    ranked = flat[np.lexsort((np.arange(flat.size), -flat))]
    return int(ranked[k_true - 1] - ranked[k_true])
