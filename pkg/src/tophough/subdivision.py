"""Certified piecewise-constant approximation of the score on a quad-tree.

The initial box ``[-r0, r0] x [0, pi]`` is split breadth-first into four
congruent children until every box ``B`` satisfies
``lipschitz(B) * diam(B) / 2 <= epsilon``.  Each leaf carries the score at its
midpoint, so the approximation is within ``epsilon`` of the true score on the
closed box.  Outside the strip the approximation is zero.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .geometry import KernelSpec, NormalizationMode, Point, PointCloud, ScoreConfig
from .lipschitz import ParamBox, global_lipschitz


class OutsideDomainError(LookupError):
    """Query point lies outside the subdivided domain."""


@dataclass(frozen=True)
class ApproxConfig:
    epsilon: float
    max_depth: int = 30
    min_cell_diameter: float = 1e-9
    predicate: str = "local"  # "local" box bounds or the uniform "global" bound

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not 1 <= self.max_depth <= 30:
            raise ValueError("max_depth must lie in [1, 30]")
        if not self.min_cell_diameter > 0:
            raise ValueError("min_cell_diameter must be positive")
        if self.predicate not in ("local", "global"):
            raise ValueError(f"unknown predicate {self.predicate!r}")


@dataclass(frozen=True)
class Cell:
    id: int
    box: ParamBox
    value: float
    depth: int
    i: int
    j: int
    flagged: bool = False


def initial_r0(cloud: PointCloud, k: KernelSpec, epsilon: float,
               mode: NormalizationMode = NormalizationMode.MEAN) -> float:
    """Offset beyond which the score is at most ``epsilon``.

    For ``|r| >= r0`` every point of the unit disk is at distance at least
    ``r0 - 1`` from the line, so each kernel term is at most the per-point level.
    """
    mode = NormalizationMode(mode)
    level = epsilon if mode is NormalizationMode.MEAN else epsilon / len(cloud)
    if not 0.0 < level < 1.0:
        raise ValueError(
            f"epsilon={epsilon!r} leaves nothing to approximate in {mode.value} mode "
            f"(needs 0 < epsilon < {1 if mode is NormalizationMode.MEAN else len(cloud)})"
        )
    return 1.0 + k.inverse(level)


class CellField:
    """Leaf cells of the quad-tree, stored column-wise; cell ``id`` is the row index."""

    def __init__(self, *, r0, epsilon, depth, i, j, values, flagged, mode=NormalizationMode.MEAN,
                 scale=1.0, center=(0.0, 0.0), kernel: KernelSpec | None = None):
        self.r0 = float(r0)
        self.epsilon = float(epsilon)
        self.depth = np.asarray(depth, dtype=np.int64)
        self.i = np.asarray(i, dtype=np.int64)
        self.j = np.asarray(j, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.flagged = np.asarray(flagged, dtype=bool)
        self.mode = NormalizationMode(mode)
        self.scale = float(scale)
        self.center = Point(*map(float, center))
        self.kernel = kernel
        self.domain = ParamBox(-self.r0, self.r0, 0.0, math.pi)
        wr = 2.0 * self.r0 / np.exp2(self.depth)
        wt = math.pi / np.exp2(self.depth)
        self.r_lo = -self.r0 + self.i * wr
        self.r_hi = -self.r0 + (self.i + 1) * wr
        self.t_lo = self.j * wt
        self.t_hi = (self.j + 1) * wt

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_flagged(self) -> int:
        return int(self.flagged.sum())

    @property
    def level(self) -> int:
        """Depth of the finest leaf; integer coordinates are expressed on this grid."""
        return int(self.depth.max())

    @cached_property
    def cells(self) -> list[Cell]:
        return [
            Cell(k, ParamBox(self.r_lo[k], self.r_hi[k], self.t_lo[k], self.t_hi[k]),
                 float(self.values[k]), int(self.depth[k]), int(self.i[k]), int(self.j[k]),
                 bool(self.flagged[k]))
            for k in range(len(self))
        ]

    def box(self, cid: int) -> ParamBox:
        return ParamBox(self.r_lo[cid], self.r_hi[cid], self.t_lo[cid], self.t_hi[cid])

    def midpoint(self, cid: int) -> tuple[float, float]:
        return 0.5 * (self.r_lo[cid] + self.r_hi[cid]), 0.5 * (self.t_lo[cid] + self.t_hi[cid])

    def integer_boxes(self):
        """Closed boxes ``(i0, i1, j0, j1)`` on the ``2**level`` grid."""
        shift = self.level - self.depth
        i0 = self.i << shift
        j0 = self.j << shift
        return i0, (self.i + 1) << shift, j0, (self.j + 1) << shift

    @cached_property
    def _index(self):
        index = {}
        for d in np.unique(self.depth):
            sel = np.flatnonzero(self.depth == d)
            keys = (self.i[sel] << int(d)) + self.j[sel]
            order = np.argsort(keys, kind="stable")
            index[int(d)] = (keys[order], sel[order])
        return index

    def locate(self, r: float, theta: float) -> Cell:
        """Leaf whose closed box contains ``(r, theta)``; shared edges go to the smaller id."""
        if not self.domain.contains(r, theta):
            raise OutsideDomainError(f"({r}, {theta}) is outside the domain")
        u = (r + self.r0) / (2.0 * self.r0)
        v = theta / math.pi
        best = None
        for d, (keys, ids) in self._index.items():
            n = 1 << d
            # rounding can put a point on a shared edge one column off
            ci = {min(max(int(math.floor(u * n)) + o, 0), n - 1) for o in (-1, 0, 1)}
            cj = {min(max(int(math.floor(v * n)) + o, 0), n - 1) for o in (-1, 0, 1)}
            for a in ci:
                for b in cj:
                    key = (a << d) + b
                    pos = np.searchsorted(keys, key)
                    if pos < keys.shape[0] and keys[pos] == key:
                        cid = int(ids[pos])
                        if (self.r_lo[cid] <= r <= self.r_hi[cid]
                                and self.t_lo[cid] <= theta <= self.t_hi[cid]
                                and (best is None or cid < best)):
                            best = cid
        if best is None:
            raise OutsideDomainError(f"no leaf contains ({r}, {theta})")
        return self.cells[best]

    def evaluate(self, r, theta) -> np.ndarray:
        """Approximate score at many points; zero outside the strip ``|r| <= r0``."""
        r = np.asarray(r, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        out = np.zeros(r.shape)
        found = np.zeros(r.shape, dtype=bool)
        inside = np.abs(r) <= self.r0
        u = (r + self.r0) / (2.0 * self.r0)
        v = np.clip(theta / math.pi, 0.0, 1.0)
        for d, (keys, ids) in self._index.items():
            n = 1 << d
            a = np.clip(np.floor(u * n).astype(np.int64), 0, n - 1)
            b = np.clip(np.floor(v * n).astype(np.int64), 0, n - 1)
            key = (a << d) + b
            pos = np.clip(np.searchsorted(keys, key), 0, keys.shape[0] - 1)
            hit = (keys[pos] == key) & inside & ~found
            out[hit] = self.values[ids[pos[hit]]]
            found |= hit
        return out

    # serialisation

    def to_dict(self) -> dict:
        cells = [
            {
                "r_lo": float(self.r_lo[k]), "r_hi": float(self.r_hi[k]),
                "theta_lo": float(self.t_lo[k]), "theta_hi": float(self.t_hi[k]),
                "value": float(self.values[k]), "id": k,
                "depth": int(self.depth[k]), "i": int(self.i[k]), "j": int(self.j[k]),
                "flagged": bool(self.flagged[k]),
            }
            for k in range(len(self))
        ]
        d = self.domain
        out = {
            "domain": {"r_lo": d.r_lo, "r_hi": d.r_hi, "theta_lo": d.theta_lo, "theta_hi": d.theta_hi},
            "epsilon": self.epsilon,
            "r0": self.r0,
            "mode": self.mode.value,
            "normalization": {"scale": self.scale, "center": list(self.center)},
            "cells": cells,
        }
        if self.kernel is not None:
            out["kernel"] = {"kind": self.kernel.kind.value, "sigma": self.kernel.sigma}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CellField":
        r0 = float(data.get("r0", data["domain"]["r_hi"]))
        cells = sorted(data["cells"], key=lambda c: c["id"])
        if [c["id"] for c in cells] != list(range(len(cells))):
            raise ValueError("cell ids must be dense 0..n-1")
        depth, ii, jj = [], [], []
        for c in cells:
            if "depth" in c:
                d, a, b = int(c["depth"]), int(c["i"]), int(c["j"])
            else:
                d = int(round(math.log2(2.0 * r0 / (c["r_hi"] - c["r_lo"]))))
                a = int(round((c["r_lo"] + r0) / (2.0 * r0) * (1 << d)))
                b = int(round(c["theta_lo"] / math.pi * (1 << d)))
            depth.append(d)
            ii.append(a)
            jj.append(b)
        norm = data.get("normalization", {})
        kern = data.get("kernel")
        return cls(
            r0=r0, epsilon=data["epsilon"], depth=depth, i=ii, j=jj,
            values=[c["value"] for c in cells],
            flagged=[c.get("flagged", False) for c in cells],
            mode=data.get("mode", "mean"),
            scale=norm.get("scale", 1.0), center=norm.get("center", (0.0, 0.0)),
            kernel=KernelSpec(kern["kind"], kern["sigma"]) if kern else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "CellField":
        return cls.from_dict(json.loads(text))


def build_approximation(cloud: PointCloud, cfg: ScoreConfig | KernelSpec, approx: ApproxConfig) -> CellField:
    if isinstance(cfg, KernelSpec):
        cfg = ScoreConfig(cfg)
    k = cfg.kernel
    n = len(cloud)
    weight = cfg.weight(n)
    eps = approx.epsilon
    common = dict(epsilon=eps, mode=cfg.mode, scale=cloud.scale, center=cloud.center, kernel=k)

    if eps >= cfg.max_score(n):
        # any value in [0, max] is within eps of the score; one cell suffices
        r0 = 1.0
        value = kernels.score_lines(cloud.xy, np.zeros(1), np.full(1, 0.5 * math.pi), k.code, k.sigma, weight)
        return CellField(r0=r0, depth=[0], i=[0], j=[0], values=value, flagged=[False], **common)

    r0 = initial_r0(cloud, k, eps, cfg.mode)
    lam_global = global_lipschitz(k, 1.0) * weight * n

    out_depth, out_i, out_j, out_val, out_flag = [], [], [], [], []
    depth = 0
    ii = np.zeros(1, dtype=np.int64)
    jj = np.zeros(1, dtype=np.int64)
    while ii.shape[0]:
        wr = 2.0 * r0 / (1 << depth)
        wt = math.pi / (1 << depth)
        r_lo = -r0 + ii * wr
        r_hi = -r0 + (ii + 1) * wr
        t_lo = jj * wt
        t_hi = (jj + 1) * wt
        values = kernels.score_lines(cloud.xy, 0.5 * (r_lo + r_hi), 0.5 * (t_lo + t_hi), k.code, k.sigma, weight)
        half_diam = 0.5 * math.hypot(wr, wt)
        if approx.predicate == "local":
            lam = kernels.box_lipschitz(cloud.xy, r_lo, r_hi, t_lo, t_hi, k.code, k.sigma, weight)
        else:
            lam = np.full(ii.shape[0], lam_global)
        ok = lam * half_diam <= eps
        guard = depth >= approx.max_depth or 2.0 * half_diam < approx.min_cell_diameter
        leaf = np.ones_like(ok) if guard else ok
        out_depth.append(np.full(int(leaf.sum()), depth))
        out_i.append(ii[leaf])
        out_j.append(jj[leaf])
        out_val.append(values[leaf])
        out_flag.append(~ok[leaf])
        pi_, pj = ii[~leaf], jj[~leaf]
        ii = np.stack([2 * pi_, 2 * pi_ + 1, 2 * pi_, 2 * pi_ + 1], axis=1).ravel()
        jj = np.stack([2 * pj, 2 * pj, 2 * pj + 1, 2 * pj + 1], axis=1).ravel()
        depth += 1

    return CellField(
        r0=r0, depth=np.concatenate(out_depth), i=np.concatenate(out_i), j=np.concatenate(out_j),
        values=np.concatenate(out_val), flagged=np.concatenate(out_flag), **common,
    )


def locate(field: CellField, q) -> Cell:
    r, theta = q
    return field.locate(float(r), float(theta))
