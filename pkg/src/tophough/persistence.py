"""0-dimensional persistence of the approximated score over the Moebius strip.

The super-levelset filtration of a piecewise-constant field is tracked on the
nerve of its closed cells: one vertex per leaf plus a background vertex (value
0) standing for everything outside ``|r| <= r0``.  Cells on the ``theta = 0``
edge are glued to cells on the ``theta = pi`` edge with ``r`` negated.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from ._accel import njit
from .geometry import LineParams, PointCloud, canonicalize
from .subdivision import CellField


@dataclass(frozen=True, eq=False)
class NerveGraph:
    values: np.ndarray
    edges: np.ndarray
    background: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", e)

    @property
    def n_vertices(self) -> int:
        return self.values.shape[0]

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, indices)`` of the symmetric adjacency."""
        n = self.n_vertices
        e = self.edges
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        m = sparse.csr_matrix((np.ones(rows.shape[0], dtype=np.int8), (rows, cols)), shape=(n, n))
        m.sort_indices()
        return m.indptr.astype(np.int64), m.indices.astype(np.int64)

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.adjacency
        return indices[indptr[v]:indptr[v + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}


@dataclass(frozen=True)
class PersistencePair:
    birth: float
    death: float
    representative: int
    essential: bool = False

    @property
    def persistence(self) -> float:
        return self.birth - self.death


@dataclass(frozen=True)
class SelectionPolicy:
    top_k: int | None = None
    alpha: float | None = None

    def __post_init__(self):
        if (self.top_k is None) == (self.alpha is None):
            raise ValueError("set exactly one of top_k or alpha")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.alpha is not None and not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")


@dataclass(frozen=True)
class DetectedLine:
    line: LineParams
    score: float
    persistence: float
    cell: int


# nerve construction

def _touching(q_key, q_lo, q_hi, t_key, t_lo, t_hi, span):
    """Pairs (query, target) with equal key and closed-overlapping intervals.

    Targets sharing a key have disjoint interiors, so sorting by ``lo`` also
    sorts by ``hi`` and the matches form a contiguous run.
    """
    order = np.lexsort((t_lo, t_key))
    base = t_key[order] * span
    lo_keys = base + t_lo[order]
    hi_keys = base + t_hi[order]
    qb = q_key * span
    start = np.searchsorted(hi_keys, qb + q_lo, side="left")
    stop = np.searchsorted(lo_keys, qb + q_hi, side="right")
    count = np.maximum(stop - start, 0)
    q_idx = np.repeat(np.arange(q_key.shape[0]), count)
    offs = np.arange(q_idx.shape[0]) - np.repeat(np.cumsum(count) - count, count)
    return q_idx, order[np.repeat(start, count) + offs]


def build_nerve(field: CellField, twisted: bool = True) -> NerveGraph:
    """Nerve of the closed leaf boxes plus a background vertex at index ``len(field)``.

    ``twisted=False`` drops the Moebius gluing (debugging aid).
    """
    n = len(field)
    i0, i1, j0, j1 = field.integer_boxes()
    full = np.int64(1) << field.level
    span = full + 1
    ids = np.arange(n)
    parts = []

    a, b = _touching(i1, j0, j1, i0, j0, j1, span)  # shared vertical side or corner
    parts.append(np.stack([ids[a], ids[b]], axis=1))
    a, b = _touching(j1, i0, i1, j0, i0, i1, span)  # shared horizontal side or corner
    parts.append(np.stack([ids[a], ids[b]], axis=1))

    if twisted:
        bottom = np.flatnonzero(j0 == 0)
        top = np.flatnonzero(j1 == full)
        if bottom.size and top.size:
            zb = np.zeros(bottom.size, dtype=np.int64)
            zt = np.zeros(top.size, dtype=np.int64)
            a, b = _touching(zb, full - i1[bottom], full - i0[bottom], zt, i0[top], i1[top], span)
            parts.append(np.stack([bottom[a], top[b]], axis=1))

    rim = np.flatnonzero((i0 == 0) | (i1 == full))
    parts.append(np.stack([rim, np.full(rim.size, n)], axis=1))

    e = np.concatenate(parts)
    e = e[e[:, 0] != e[:, 1]]
    e = np.unique(np.sort(e, axis=1), axis=0)
    values = np.append(field.values, 0.0)
    return NerveGraph(values, e, background=n)


# union-find sweep

@njit
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit
def _sweep(values, order, indptr, indices):
    nv = values.shape[0]
    parent = np.full(nv, -1, dtype=np.int64)
    rank = np.empty(nv, dtype=np.int64)
    for pos in range(nv):
        rank[order[pos]] = pos
    reps = np.empty(nv, dtype=np.int64)
    deaths = np.empty(nv, dtype=np.float64)
    count = 0
    for pos in range(nv):
        v = order[pos]
        parent[v] = v
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if parent[u] < 0:
                continue
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru == rv:
                continue
            # roots are component maxima; the earlier one in the sweep is the elder
            if rank[ru] < rank[rv]:
                elder, young = ru, rv
            else:
                elder, young = rv, ru
            parent[young] = elder
            if values[young] > values[v]:
                reps[count] = young
                deaths[count] = values[v]
                count += 1
    return reps[:count], deaths[:count], parent


def sweep_order(values: np.ndarray) -> np.ndarray:
    """Vertices by decreasing value, ties broken by smaller index first."""
    return np.lexsort((np.arange(values.shape[0]), -values))


def compute_persistence(g: NerveGraph) -> list[PersistencePair]:
    """Pairs sorted by persistence, then birth (both descending), then representative.

    Zero-persistence merges (equal birth and death) are not reported.  The
    surviving component is reported with death 0.
    """
    if g.n_vertices == 0:
        return []
    if not np.all(np.isfinite(g.values)):
        raise ValueError("vertex values must be finite")
    indptr, indices = g.adjacency
    order = sweep_order(g.values)
    reps, deaths, parent = _sweep(g.values, order, indptr, indices)
    roots = np.flatnonzero(parent == np.arange(g.n_vertices))
    if roots.size != 1:
        raise ValueError(f"graph is not connected ({roots.size} components)")
    root = int(roots[0])
    pairs = [PersistencePair(float(g.values[v]), float(d), int(v)) for v, d in zip(reps, deaths)]
    pairs.append(PersistencePair(float(g.values[root]), 0.0, root, essential=True))
    pairs.sort(key=lambda p: (-p.persistence, -p.birth, p.representative))
    return pairs


def superlevel_component(g: NerveGraph, vertex: int, level: float) -> set[int]:
    """Vertices connected to ``vertex`` through vertices of value ``>= level``."""
    if g.values[vertex] < level:
        return set()
    indptr, indices = g.adjacency
    seen = {int(vertex)}
    stack = [int(vertex)]
    while stack:
        v = stack.pop()
        for u in indices[indptr[v]:indptr[v + 1]]:
            u = int(u)
            if u not in seen and g.values[u] >= level:
                seen.add(u)
                stack.append(u)
    return seen


def persistence_gap(pairs: list[PersistencePair], k: int) -> float:
    """``persistence[k-1] - persistence[k]``; missing entries count as 0."""
    pers = [p.persistence for p in pairs]
    above = pers[k - 1] if len(pers) >= k else 0.0
    below = pers[k] if len(pers) > k else 0.0
    return above - below


# selection and export

def cell_line(field: CellField, cid: int, cloud: PointCloud | None = None) -> LineParams:
    """Midpoint line of a cell in input coordinates."""
    r, theta = field.midpoint(cid)
    lp = canonicalize(LineParams(float(r), float(theta)))
    if cloud is None:
        cloud = _field_transform(field)
    return cloud.to_raw_line(lp)


def _field_transform(field: CellField) -> PointCloud:
    return PointCloud(np.zeros((1, 2)), field.scale, field.center)


def select_lines(pairs, field: CellField, cloud: PointCloud | None, policy: SelectionPolicy) -> list[DetectedLine]:
    if policy.top_k is not None:
        chosen = pairs[:policy.top_k]
    else:
        chosen = [p for p in pairs if p.persistence >= policy.alpha]
    if cloud is None:
        cloud = _field_transform(field)
    out = [DetectedLine(cell_line(field, p.representative, cloud), p.birth, p.persistence, p.representative)
           for p in chosen]
    out.sort(key=lambda d: (-d.persistence, -d.score, d.cell))
    return out


def _g(x: float) -> str:
    return format(float(x), ".9g")


def diagram_csv(pairs, field: CellField, cloud: PointCloud | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["birth", "death", "persistence", "r", "theta"])
    for p in pairs:
        lp = cell_line(field, p.representative, cloud)
        w.writerow([_g(p.birth), _g(p.death), _g(p.persistence), _g(lp.r), _g(lp.theta)])
    return buf.getvalue()


def lines_json(lines: list[DetectedLine]) -> str:
    rows = [
        {
            "r": float(_g(d.line.r)), "theta": float(_g(d.line.theta)),
            "score": float(_g(d.score)), "persistence": float(_g(d.persistence)), "cell": d.cell,
        }
        for d in lines
    ]
    return json.dumps(rows, indent=2)


def read_lines_json(text: str) -> list[DetectedLine]:
    return [DetectedLine(LineParams(d["r"], d["theta"]), d["score"], d["persistence"], d["cell"])
            for d in json.loads(text)]

