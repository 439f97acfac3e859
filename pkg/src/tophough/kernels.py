"""Hot numeric kernels: batched score evaluation and box-local Lipschitz bounds.

Each kernel has a numba loop implementation (``_*_nb``) and a vectorised numpy
implementation (``_*_np``).  The public wrappers dispatch on
:func:`tophough._accel.use_numba`.  Kernel kinds are passed as integers so the
compiled functions stay monomorphic: ``HAT = 0``, ``RBF = 1``.
"""
from __future__ import annotations

import math

import numpy as np

from . import _accel
from ._accel import njit

HAT = 0
RBF = 1

_INV_SQRT_E = 1.0 / math.sqrt(math.e)
_SQRT2 = math.sqrt(2.0)

# numpy path: cap on the (lines x points) temporaries, in elements
_CHUNK_ELEMS = 1 << 21


@njit
def _kernel_scalar(kind, sigma, d):
    if kind == HAT:
        v = 1.0 - d / sigma
        return v if v > 0.0 else 0.0
    return math.exp(-0.5 * (d / sigma) ** 2)


@njit
def _tail_scalar(kind, sigma, delta):
    if delta <= sigma:
        if kind == HAT:
            return 1.0 / sigma
        return _INV_SQRT_E / sigma
    if kind == HAT:
        return 0.0
    return delta / (sigma * sigma) * math.exp(-0.5 * (delta / sigma) ** 2)


@njit
def _vdist_scalar(x, y, r_lo, r_hi, t_lo, t_hi):
    f_lo = x * math.cos(t_lo) + y * math.sin(t_lo)
    f_hi = x * math.cos(t_hi) + y * math.sin(t_hi)
    fmin = min(f_lo, f_hi)
    fmax = max(f_lo, f_hi)
    rho = math.hypot(x, y)
    if rho > 0.0:
        phi = math.atan2(y, x)
        k = math.ceil((t_lo - phi) / math.pi)
        tc = phi + k * math.pi
        while tc <= t_hi:
            # f(phi + k*pi) = (-1)^k * rho
            if k % 2 == 0:
                fmax = max(fmax, rho)
            else:
                fmin = min(fmin, -rho)
            k += 1
            tc = phi + k * math.pi
    gap = r_lo - fmax
    other = fmin - r_hi
    if other > gap:
        gap = other
    return gap if gap > 0.0 else 0.0


@njit
def _score_lines_nb(xs, ys, r, theta, kind, sigma, weight):
    m = r.shape[0]
    n = xs.shape[0]
    out = np.empty(m)
    for i in range(m):
        c = math.cos(theta[i])
        s = math.sin(theta[i])
        acc = 0.0
        for j in range(n):
            d = abs(r[i] - xs[j] * c - ys[j] * s)
            acc += _kernel_scalar(kind, sigma, d)
        out[i] = weight * acc
    return out


@njit
def _box_lipschitz_nb(xs, ys, r_lo, r_hi, t_lo, t_hi, kind, sigma, weight):
    m = r_lo.shape[0]
    n = xs.shape[0]
    out = np.empty(m)
    for i in range(m):
        acc = 0.0
        for j in range(n):
            delta = _vdist_scalar(xs[j], ys[j], r_lo[i], r_hi[i], t_lo[i], t_hi[i])
            acc += _tail_scalar(kind, sigma, delta)
        out[i] = _SQRT2 * weight * acc
    return out


def _kernel_np(kind, sigma, d):
    if kind == HAT:
        return np.maximum(0.0, 1.0 - d / sigma)
    return np.exp(-0.5 * (d / sigma) ** 2)


def _tail_np(kind, sigma, delta):
    near = delta <= sigma
    if kind == HAT:
        return np.where(near, 1.0 / sigma, 0.0)
    far = delta / (sigma * sigma) * np.exp(-0.5 * (delta / sigma) ** 2)
    return np.where(near, _INV_SQRT_E / sigma, far)


def _vdist_np(xs, ys, r_lo, r_hi, t_lo, t_hi):
    """Vertical distances, shape (boxes, points)."""
    t_lo = t_lo[:, None]
    t_hi = t_hi[:, None]
    f_lo = xs * np.cos(t_lo) + ys * np.sin(t_lo)
    f_hi = xs * np.cos(t_hi) + ys * np.sin(t_hi)
    fmin = np.minimum(f_lo, f_hi)
    fmax = np.maximum(f_lo, f_hi)
    rho = np.hypot(xs, ys)
    phi = np.arctan2(ys, xs)
    live = rho > 0.0
    # phi in (-pi, pi] and theta in [0, pi]: critical angles phi + k*pi, k in -1..2
    for k in range(-1, 3):
        tc = phi + k * math.pi
        hit = (tc >= t_lo) & (tc <= t_hi) & live
        if k % 2 == 0:
            fmax = np.where(hit, np.maximum(fmax, rho), fmax)
        else:
            fmin = np.where(hit, np.minimum(fmin, -rho), fmin)
    gap = np.maximum(r_lo[:, None] - fmax, fmin - r_hi[:, None])
    return np.maximum(gap, 0.0)


def _chunks(m, n):
    step = max(1, _CHUNK_ELEMS // max(n, 1))
    for start in range(0, m, step):
        yield slice(start, min(m, start + step))


def _score_lines_np(xs, ys, r, theta, kind, sigma, weight):
    out = np.empty(r.shape[0])
    for sl in _chunks(r.shape[0], xs.shape[0]):
        t = theta[sl, None]
        d = np.abs(r[sl, None] - xs * np.cos(t) - ys * np.sin(t))
        out[sl] = weight * _kernel_np(kind, sigma, d).sum(axis=1)
    return out


def _box_lipschitz_np(xs, ys, r_lo, r_hi, t_lo, t_hi, kind, sigma, weight):
    out = np.empty(r_lo.shape[0])
    for sl in _chunks(r_lo.shape[0], xs.shape[0]):
        delta = _vdist_np(xs, ys, r_lo[sl], r_hi[sl], t_lo[sl], t_hi[sl])
        out[sl] = _SQRT2 * weight * _tail_np(kind, sigma, delta).sum(axis=1)
    return out


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def score_lines(xy, r, theta, kind, sigma, weight):
    """Weighted kernel score of every line ``(r[i], theta[i])`` against ``xy``."""
    xy = _f64(xy)
    args = (xy[:, 0].copy(), xy[:, 1].copy(), _f64(r), _f64(theta), int(kind), float(sigma), float(weight))
    if _accel.use_numba():
        return _score_lines_nb(*args)
    return _score_lines_np(*args)


def box_lipschitz(xy, r_lo, r_hi, t_lo, t_hi, kind, sigma, weight):
    """Lipschitz bound ``sqrt(2) * weight * sum_p tail(vdist(box, p))`` per box."""
    xy = _f64(xy)
    args = (
        xy[:, 0].copy(), xy[:, 1].copy(),
        _f64(r_lo), _f64(r_hi), _f64(t_lo), _f64(t_hi),
        int(kind), float(sigma), float(weight),
    )
    if _accel.use_numba():
        return _box_lipschitz_nb(*args)
    return _box_lipschitz_np(*args)


def vertical_distances(xy, r_lo, r_hi, t_lo, t_hi):
    """Matrix of vertical distances between boxes (rows) and dual curves (columns)."""
    xy = _f64(xy)
    return _vdist_np(xy[:, 0], xy[:, 1], _f64(r_lo), _f64(r_hi), _f64(t_lo), _f64(t_hi))
