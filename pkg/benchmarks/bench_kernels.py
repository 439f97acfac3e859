"""Compare the numba and numpy backends on the hot kernels and a full detection.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--points 66]

Checks that both backends agree before timing them.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from tophough import _accel
from tophough.baseline import accumulate
from tophough.detect import detect
from tophough.geometry import KernelSpec
from tophough.kernels import HAT, box_lipschitz, score_lines
from tophough.persistence import SelectionPolicy
from tophough.scenes import gen_scene, random_specs


def _best(fn, repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=66)
    ap.add_argument("--boxes", type=int, default=200_000)
    args = ap.parse_args()
    if not _accel.NUMBA_AVAILABLE:
        raise SystemExit("numba is disabled or missing; nothing to compare")

    rng = np.random.default_rng(0)
    ang = rng.uniform(0, 2 * math.pi, args.points)
    xy = np.c_[np.cos(ang), np.sin(ang)] * np.sqrt(rng.uniform(0, 1, args.points))[:, None]
    r_lo = rng.uniform(-1.2, 1.1, args.boxes)
    t_lo = rng.uniform(0, math.pi - 0.05, args.boxes)
    r_hi, t_hi = r_lo + 0.01, t_lo + 0.01
    w = 1.0 / args.points
    scene = gen_scene(random_specs([18, 17, 16, 15], 1.0), 32.0, seed=0)

    cases = {
        "score_lines": lambda: score_lines(xy, r_lo, t_lo, HAT, 0.2, w),
        "box_lipschitz": lambda: box_lipschitz(xy, r_lo, r_hi, t_lo, t_hi, HAT, 0.2, w),
        "accumulate": lambda: accumulate(scene.points).counts,
        "detect": lambda: [p.birth for p in detect(scene.points, KernelSpec("hat", 5.0), 5.0 / len(scene.points),
                                                   SelectionPolicy(top_k=4)).pairs],
    }
    print(f"{'kernel':<14} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for name, fn in cases.items():
        results, times = {}, {}
        for b in ("numba", "numpy"):
            _accel.set_backend(b)
            results[b] = np.asarray(fn())
            times[b] = _best(fn, args.repeat)
        _accel.set_backend("numba")
        if not np.allclose(results["numba"], results["numpy"], rtol=1e-10, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<14} {times['numba']:>10.4f} {times['numpy']:>10.4f} {times['numpy'] / times['numba']:>7.1f}x")


if __name__ == "__main__":
    main()
