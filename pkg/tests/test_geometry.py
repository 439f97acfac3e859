import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tophough.geometry import (
    KernelSpec,
    LineParams,
    NormalizationMode,
    PointCloud,
    ScoreConfig,
    canonicalize,
    kernel_eval,
    point_line_distance,
    score,
    score_many,
    sinusoid,
)

from conftest import unit_disk_points

finite = st.floats(-1e3, 1e3, allow_nan=False)
angles = st.floats(-20.0, 20.0, allow_nan=False)
HAT1 = KernelSpec("hat", 1.0)
RBF1 = KernelSpec("rbf", 1.0)


def same_line(a, b, probes=((0.3, -1.2), (2.0, 5.0), (-4.0, 0.5))):
    """Both parameter pairs give the same signed distance up to a global sign."""
    da = [a.r - x * math.cos(a.theta) - y * math.sin(a.theta) for x, y in probes]
    db = [b.r - x * math.cos(b.theta) - y * math.sin(b.theta) for x, y in probes]
    return np.allclose(da, db, atol=1e-9) or np.allclose(da, [-v for v in db], atol=1e-9)


class TestCanonicalize:
    def test_pi_maps_to_zero(self):
        assert canonicalize(LineParams(1.0, math.pi)) == LineParams(-1.0, 0.0)

    def test_identity_in_range(self):
        assert canonicalize(LineParams(0.5, 1.0)) == LineParams(0.5, 1.0)

    def test_three_half_pi(self):
        lp = canonicalize(LineParams(2.0, 1.5 * math.pi))
        assert lp.r == pytest.approx(-2.0)
        assert lp.theta == pytest.approx(0.5 * math.pi)
        assert same_line(lp, LineParams(2.0, 1.5 * math.pi))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            canonicalize(LineParams(math.nan, 0.0))
        with pytest.raises(ValueError):
            canonicalize(LineParams(0.0, math.inf))

    @given(finite, angles)
    def test_range_and_set_equality(self, r, theta):
        lp = canonicalize(LineParams(r, theta))
        assert 0.0 <= lp.theta < math.pi
        assert abs(lp.r) == pytest.approx(abs(r))
        assert same_line(lp, LineParams(r, theta))

    @given(finite, angles)
    def test_idempotent(self, r, theta):
        once = canonicalize(LineParams(r, theta))
        assert canonicalize(once) == once


class TestDistance:
    def test_examples(self):
        assert point_line_distance((1, 0), LineParams(1, 0)) == 0
        assert point_line_distance((0, 0), LineParams(-2.5, 0.7)) == pytest.approx(2.5)
        assert point_line_distance((3, 4), LineParams(0, math.pi / 2)) == pytest.approx(4.0)

    @given(finite, finite, finite, angles)
    def test_matches_geometric_projection(self, x, y, r, theta):
        # foot of the perpendicular from the origin, direction along the line
        n = np.array([math.cos(theta), math.sin(theta)])
        foot = r * n
        rel = np.array([x, y]) - foot
        geometric = abs(rel @ n)
        assert point_line_distance((x, y), LineParams(r, theta)) == pytest.approx(geometric, abs=1e-7)

    @given(finite, finite, finite, angles)
    def test_canonical_invariance(self, x, y, r, theta):
        lp = LineParams(r, theta)
        assert point_line_distance((x, y), lp) == pytest.approx(
            point_line_distance((x, y), canonicalize(lp)), abs=1e-7)


class TestSinusoid:
    def test_examples(self):
        assert sinusoid((1, 0), 0.0) == 1
        assert sinusoid((0, 0), 1.3) == 0
        assert sinusoid((1, 1), math.pi / 4) == pytest.approx(math.sqrt(2))

    @given(finite, finite, st.floats(0, math.pi))
    def test_curve_lies_on_point(self, x, y, theta):
        assert point_line_distance((x, y), LineParams(sinusoid((x, y), theta), theta)) <= 1e-9 * (1 + abs(x) + abs(y))


class TestKernel:
    def test_examples(self):
        assert kernel_eval(HAT1, 0.5) == 0.5
        assert kernel_eval(HAT1, 2.0) == 0.0
        assert kernel_eval(RBF1, 1.0) == pytest.approx(0.6065306597126334, rel=1e-15)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            kernel_eval(HAT1, -0.1)

    @pytest.mark.parametrize("kind", ["hat", "rbf"])
    @given(sigma=st.floats(0.01, 10), a=st.floats(0, 50), b=st.floats(0, 50))
    def test_range_and_monotone(self, kind, sigma, a, b):
        k = KernelSpec(kind, sigma)
        lo, hi = sorted((a, b))
        assert kernel_eval(k, 0.0) == 1.0
        assert 0.0 <= kernel_eval(k, hi) <= kernel_eval(k, lo) <= 1.0

    def test_hat_support(self):
        k = KernelSpec("hat", 0.3)
        assert kernel_eval(k, 0.3) == 0.0
        assert kernel_eval(k, 7.0) == 0.0

    @pytest.mark.parametrize("kind", ["hat", "rbf"])
    def test_inverse(self, kind):
        k = KernelSpec(kind, 0.7)
        for level in (0.01, 0.3, 0.9):
            assert kernel_eval(k, k.inverse(level)) == pytest.approx(level)

    def test_invalid_sigma(self):
        for bad in (0.0, -1.0, math.nan, math.inf):
            with pytest.raises(ValueError):
                KernelSpec("hat", bad)
        with pytest.raises(ValueError):
            KernelSpec("box", 1.0)


class TestScore:
    def test_single_point_on_line(self):
        cloud = PointCloud.unit([[1.0, 0.0]])
        for k in (HAT1, RBF1):
            assert score(cloud, LineParams(1, 0), ScoreConfig(k)) == pytest.approx(1.0)

    def test_two_points(self):
        cloud = PointCloud.unit([[0.0, 0.0], [1.0, 0.0]])
        assert score(cloud, LineParams(0, 0), ScoreConfig(HAT1)) == pytest.approx(0.5)
        assert score(cloud, LineParams(0, 0), ScoreConfig(HAT1, "sum")) == pytest.approx(1.0)

    def test_far_line_is_zero(self, rng):
        cloud = PointCloud.unit(unit_disk_points(rng, 30))
        assert score(cloud, LineParams(1.5, 0.3), ScoreConfig(KernelSpec("hat", 0.4))) == 0.0

    def test_matches_kernel_sum(self, rng):
        pts = unit_disk_points(rng, 25)
        cloud = PointCloud.unit(pts)
        for k in (KernelSpec("hat", 0.3), KernelSpec("rbf", 0.2)):
            for r, t in rng.uniform([-1.2, 0], [1.2, math.pi], (20, 2)):
                want = np.mean([kernel_eval(k, point_line_distance(p, (r, t))) for p in pts])
                assert score(cloud, (r, t), ScoreConfig(k)) == pytest.approx(want, abs=1e-14)

    def test_empty_cloud_rejected(self):
        with pytest.raises(ValueError):
            PointCloud.unit(np.zeros((0, 2)))

    def test_full_score_means_collinear(self, rng):
        pts = np.c_[np.linspace(-0.6, 0.6, 7), np.full(7, 0.2)]
        cloud = PointCloud.unit(pts)
        assert score(cloud, (0.2, math.pi / 2), ScoreConfig(RBF1)) == pytest.approx(1.0)
        assert score(cloud, (0.21, math.pi / 2), ScoreConfig(RBF1)) < 1.0

    @given(st.integers(0, 2**32 - 1))
    def test_canonical_invariance_and_bounds(self, seed):
        rng = np.random.default_rng(seed)
        cloud = PointCloud.unit(unit_disk_points(rng, 12))
        r, t = rng.uniform(-3, 3), rng.uniform(-10, 10)
        for k in (KernelSpec("hat", 0.3), KernelSpec("rbf", 0.3)):
            cfg = ScoreConfig(k)
            s = score(cloud, (r, t), cfg)
            assert 0.0 <= s <= 1.0
            assert s == pytest.approx(score(cloud, canonicalize(LineParams(r, t)), cfg), abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.sampled_from(["hat", "rbf"]))
    def test_lipschitz_in_r(self, seed, kind):
        rng = np.random.default_rng(seed)
        cloud = PointCloud.unit(unit_disk_points(rng, 10))
        k = KernelSpec(kind, rng.uniform(0.05, 1.0))
        t = rng.uniform(0, math.pi)
        r1, r2 = rng.uniform(-1.5, 1.5, 2)
        cfg = ScoreConfig(k)
        diff = abs(score(cloud, (r1, t), cfg) - score(cloud, (r2, t), cfg))
        assert diff <= k.lipschitz * abs(r1 - r2) + 1e-12

    @pytest.mark.parametrize("kind", ["hat", "rbf"])
    def test_perturbation_stability(self, rng, kind):
        k = KernelSpec(kind, 0.25)
        eps_p = 0.01
        for _ in range(10):
            pts = unit_disk_points(rng, 20, radius=0.99)
            ang = rng.uniform(0, 2 * math.pi, 20)
            moved = pts + eps_p * rng.uniform(0, 1, (20, 1)) * np.c_[np.cos(ang), np.sin(ang)]
            a, b = PointCloud.unit(pts), PointCloud.unit(moved)
            r = rng.uniform(-1.3, 1.3, 2000)
            t = rng.uniform(0, math.pi, 2000)
            cfg = ScoreConfig(k)
            gap = np.max(np.abs(score_many(a, r, t, cfg) - score_many(b, r, t, cfg)))
            assert gap <= k.lipschitz * eps_p + 1e-12


class TestPointCloud:
    def test_from_raw_normalises_into_disk(self, rng):
        pts = rng.uniform(0, 32, (40, 2))
        cloud = PointCloud.from_raw(pts)
        assert np.max(np.hypot(*cloud.xy.T)) <= 1.0
        np.testing.assert_allclose(cloud.raw, pts, atol=1e-12)

    def test_single_point(self):
        cloud = PointCloud.from_raw([[3.0, 4.0]])
        assert cloud.scale == 1.0
        np.testing.assert_allclose(cloud.xy, [[0.0, 0.0]])

    def test_line_round_trip(self, rng):
        cloud = PointCloud.from_raw(rng.uniform(0, 32, (10, 2)))
        for r, t in rng.uniform([-30, 0], [30, math.pi], (20, 2)):
            back = cloud.to_raw_line(cloud.to_normalized_line(LineParams(r, t)))
            assert same_line(back, LineParams(r, t))

    def test_score_invariant_under_normalisation(self, rng):
        pts = rng.uniform(0, 32, (15, 2))
        cloud = PointCloud.from_raw(pts)
        k = KernelSpec("hat", 3.0)
        for r, t in rng.uniform([0, 0], [40, math.pi], (20, 2)):
            raw = np.mean([kernel_eval(k, point_line_distance(p, (r, t))) for p in pts])
            norm = score(cloud, cloud.to_normalized_line(LineParams(r, t)),
                         ScoreConfig(k.scaled(1 / cloud.scale)))
            assert norm == pytest.approx(raw, abs=1e-12)

    def test_rejects_outside_disk(self):
        with pytest.raises(ValueError):
            PointCloud.unit([[1.0, 0.5]])
        with pytest.raises(ValueError):
            PointCloud.from_raw([[0.0, math.nan]])

    def test_sum_mode_weight(self):
        cfg = ScoreConfig(HAT1, NormalizationMode.SUM)
        assert cfg.weight(7) == 1.0
        assert cfg.max_score(7) == 7.0
