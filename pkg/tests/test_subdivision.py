import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tophough.geometry import KernelSpec, NormalizationMode, PointCloud, ScoreConfig, score_many
from tophough.lipschitz import local_lipschitz
from tophough.subdivision import (
    ApproxConfig,
    CellField,
    OutsideDomainError,
    build_approximation,
    initial_r0,
    locate,
)

from conftest import unit_disk_points


def field_for(seed, n=12, kind="hat", sigma=0.3, eps=0.05, **kw):
    rng = np.random.default_rng(seed)
    cloud = PointCloud.unit(unit_disk_points(rng, n))
    return cloud, build_approximation(cloud, KernelSpec(kind, sigma), ApproxConfig(eps, **kw))


def scan_locate(field, r, theta):
    """Oracle: linear scan over all leaves, smallest id containing the point."""
    for c in field.cells:
        if c.box.contains(r, theta):
            return c.id
    raise AssertionError("no leaf contains the point")


class TestInitialR0:
    def test_examples(self):
        cloud = PointCloud.unit([[0.0, 0.0]])
        assert initial_r0(cloud, KernelSpec("hat", 0.2), 0.01) == pytest.approx(1.198)
        assert initial_r0(cloud, KernelSpec("rbf", 0.2), 0.01) == pytest.approx(1 + 0.2 * math.sqrt(2 * math.log(100)))
        assert initial_r0(cloud, KernelSpec("rbf", 0.2), 0.01) == pytest.approx(1.60697, abs=1e-5)

    def test_limit_to_unit(self):
        cloud = PointCloud.unit([[0.0, 0.0]])
        assert initial_r0(cloud, KernelSpec("hat", 0.2), 1 - 1e-12) == pytest.approx(1.0)

    def test_invalid_epsilon(self):
        cloud = PointCloud.unit([[0.0, 0.0], [0.1, 0.1]])
        with pytest.raises(ValueError):
            initial_r0(cloud, KernelSpec("hat", 0.2), 1.0)
        with pytest.raises(ValueError):
            initial_r0(cloud, KernelSpec("hat", 0.2), 2.0, NormalizationMode.SUM)
        assert initial_r0(cloud, KernelSpec("hat", 0.2), 1.0, NormalizationMode.SUM) == pytest.approx(1.1)

    @pytest.mark.parametrize("kind", ["hat", "rbf"])
    def test_score_small_beyond_r0(self, rng, kind):
        cloud = PointCloud.unit(unit_disk_points(rng, 30))
        k = KernelSpec(kind, 0.2)
        r0 = initial_r0(cloud, k, 0.01)
        t = rng.uniform(0, math.pi, 5000)
        for sign in (-1, 1):
            for extra in (0.0, 0.1, 1.0):
                s = score_many(cloud, np.full(t.shape, sign * (r0 + extra)), t, ScoreConfig(k))
                assert np.all(s <= 0.01 + 1e-12)


class TestBuild:
    def test_origin_point_symmetry(self):
        cloud = PointCloud.unit([[0.0, 0.0]])
        field = build_approximation(cloud, KernelSpec("hat", 0.5), ApproxConfig(0.2))
        # the score is hat(|r|): cells at the same depth and r-column share one value
        for c in field.cells:
            assert c.value == pytest.approx(max(0.0, 1 - abs(c.box.midpoint[0]) / 0.5))

    def test_large_epsilon_single_cell(self, rng):
        cloud = PointCloud.unit(unit_disk_points(rng, 5))
        for eps, mode in ((1.0, "mean"), (3.0, "mean"), (5.0, "sum")):
            field = build_approximation(cloud, ScoreConfig(KernelSpec("hat", 0.2), mode), ApproxConfig(eps))
            assert len(field) == 1

    @pytest.mark.parametrize("kind", ["hat", "rbf"])
    def test_certified_error_by_sampling(self, kind):
        cloud, field = field_for(7, n=20, kind=kind, sigma=0.2, eps=0.02)
        assert field.n_flagged == 0
        rng = np.random.default_rng(99)
        r = rng.uniform(-field.r0, field.r0, 10_000)
        t = rng.uniform(0, math.pi, 10_000)
        exact = score_many(cloud, r, t, ScoreConfig(KernelSpec(kind, 0.2)))
        assert np.max(np.abs(exact - field.evaluate(r, t))) <= 0.02

    def test_stopping_predicate_holds(self):
        cloud, field = field_for(3, n=10, eps=0.05)
        k = KernelSpec("hat", 0.3)
        for c in field.cells[::7]:
            assert local_lipschitz(c.box, cloud, k) * c.box.diameter / 2 <= 0.05 + 1e-12

    def test_values_are_midpoint_scores(self):
        cloud, field = field_for(4)
        mids = np.array([c.box.midpoint for c in field.cells])
        want = score_many(cloud, mids[:, 0], mids[:, 1], ScoreConfig(KernelSpec("hat", 0.3)))
        np.testing.assert_allclose(field.values, want, atol=1e-15)

    @given(st.integers(0, 2**32 - 1))
    def test_tiling(self, seed):
        _, field = field_for(seed, n=6, eps=0.1)
        area = sum(c.box.area for c in field.cells)
        assert area == pytest.approx(field.domain.area, rel=1e-9)
        # interiors are disjoint: no leaf is an ancestor of another
        keys = {(int(d), int(i), int(j)) for d, i, j in zip(field.depth, field.i, field.j)}
        for d, i, j in keys:
            for up in range(1, d + 1):
                assert (d - up, i >> up, j >> up) not in keys

    def test_monotone_refinement(self):
        prev = 0
        for eps in (0.2, 0.1, 0.05, 0.025):
            _, field = field_for(11, n=10, eps=eps)
            assert len(field) >= prev
            prev = len(field)

    def test_deterministic(self):
        _, a = field_for(5)
        _, b = field_for(5)
        assert a.to_json() == b.to_json()

    def test_global_predicate_is_uniform(self):
        _, field = field_for(2, n=8, eps=0.1, predicate="global")
        assert len(set(field.depth.tolist())) == 1
        _, local = field_for(2, n=8, eps=0.1)
        assert len(local) < len(field)

    def test_max_depth_flags(self):
        _, field = field_for(1, n=10, sigma=0.05, eps=0.001, max_depth=3)
        assert field.depth.max() <= 3
        assert field.n_flagged > 0

    def test_breadth_first_ids(self):
        _, field = field_for(8)
        assert np.all(np.diff(field.depth) >= 0)

    def test_config_validation(self):
        for bad in (dict(epsilon=0.0), dict(epsilon=0.1, max_depth=0), dict(epsilon=0.1, predicate="x"),
                    dict(epsilon=0.1, min_cell_diameter=0.0)):
            with pytest.raises(ValueError):
                ApproxConfig(**bad)


class TestLocate:
    def test_midpoints(self):
        _, field = field_for(6)
        for c in field.cells:
            assert locate(field, c.box.midpoint).id == c.id

    def test_corners_take_smallest_id(self):
        _, field = field_for(6)
        for q in ((-field.r0, 0.0), (field.r0, math.pi), (0.0, 0.0), (0.0, math.pi / 2)):
            assert locate(field, q).id == scan_locate(field, *q)

    def test_random_against_scan(self, rng):
        _, field = field_for(9)
        for r, t in rng.uniform([-field.r0, 0], [field.r0, math.pi], (300, 2)):
            assert locate(field, (r, t)).id == scan_locate(field, r, t)

    def test_shared_edges_against_scan(self):
        _, field = field_for(10)
        for c in field.cells[::5]:
            for q in ((c.box.r_lo, c.box.theta_lo), (c.box.r_hi, c.box.midpoint[1]),
                      (c.box.midpoint[0], c.box.theta_hi)):
                assert locate(field, q).id == scan_locate(field, *q)

    def test_outside(self):
        _, field = field_for(6)
        with pytest.raises(OutsideDomainError):
            locate(field, (field.r0 + 0.1, 1.0))
        with pytest.raises(OutsideDomainError):
            locate(field, (0.0, -0.1))

    def test_evaluate_matches_locate(self, rng):
        _, field = field_for(12)
        q = rng.uniform([-field.r0, 0], [field.r0, math.pi], (500, 2))
        want = [locate(field, p).value for p in q]
        np.testing.assert_array_equal(field.evaluate(q[:, 0], q[:, 1]), want)
        assert field.evaluate(np.array([field.r0 + 1]), np.array([1.0]))[0] == 0.0


class TestSerialisation:
    def test_round_trip(self):
        _, field = field_for(13)
        back = CellField.from_json(field.to_json())
        assert back.to_json() == field.to_json()

    def test_minimal_keys(self):
        _, field = field_for(14)
        data = field.to_dict()
        assert {"domain", "epsilon", "cells"} <= set(data)
        assert {"r_lo", "r_hi", "theta_lo", "theta_hi", "value", "id"} <= set(data["cells"][0])
        # geometry alone is enough to rebuild the grid coordinates
        slim = {"domain": data["domain"], "epsilon": data["epsilon"],
                "cells": [{k: c[k] for k in ("r_lo", "r_hi", "theta_lo", "theta_hi", "value", "id")}
                          for c in data["cells"]]}
        back = CellField.from_dict(slim)
        np.testing.assert_array_equal(back.depth, field.depth)
        np.testing.assert_array_equal(back.i, field.i)
        np.testing.assert_array_equal(back.j, field.j)

    def test_bad_ids(self):
        data = field_for(15)[1].to_dict()
        data["cells"][0]["id"] = 10**6
        with pytest.raises(ValueError):
            CellField.from_dict(data)
