from __future__ import annotations

import json
import math

import numpy as np
import pytest
from conftest import group_model
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspgeom.boundary import (
    PARABOLIC,
    RAY,
    BoundaryPoint,
    BoundarySample,
    ShadowDecoration,
    VisualConfig,
    boundary_json,
    horoball_entry_constant,
    parabolic_point,
    quasi_centre_gap,
    sample_boundary,
    sample_horoball_proxies,
    separation_check,
    shadow_decoration,
    uniform_perfectness_check,
    visual_completeness_check,
    visual_matrix,
    visual_quasimetric,
)
from cuspgeom.cusped_space import build_cusped_space
from cuspgeom.errors import InputError
from cuspgeom.group_ball import PeripheralStructure
from cuspgeom.metric_graph import gromov_product, path_graph


def _rays(sample, k=None):
    pts = tuple(sample.rays[:k])
    return BoundarySample(pts, sample.shell_radius, sample.seed)


class TestSampling:
    def test_only_parabolic_points(self):
        g = path_graph(9)
        c = build_cusped_space(g, PeripheralStructure.from_sets([[0, 1, 2], [3, 4, 5], [6, 7, 8]]), 3)
        s = sample_boundary(c, VisualConfig(), 0, 0)
        assert [p.kind for p in s] == [PARABOLIC] * 3
        assert [p.peripheral for p in s] == [0, 1, 2]

    def test_tree_rays_are_the_sphere(self):
        _, c = group_model((), 4, 2)
        s = sample_boundary(c, VisualConfig(1.0, 4.0), None, 0)
        sphere = {v for v in range(c.base.vertex_count) if len(c.base.label(v)) == 4}
        assert set(s.terminals().tolist()) == sphere and len(s) == 4 * 27

    def test_punctured_torus_sample_replays(self):
        _, c = group_model(("abAB",), 6, 6)
        cfg = VisualConfig(1.0, 4.0)
        a = sample_boundary(c, cfg, 200, 1)
        b = sample_boundary(c, cfg, 200, 1)
        assert a == b
        assert len(a.rays) == 200 and len(a.parabolic) == c.peripheral_count
        d = c.graph.distances_from(c.basepoint)
        assert all(d[p.terminal] >= 4.0 for p in a.rays)
        assert sample_boundary(c, cfg, 200, 2) != a

    def test_unreachable_shell(self):
        _, c = group_model((), 2, 2)
        with pytest.raises(InputError):
            sample_boundary(c, VisualConfig(1.0, 10.0), 5, 0)

    def test_point_validation(self):
        with pytest.raises(InputError):
            BoundaryPoint(PARABOLIC, 3)
        with pytest.raises(InputError):
            BoundaryPoint(RAY, 3, 1)
        with pytest.raises(InputError):
            VisualConfig(0.0)

    def test_horoball_proxies(self):
        _, c = group_model((0,), 3, 3)
        s = sample_horoball_proxies(c, [0, 1], min_level=2)
        assert len(s.parabolic) == 2
        assert len(s.rays) == 2 * (len(c.peripheral_vertices(0)) + len(c.peripheral_vertices(1)))
        assert all(c.level(p.terminal) >= 2 for p in s.rays)


class TestVisualQuasimetric:
    def test_identical_point(self):
        _, c = group_model((0,), 3, 3)
        a = parabolic_point(c, 0)
        assert visual_quasimetric(c, a, a, 1.0) == 0.0

    def test_substitution(self):
        _, c = group_model((), 4, 2)
        a = BoundaryPoint(RAY, c.base.index_of("aaab"))
        b = BoundaryPoint(RAY, c.base.index_of("aaaB"))
        assert gromov_product(c.graph, 0, a.terminal, b.terminal) == 3.0
        assert visual_quasimetric(c, a, b, 1.0) == pytest.approx(math.exp(-3))
        assert visual_quasimetric(c, a, b, 1.0) == pytest.approx(0.049787, abs=1e-6)

    def test_branching_at_o(self):
        _, c = group_model((), 4, 2)
        a = BoundaryPoint(RAY, c.base.index_of("aaaa"))
        b = BoundaryPoint(RAY, c.base.index_of("bbbb"))
        assert visual_quasimetric(c, a, b, 1.0) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(st.data(), st.floats(0.1, 2.0))
    def test_symmetric_and_matches_matrix(self, data, eps):
        _, c = group_model(("abAB",), 4, 3)
        s = sample_boundary(c, VisualConfig(eps, 3.0), 15, data.draw(st.integers(0, 50)))
        rho = visual_matrix(c, s.points, eps)
        assert np.array_equal(rho, rho.T)
        assert np.all(np.diag(rho) == 0.0)
        i = data.draw(st.integers(0, len(s) - 1))
        j = data.draw(st.integers(0, len(s) - 1))
        assert rho[i, j] == pytest.approx(visual_quasimetric(c, s[i], s[j], eps), abs=1e-15)

    def test_parabolic_proxy_stabilises_with_depth(self):
        vals = []
        for depth in (4, 5, 6, 7):
            _, c = group_model((0,), 4, depth)
            vals.append(visual_quasimetric(c, parabolic_point(c, 0), parabolic_point(c, 2), 1.0))
        steps = np.abs(np.diff(vals))
        assert np.all(steps[1:] <= steps[:-1]) and steps[-1] < 1e-3


class TestShadows:
    def test_basepoint_in_p(self):
        _, c = group_model((0,), 3, 3)
        assert shadow_decoration(c, 1.0).radius(0) == 1.0

    @pytest.mark.parametrize("eps, expected", [(1.0, math.exp(-2)), (0.5, math.exp(-1))])
    def test_distance_two(self, eps, expected):
        _, c = group_model((0,), 3, 3)
        pid = next(p for p, ps in enumerate(c.peripherals) if ps.rep == "bb")
        assert c.distance_to_peripheral(pid) == 2.0
        assert shadow_decoration(c, eps).radius(pid) == pytest.approx(expected, rel=1e-15)

    def test_needs_peripherals(self):
        _, c = group_model((), 2, 2)
        with pytest.raises(InputError):
            shadow_decoration(c, 1.0)


class TestSeparation:
    def test_apexes_branching_at_o(self):
        _, c = group_model((0, 1), 3, 3)
        dec = shadow_decoration(c, 1.0)
        through_e = [e for e in dec.entries if e.r == 1.0]
        assert len(through_e) == 2
        assert separation_check(c, ShadowDecoration(1.0, tuple(through_e))) == 1.0

    def test_single_peripheral(self):
        _, c = group_model((0,), 3, 3)
        dec = shadow_decoration(c, 1.0)
        assert separation_check(c, ShadowDecoration(1.0, dec.entries[:1])) == 0.0

    @pytest.mark.parametrize("peripherals", [("abAB",), (0, 1)])
    def test_power_law_in_epsilon(self, peripherals):
        # every ratio is exp(eps * y) for an eps-free y, so C(eps) = C(1) ** eps
        _, c = group_model(peripherals, 4, 4)
        c1 = separation_check(c, shadow_decoration(c, 1.0))
        for eps in (0.5, 0.25, 0.1):
            assert separation_check(c, shadow_decoration(c, eps)) == pytest.approx(c1**eps, rel=1e-12)

    def test_nonincreasing_as_epsilon_decreases_when_c_at_least_one(self):
        _, c = group_model((0, 1), 4, 4)
        vals = [separation_check(c, shadow_decoration(c, eps)) for eps in (1.0, 0.5, 0.25, 0.1)]
        assert vals[0] >= 1.0
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_below_one_moves_toward_one(self):
        _, c = group_model(("abAB",), 5, 5)
        vals = [separation_check(c, shadow_decoration(c, eps)) for eps in (1.0, 0.5, 0.25, 0.1)]
        assert vals[0] == pytest.approx(math.exp(-0.5), rel=1e-12)
        assert all(a <= b <= 1.0 for a, b in zip(vals, vals[1:]))


class TestUniformPerfectness:
    def test_two_points(self):
        rho = np.array([[0.0, 0.3], [0.3, 0.0]])
        assert uniform_perfectness_check(rho) == 1.0
        assert uniform_perfectness_check(rho, radii=[0.5]) == 1.0

    def test_tree_sphere_gives_e(self):
        _, c = group_model((), 5, 2)
        s = sample_boundary(c, VisualConfig(1.0, 5.0), None, 0)
        rho = visual_matrix(c, s.points, 1.0)
        assert uniform_perfectness_check(rho) == pytest.approx(math.e, rel=1e-6)

    def test_line_fails(self):
        # virtually cyclic: two ends, so balls around an end are empty at many scales
        from cuspgeom.group_ball import PresentationSpec, cayley_ball

        ball = cayley_ball(PresentationSpec.free(1), 8)
        c = build_cusped_space(ball, PeripheralStructure(), 1)
        s = sample_boundary(c, VisualConfig(1.0, 2.0), None, 0)
        rho = visual_matrix(c, s.points, 1.0)
        assert uniform_perfectness_check(rho) == math.inf

    def test_rejects(self):
        with pytest.raises(InputError):
            uniform_perfectness_check(np.zeros((1, 1)))


class TestVisualCompleteness:
    @pytest.fixture(scope="class")
    @classmethod
    def scans(cls):
        out = {}
        for r in (5, 6):
            _, c = group_model(("abAB",), r, 6)
            s = _rays(sample_boundary(c, VisualConfig(1.0, 4.0), 60, 1), 40)
            d = c.graph.distances_from(0)[: c.base.vertex_count]
            probes = np.flatnonzero(d == 4)[:30].tolist()
            deep = [c.vertex(0, v, 5) for v in c.peripheral_vertices(0)]
            out[r] = (
                visual_completeness_check(c, s, [c.basepoint]),
                visual_completeness_check(c, s, probes),
                visual_completeness_check(c, s, deep),
            )
        return out

    def test_probe_at_o(self, scans):
        assert scans[5][0] <= 1.0

    def test_sphere_probes_stable(self, scans):
        assert scans[5][1] < math.inf and abs(scans[6][1] - scans[5][1]) <= 1.0

    def test_deep_probe_bounded(self, scans):
        assert scans[5][2] < math.inf and abs(scans[6][2] - scans[5][2]) <= 1.0


class TestMeasuredConstants:
    def test_quasi_centre_gap_stable(self):
        vals = []
        for r in (5, 6):
            _, c = group_model(("abAB",), r, 6)
            s = _rays(sample_boundary(c, VisualConfig(1.0, 4.0), 60, 1))
            vals.append(quasi_centre_gap(c, s, 1.0, [(i, i + 1) for i in range(0, 58, 2)]))
        assert max(vals) <= 2.0 and abs(vals[1] - vals[0]) <= 1.0

    def test_horoball_entry_constant(self):
        vals = []
        for r in (5, 6):
            _, c = group_model(("abAB",), r, 6)
            s = _rays(sample_boundary(c, VisualConfig(1.0, 4.0), 60, 1))
            vals.append(horoball_entry_constant(c, shadow_decoration(c, 1.0), s))
        assert all(1.0 <= v < 2.0 for v in vals)


def test_json_export():
    _, c = group_model((0,), 3, 3)
    dec = shadow_decoration(c, 1.0)
    s = sample_boundary(c, VisualConfig(1.0, 2.0), 3, 0)
    doc = json.loads(boundary_json(dec, s, 1.0))
    assert set(doc) == {"epsilon", "points", "shadows"}
    assert doc["points"][0] == {"kind": "parabolic", "terminal": c.apex(0), "peripheral": 0}
    assert len(doc["shadows"]) == c.peripheral_count
