from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from cuspgeom.errors import InputError
from cuspgeom.realhyp import (
    HalfSpacePoint,
    Horoball,
    HoroballFamilyConfig,
    build_horoball_family,
    busemann_halfspace,
    busemann_limit,
    family_json,
    horoball_distance,
    horoball_separation_check,
    hyp_distance,
    hyp_distance_quadrature,
    separation_t0,
)

coords = st.floats(-5, 5, allow_nan=False)
heights = st.floats(0.05, 20, allow_nan=False)
points2 = st.builds(lambda x, y, h: HalfSpacePoint((x, y), h), coords, coords, heights)


def _sphere_point(h: Horoball, u: np.ndarray) -> HalfSpacePoint:
    """Point of the horosphere in direction ``u`` from its Euclidean centre."""
    c = np.asarray(h.center)
    y = c + (h.diameter / 2) * u / np.linalg.norm(u)
    return HalfSpacePoint(tuple(y[:-1]), float(y[-1]))


class TestDistance:
    def test_same_point(self):
        p = HalfSpacePoint((0.3, -1.0), 2.0)
        assert hyp_distance(p, p) == 0.0

    @pytest.mark.parametrize("h1, h2", [(1.0, math.e), (0.2, 7.0), (3.0, 3.0)])
    def test_vertical(self, h1, h2):
        p, q = HalfSpacePoint((1.0, 1.0), h1), HalfSpacePoint((1.0, 1.0), h2)
        assert hyp_distance(p, q) == pytest.approx(abs(math.log(h1) - math.log(h2)), abs=1e-12)

    def test_horizontal_gap_two(self):
        val = hyp_distance(HalfSpacePoint((0.0,), 1.0), HalfSpacePoint((2.0,), 1.0))
        assert val == pytest.approx(2 * math.log(1 + math.sqrt(2)), abs=1e-12)
        assert val == pytest.approx(1.7627, abs=1e-4)
        assert hyp_distance_quadrature(HalfSpacePoint((0.0,), 1.0), HalfSpacePoint((2.0,), 1.0)) == pytest.approx(
            val, abs=1e-9
        )

    @settings(max_examples=300)
    @given(points2, points2)
    def test_matches_quadrature(self, p, q):
        assert hyp_distance(p, q) == pytest.approx(hyp_distance_quadrature(p, q), abs=1e-6)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(5)
        P = [HalfSpacePoint(tuple(rng.normal(size=2)), float(np.exp(rng.normal()))) for _ in range(3 * 10**4)]
        worst = 0.0
        for k in range(0, len(P), 3):
            x, y, z = P[k : k + 3]
            worst = max(worst, hyp_distance(x, z) - hyp_distance(x, y) - hyp_distance(y, z))
        assert worst <= 1e-9

    def test_admissible_estimate(self):
        # the additive comparison with 2 ln(|x-y| e^-max + 1) + |m - n|
        worst = 0.0
        for D in np.linspace(0, 200, 41):
            for m in range(-3, 6):
                for n in range(-3, 6):
                    p = HalfSpacePoint((0.0, 0.0), math.exp(m))
                    q = HalfSpacePoint((float(D), 0.0), math.exp(n))
                    est = 2 * math.log(D * math.exp(-max(m, n)) + 1) + abs(m - n)
                    worst = max(worst, abs(hyp_distance(p, q) - est))
        assert worst <= 3.0

    def test_small_scale_ratio(self):
        gaps = np.linspace(1e-4, 1.0, 200)
        ratio = np.array([hyp_distance(HalfSpacePoint((0.0,), 1.0), HalfSpacePoint((g,), 1.0)) / g for g in gaps])
        assert np.all(ratio <= 1.0 + 1e-12)
        assert np.all(ratio >= 2 * math.asinh(0.5) - 1e-12)
        assert ratio[0] == pytest.approx(1.0, abs=1e-8)

    def test_rejects(self):
        with pytest.raises(InputError):
            HalfSpacePoint((0.0,), 0.0)
        with pytest.raises(InputError):
            hyp_distance(HalfSpacePoint((0.0,), 1.0), HalfSpacePoint((0.0, 0.0), 1.0))


class TestBusemann:
    def test_infinity(self):
        o = HalfSpacePoint((0.0, 0.0), 1.0)
        assert busemann_halfspace(None, HalfSpacePoint((0.0, 0.0), math.e**3), o) == -3.0
        assert busemann_halfspace(None, o, o) == 0.0

    @settings(max_examples=100)
    @given(points2, st.tuples(coords, coords))
    @example(HalfSpacePoint((0.0, 0.0), 2.0), (0.0, 4.691915649792423e-15))
    def test_finite_matches_limit(self, x, a):
        o = HalfSpacePoint((0.0, 0.0), 1.0)
        assert busemann_halfspace(a, x, o) == pytest.approx(busemann_limit(a, x, o), abs=1e-6)

    @settings(max_examples=100)
    @given(points2, points2, st.tuples(coords, coords))
    def test_one_lipschitz(self, x, y, a):
        o = HalfSpacePoint((0.0, 0.0), 1.0)
        gap = abs(busemann_halfspace(a, x, o) - busemann_halfspace(a, y, o))
        assert gap <= hyp_distance(x, y) + 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            busemann_halfspace((0.0,), HalfSpacePoint((0.0, 0.0), 1.0), HalfSpacePoint((0.0, 0.0), 1.0))


class TestFamilies:
    def test_horosphere_is_the_level_set(self):
        cfg = HoroballFamilyConfig((((0.7, -0.4), 1.0),), 1.0, 0.0, 0.0)
        (h,) = build_horoball_family(cfg)
        o = cfg.base()
        rng = np.random.default_rng(2)
        for u in rng.normal(size=(100, 3)):
            if u[-1] > -0.999 * np.linalg.norm(u):  # stay off the tangent point
                y = _sphere_point(h, u)
                assert busemann_halfspace(h.tangent, y, o) == pytest.approx(0.0, abs=1e-6)

    @pytest.mark.parametrize("eps, r, t", [(1.0, 0.3, 0.5), (0.5, 0.6, -1.0), (2.0, 0.1, 2.0)])
    def test_sublevel_value(self, eps, r, t):
        cfg = HoroballFamilyConfig((((1.5, 0.2), r),), eps, t, min(t, 0.0))
        (h,) = build_horoball_family(cfg)
        top = HalfSpacePoint(h.tangent, h.diameter)
        assert busemann_halfspace(h.tangent, top, cfg.base()) == pytest.approx(-t + math.log(r) / eps, abs=1e-9)
        assert h.contains(HalfSpacePoint(h.tangent, h.diameter / 2))

    def test_diameter_scaling(self):
        pts = (((0.0,), 0.5), ((1.0,), 0.25))
        for s in (0.3, 1.0, 2.5):
            a = build_horoball_family(HoroballFamilyConfig(pts, 1.0, 0.0, 0.0))
            b = build_horoball_family(HoroballFamilyConfig(pts, 1.0, s, 0.0))
            for x, y in zip(a, b):
                assert y.diameter == pytest.approx(x.diameter * math.exp(-s), rel=1e-14)

    @pytest.mark.parametrize("gap, d1, d2", [(2.0, 0.5, 0.3), (1.0, 0.2, 0.2), (0.5, 0.1, 0.9)])
    def test_two_horoball_distance_matches_minimisation(self, gap, d1, d2):
        h1, h2 = Horoball((0.0,), d1), Horoball((gap,), d2)

        def f(angles):
            p = _sphere_point(h1, np.array([math.cos(angles[0]), math.sin(angles[0])]))
            q = _sphere_point(h2, np.array([math.cos(angles[1]), math.sin(angles[1])]))
            return hyp_distance(p, q)

        starts = [(a, b) for a in np.linspace(-1.4, 1.4, 5) for b in np.linspace(1.7, 4.5, 5)]
        best = min(minimize(f, s, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-13}).fun for s in starts)
        closed = horoball_distance(h1, h2)
        if closed >= 0:
            assert best == pytest.approx(closed, abs=1e-6)
        else:
            assert best < 1e-6

    def test_rejects(self):
        with pytest.raises(InputError):
            HoroballFamilyConfig((((0.0,), 1.0),), 1.0, 0.0, 1.0)
        with pytest.raises(InputError):
            HoroballFamilyConfig((((0.0,), 1.0), ((0.0,), 0.5)))
        with pytest.raises(InputError):
            HoroballFamilyConfig((((0.0,), 0.0),))


class TestSeparation:
    PTS = (((0.1, 0.2), 1.0), ((-0.6, 0.5), 0.5), ((0.9, -0.3), 0.25), ((0.3, 0.8), 0.8), ((-0.2, -0.9), 0.6))

    def test_tangent_at_t0(self):
        t0 = separation_t0(HoroballFamilyConfig(self.PTS))
        fam = build_horoball_family(HoroballFamilyConfig(self.PTS, 1.0, t0, t0))
        assert horoball_separation_check(fam) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("s", [1.0, 2.5])
    def test_linear_growth(self, s):
        t0 = separation_t0(HoroballFamilyConfig(self.PTS))
        fam = build_horoball_family(HoroballFamilyConfig(self.PTS, 1.0, t0 + s, t0))
        assert horoball_separation_check(fam) >= 2 * s

    def test_overlap_is_negative(self):
        fam = build_horoball_family(HoroballFamilyConfig((((0.0,), 1.0), ((0.1,), 1.0))))
        assert horoball_separation_check(fam) < 0

    def test_fewer_than_two(self):
        assert horoball_separation_check([Horoball((0.0,), 1.0)]) == math.inf


def test_family_json():
    fam = build_horoball_family(HoroballFamilyConfig((((0.0, 0.0), 1.0), ((1.0, 0.0), 0.5))))
    doc = json.loads(family_json(fam, 3))
    assert doc["dimension"] == 3
    assert doc["entries"][0] == {"center": [0.0, 0.0, 0.5], "diameter": 1.0}
