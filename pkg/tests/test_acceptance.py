"""Acceptance criteria at desk scale, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) and then
asserts the same condition.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from conftest import group_model, record

from cuspgeom import boundary as bd
from cuspgeom import cli_report as cr
from cuspgeom import maps as mp
from cuspgeom import transient as tr
from cuspgeom.horoball import (
    build_truncated_horoball,
    horoball_distance_estimate_array,
    horoball_distance_exact_array,
)
from cuspgeom.metric_graph import cycle_graph, four_point_delta, grid_graph, path_graph
from cuspgeom.realhyp import (
    HalfSpacePoint,
    HoroballFamilyConfig,
    build_horoball_family,
    busemann_halfspace,
    horoball_separation_check,
    hyp_distance,
    hyp_distance_quadrature,
    separation_t0,
)


def _preset_model(name, radius=None, depth=None):
    cfg = cr.preset(name)
    return cfg, cr.build_model(cfg, radius, depth)


def test_criterion_1_horoball_oracle():
    start = time.perf_counter()
    worst_exact = worst_est = 0.0
    for base in (path_graph(200), cycle_graph(200), grid_graph(15)):
        h = build_truncated_horoball(base, 8)
        L = h.depth + 1
        ids = np.arange(h.vertex_count)
        v, lev = ids // L, ids % L
        D = h.graph.distance_rows(ids)
        db = base.distance_matrix()[v][:, v]
        m, n = np.broadcast_arrays(lev[:, None], lev[None, :])
        ok = (np.maximum(m, n) <= h.depth - 2) & (db <= math.exp(h.depth - 2))
        exact = horoball_distance_exact_array(db, m, n, h.depth)
        est = horoball_distance_estimate_array(db[ok], m[ok], n[ok])
        worst_exact = max(worst_exact, float(np.max(np.abs(D - exact)[ok])))
        worst_est = max(worst_est, float(np.max(np.abs(D[ok] - est))))
    elapsed = time.perf_counter() - start
    ok = worst_exact <= 1e-9 and worst_est <= 8 and elapsed < 60
    record(1, ok, f"max|dijkstra-exact|={worst_exact:.2e} max|exact-estimate|={worst_est:.3f} time={elapsed:.1f}s")
    assert ok


def test_criterion_2_hyperbolization_contrast():
    start = time.perf_counter()
    small = four_point_delta(grid_graph(7), "sampled", 10**5, 7).delta
    large = four_point_delta(grid_graph(15), "sampled", 10**5, 7).delta
    cusped = [
        four_point_delta(_preset_model("grid_horoball", depth=d)[1].cusped.graph, "sampled", 10**5, 7).delta
        for d in (6, 12)
    ]
    elapsed = time.perf_counter() - start
    ok = large - small >= 2 and abs(cusped[1] - cusped[0]) <= 1 and elapsed < 120
    record(
        2,
        ok,
        f"grid delta 7x7={small:g} 15x15={large:g}; cusped depth6={cusped[0]:.3f} depth12={cusped[1]:.3f} "
        f"time={elapsed:.1f}s",
    )
    assert ok


def test_criterion_3_separation():
    details, ok = [], True
    for name in ("punctured_torus", "snowflake_demo"):  # the second is F2 rel <a>
        vals = []
        for r in (5, 6):
            c = _preset_model(name, radius=r)[1].cusped
            vals.append(bd.separation_check(c, bd.shadow_decoration(c, 1.0)))
        good = math.isfinite(vals[0]) and vals[0] > 0 and max(vals) / min(vals) <= 2
        ok &= good
        details.append(f"{name} C5={vals[0]:.4f} C6={vals[1]:.4f}")
    record(3, ok, "; ".join(details))
    assert ok


def test_criterion_4_distance_formula():
    fits = []
    for r in (5, 6):
        _, c = group_model((0, 1), r, 6)
        fits.append(tr.distance_formula_fit(c, tr.sample_base_pairs(c, 500, 11), 4.0))
    res = [f.max_residual for f in fits]
    unit = [f.unit_residual for f in fits]

    def stable(a, b):
        return abs(b - a) <= 0.25 * max(abs(a), abs(b))

    ok = fits[1].fit_lambda <= 4 and stable(*res) and stable(*unit)
    record(
        4,
        ok,
        f"fit_lambda r6={fits[1].fit_lambda:.4f}; max_residual r5={res[0]:.4f} r6={res[1]:.4f}; "
        f"unit_residual r5={unit[0]:.4f} r6={unit[1]:.4f}",
    )
    assert ok


def test_criterion_5_rough_similarity():
    errs = []
    for r in (3, 6):  # the axis a^-r..a^r doubles
        cfg, m = _preset_model("snowflake_demo", radius=r)
        spec = cr.build_map_spec(cfg, m)
        axis = next(p for p, ps in enumerate(m.cusped.peripherals) if m.cusped.basepoint in ps.vertices)
        assert spec.lambda_of(axis) == 0.5
        errs.append(mp.rough_similarity_error(mp.build_f_cusp(spec), axis))
    ok = all(math.isfinite(e) for e in errs) and abs(errs[1] - errs[0]) <= 1
    record(5, ok, f"additive error axis r3={errs[0]:.4f} r6={errs[1]:.4f}")
    assert ok


def _lambda_estimates(name):
    bundle = cr.run_experiment(cr.preset(name), ("maps",), write=False)
    lam = bundle.summary["maps"]["shadow_qs"]["lambda_a"]
    return [v["value"] for v in lam.values() if v is not None]


def test_criterion_6_boundary_exponent():
    snow = _lambda_estimates("snowflake_demo")
    auto = _lambda_estimates("automorphism_demo")
    ok = (
        bool(snow)
        and bool(auto)
        and all(abs(v - 0.5) <= 0.25 * 0.5 for v in snow)
        and all(abs(v - 1.0) <= 0.2 for v in auto)
    )
    record(6, ok, f"snowflake lambda_a={[round(v, 4) for v in snow]}; automorphism lambda_a={[round(v, 4) for v in auto]}")
    assert ok


def test_criterion_7_transient():
    tcfg = tr.TransientConfig(2.0, 4.0)
    rips, prox, haus = [], [], []
    for r in (5, 6):
        c = _preset_model("punctured_torus", radius=r)[1].cusped
        tri = np.random.default_rng(13).integers(0, c.base.vertex_count, size=(200, 3))
        rips.append(max(tr.relative_rips_check(c, int(x), int(y), int(z), tcfg) for x, y, z in tri))
        cfg, m = _preset_model("automorphism_demo", radius=r)
        spec = cr.build_map_spec(cfg, m)
        pairs = tr.sample_base_pairs(m.cusped, 200, 11)
        prox.append(mp.transient_image_proximity(spec, pairs, tcfg))
        haus.append(mp.transient_hausdorff_check(spec, pairs, tcfg))
    ok = all(math.isfinite(a) and math.isfinite(b) and abs(b - a) <= 1 for a, b in (rips, prox, haus))
    record(7, ok, f"rips D={rips}; image E={prox}; hausdorff C={haus}")
    assert ok


def test_criterion_8_real_hyperbolic():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(1000):
        p = HalfSpacePoint(tuple(rng.normal(size=2)), float(np.exp(rng.normal())))
        q = HalfSpacePoint(tuple(rng.normal(size=2)), float(np.exp(rng.normal())))
        worst = max(worst, abs(hyp_distance(p, q) - hyp_distance_quadrature(p, q)))
    beta = busemann_halfspace(None, HalfSpacePoint((0.0, 0.0), math.e**3), HalfSpacePoint((0.0, 0.0), 1.0))
    c = _preset_model("punctured_torus")[1].cusped
    radii = [e.r for e in bd.shadow_decoration(c, 1.0).entries[:5]]
    pts = tuple((tuple(rng.uniform(-1, 1, size=2)), r) for r in radii)
    t0 = separation_t0(HoroballFamilyConfig(pts))
    sep = horoball_separation_check(build_horoball_family(HoroballFamilyConfig(pts, 1.0, t0 + 1, t0)))
    ok = worst <= 1e-6 and beta == -3.0 and sep >= 2
    record(8, ok, f"quadrature max error={worst:.2e}; beta={beta!r}; separation at t0+1={sep!r}")
    assert ok


def test_criterion_9_composition():
    vals = []
    for d in (5, 7):
        cfg, m = _preset_model("snowflake_demo", depth=d)
        vals.append(mp.composition_consistency(cr.build_map_spec(cfg, m), mp.identity_spec(m.cusped)))
    ok = all(math.isfinite(v) for v in vals) and abs(vals[1] - vals[0]) <= 1
    record(9, ok, f"sup distance depth5={vals[0]:g} depth7={vals[1]:g}")
    assert ok


@pytest.mark.slow
def test_criterion_10_determinism(tmp_path):
    outs = []
    for k in range(2):
        cfg = cr.preset("punctured_torus")
        cfg.out = str(tmp_path / f"run{k}")
        cr.run_experiment(cfg)
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / f"run{k}").iterdir())})
    ok = outs[0] == outs[1] and len(outs[0]) > 5
    record(10, ok, f"{len(outs[0])} files byte-identical across two runs" if ok else "bundles differ")
    assert ok
