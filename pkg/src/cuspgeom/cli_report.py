"""Experiment configs, presets, the report runner and the ``cuspgeom`` command line."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import boundary as bd
from . import maps as mp
from . import transient as tr
from .cusped_space import CuspedSpace, build_cusped_space, busemann_estimate, inclusion_distortion
from .errors import CuspGeomError, InputError
from .group_ball import (
    PeripheralStructure,
    PresentationSpec,
    cayley_ball,
    enumerate_peripheral_cosets,
)
from .horoball import (
    build_truncated_horoball,
    horoball_distance_estimate,
    horoball_distance_estimate_array,
    horoball_distance_exact_array,
)
from .metric_graph import EXACT_DELTA_CAP, four_point_delta, grid_graph, path_graph, read_graph
from .realhyp import (
    HalfSpacePoint,
    HoroballFamilyConfig,
    build_horoball_family,
    busemann_halfspace,
    family_json,
    horoball_separation_check,
    hyp_distance,
    hyp_distance_quadrature,
    separation_t0,
)

OUT_ENV = "CUSPGEOM_OUT"
DEFAULT_OUT = "cuspgeom_out"
SECTIONS = ("build", "delta", "horoball", "transient", "distform", "boundary", "maps", "realhyp")


def _default_samples() -> dict[str, int]:
    return {
        "delta_count": 100_000,
        "delta_seed": 7,
        "pairs": 500,
        "pair_seed": 11,
        "triangles": 200,
        "triangle_seed": 13,
        "boundary_count": 200,
        "boundary_seed": 1,
        "probes": 30,
        "realhyp_pairs": 1000,
        "realhyp_seed": 17,
    }


@dataclass
class ExperimentConfig:
    name: str
    model: dict[str, Any]
    radius: int = 6
    depth: int = 6
    epsilon: float = 1.0
    shell_radius: float = 4.0
    mu: float = 2.0
    R: float = 4.0
    L: float = 4.0
    samples: dict[str, int] = field(default_factory=_default_samples)
    map: dict[str, Any] | None = None
    negative_controls: bool = False
    out: str | None = None

    def __post_init__(self):
        merged = _default_samples()
        merged.update(self.samples or {})
        self.samples = merged
        if self.depth < 1 or self.radius < 1:
            raise InputError("radius and depth must be >= 1")
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        tr.TransientConfig(self.mu, self.R)
        if self.model.get("kind") not in ("group", "grid", "path", "graph_file"):
            raise InputError(f"unknown model kind {self.model.get('kind')!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InputError(f"bad config: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(d, dict):
            raise InputError("config must be a JSON object")
        return cls.from_dict(d)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        d = self.to_dict()
        for k in list(d["samples"]):
            if k.endswith("_seed"):
                d["samples"][k] = int(seed) + sorted(d["samples"]).index(k)
        return ExperimentConfig.from_dict(d)

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("out", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


PRESETS = ("punctured_torus", "free_product_zz", "grid_horoball", "snowflake_demo", "automorphism_demo")


def preset(name: str) -> ExperimentConfig:
    if name == "punctured_torus":
        model = {"kind": "group", "presentation": PresentationSpec.free(2, ["abAB"]).to_dict()}
        return ExperimentConfig(name, model, map={"kind": "homomorphism", "images": {"a": "b", "b": "a"}})
    if name == "free_product_zz":
        spec = PresentationSpec.free_product(["Z", "Z"], [0, 1])
        model = {"kind": "group", "presentation": spec.to_dict()}
        return ExperimentConfig(name, model, radius=5, depth=5, map={"kind": "identity"})
    if name == "grid_horoball":
        model = {"kind": "grid", "rows": 15, "cols": 15, "peripherals": "all"}
        return ExperimentConfig(
            name, model, radius=15, depth=6, epsilon=0.25, shell_radius=6.0, map={"kind": "identity"}
        )
    if name == "snowflake_demo":
        model = {"kind": "group", "presentation": PresentationSpec.free(2, ["a"]).to_dict()}
        return ExperimentConfig(name, model, map={"kind": "snowflake", "factor": 0, "lambda": 0.5})
    if name == "automorphism_demo":
        model = {"kind": "group", "presentation": PresentationSpec.free(2, ["a"]).to_dict()}
        return ExperimentConfig(name, model, map={"kind": "homomorphism", "images": {"b": "B"}})
    raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


# -- model construction --------------------------------------------------------------


@dataclass
class Model:
    cusped: CuspedSpace
    presentation: PresentationSpec | None


def build_model(cfg: ExperimentConfig, radius: int | None = None, depth: int | None = None) -> Model:
    radius = cfg.radius if radius is None else radius
    depth = cfg.depth if depth is None else depth
    m = cfg.model
    kind = m["kind"]
    if kind == "group":
        spec = PresentationSpec.from_dict(m["presentation"])
        ball = cayley_ball(spec, radius)
        periph = enumerate_peripheral_cosets(ball, spec, m.get("max_cosets"))
        return Model(build_cusped_space(ball, periph, depth), spec)
    if kind == "grid":
        g = grid_graph(int(m.get("rows", radius)), int(m.get("cols", m.get("rows", radius))))
    elif kind == "path":
        g = path_graph(int(m.get("length", 2 * radius + 1)))
    else:
        g = read_graph(m["path"])
    sel = m.get("peripherals", [])
    if sel == "all":
        sets = [range(g.vertex_count)]
    else:
        sets = [list(s) for s in sel]
    return Model(build_cusped_space(g, PeripheralStructure.from_sets(sets), depth), None)


def build_map_spec(cfg: ExperimentConfig, model: Model) -> mp.PeripheralMapSpec | None:
    m = cfg.map
    if m is None:
        return None
    c = model.cusped
    kind = m.get("kind")
    if kind == "identity":
        return mp.identity_spec(c)
    if kind == "file":
        return mp.spec_from_json(Path(m["path"]).read_text(), c, c)
    if model.presentation is None:
        raise InputError(f"map kind {kind!r} needs a group model")
    spec = model.presentation
    if kind == "homomorphism":
        func = mp.homomorphism(spec, spec, m["images"])
        return mp.group_map_spec(c, c, spec, func, 1.0, "homomorphism")
    if kind == "snowflake":
        lam = float(m["lambda"])
        factor = int(m["factor"])
        func = mp.peripheral_snowflake(spec, factor, lam)
        lams = {
            pid: (lam if _peripheral_factor(spec, pid, c) == factor else 1.0)
            for pid in range(c.peripheral_count)
        }
        return mp.group_map_spec(c, c, spec, func, lams, "snowflake")
    if kind == "collapse":
        func = mp.delete_factor(spec, int(m["factor"]))
        return mp.group_map_spec(c, c, spec, func, 1.0, "collapse")
    raise InputError(f"unknown map kind {kind!r}")


def _peripheral_factor(spec: PresentationSpec, pid: int, c: CuspedSpace) -> int | None:
    gi = c.peripherals[pid].group
    p = spec.peripherals[gi] if gi is not None else None
    if isinstance(p, int):
        return p
    if isinstance(p, str) and len(set(p.lower())) == 1:
        return "abcdfghijklmnopqrstuvwxyz".index(p[0].lower())
    return None


# -- report bundle ---------------------------------------------------------------------


@dataclass
class ReportBundle:
    summary: dict[str, Any]
    tables: dict[str, str]
    attachments: dict[str, str]
    flags: list[str]

    def exit_code(self) -> int:
        return 2 if self.flags else 0


def _const(value: float, operation: str, sample_size: int, **extra) -> dict:
    v = float(value)
    out = {"value": v if math.isfinite(v) else str(v), "operation": operation, "sample_size": int(sample_size)}
    out.update(extra)
    return out


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _pairs(cfg: ExperimentConfig, c: CuspedSpace) -> list[tuple[int, int]]:
    return tr.sample_base_pairs(c, cfg.samples["pairs"], cfg.samples["pair_seed"])


def section_build(cfg, model, out):
    c = model.cusped
    out.summary["build"] = {
        "base_vertices": c.base.vertex_count,
        "base_edges": c.base.edge_count,
        "peripherals": c.peripheral_count,
        "depth": c.depth,
        "cusped_vertices": c.vertex_count,
        "cusped_edges": c.graph.edge_count,
    }
    rows = [[pid, len(ps.vertices), ps.rep, c.connectivity_radius(pid)] for pid, ps in enumerate(c.peripherals)]
    out.tables["peripherals.csv"] = _csv(["peripheral", "size", "rep", "connectivity_radius"], rows)


def section_delta(cfg, model, out):
    c = model.cusped
    res = {}
    for key, g in (("base", c.base), ("cusped", c.graph)):
        if g.vertex_count <= EXACT_DELTA_CAP:
            est = four_point_delta(g, "exact")
        else:
            est = four_point_delta(g, "sampled", cfg.samples["delta_count"], cfg.samples["delta_seed"])
        res[key] = _const(est.delta, "four_point_delta", est.sample_count, method=est.method, seed=est.seed)
    out.summary["delta"] = res


def section_horoball(cfg, model, out):
    depth = cfg.depth
    n = 2 * cfg.radius + 1
    h = build_truncated_horoball(path_graph(n), depth)
    L = depth + 1
    D = h.graph.distance_matrix()
    ids = np.arange(h.vertex_count)
    v, lev = ids // L, ids % L
    db = np.abs(v[:, None] - v[None, :]).astype(float)
    m1, m2 = np.broadcast_arrays(lev[:, None], lev[None, :])
    admissible = (np.maximum(m1, m2) <= depth - 2) & (db <= math.exp(depth - 2))
    exact = horoball_distance_exact_array(db, m1, m2, depth)
    est = horoball_distance_estimate_array(db, m1, m2)
    k = int(admissible.sum())
    out.summary["horoball"] = {
        "oracle_max_error": _const(np.abs(D - exact)[admissible].max(), "horoball_distance_exact", k),
        "estimate_max_gap": _const(np.abs(exact - est)[admissible].max(), "horoball_distance_estimate", k),
    }
    rows = []
    for d_base in range(0, n):
        for lvl in range(0, depth + 1):
            ex = horoball_distance_exact_array(np.array(float(d_base)), lvl, lvl, depth)
            rows.append([d_base, lvl, lvl, float(ex), horoball_distance_estimate(d_base, lvl, lvl)])
    out.tables["horoball.csv"] = _csv(["d_base", "m", "n", "exact", "estimate"], rows)


def section_transient(cfg, model, out):
    c = model.cusped
    tcfg = tr.TransientConfig(cfg.mu, cfg.R)
    rng = np.random.default_rng(cfg.samples["triangle_seed"])
    tri = rng.integers(0, c.base.vertex_count, size=(cfg.samples["triangles"], 3))
    rows = []
    for i, (x, y, z) in enumerate(tri.tolist()):
        rows.append([i, x, y, z, tr.relative_rips_check(c, x, y, z, tcfg)])
    D = max(r[-1] for r in rows) if rows else 0.0
    pairs = _pairs(cfg, c)[:200]
    res = {"relative_rips_D": _const(D, "relative_rips_check", len(rows))}
    if c.peripheral_count:
        res["deep_projection_offset"] = _const(
            tr.deep_projection_offset(c, pairs, tcfg), "deep_projection_offset", len(pairs)
        )
    out.summary["transient"] = res
    out.tables["relative_rips.csv"] = _csv(["triangle_id", "x", "y", "z", "D"], rows)


def section_distform(cfg, model, out):
    c = model.cusped
    pairs = _pairs(cfg, c)
    fit = tr.distance_formula_fit(c, pairs, cfg.L)
    n = len(pairs)
    out.summary["distform"] = {
        "fit_lambda": _const(fit.fit_lambda, "distance_formula_fit", n, L=cfg.L),
        "fit_mu": _const(fit.fit_mu, "distance_formula_fit", n, L=cfg.L),
        "max_residual": _const(fit.max_residual, "distance_formula_fit", n, L=cfg.L),
        "unit_residual": _const(fit.unit_residual, "distance_formula_fit", n, L=cfg.L),
    }
    out.tables["distform.csv"] = fit.csv_text()


def section_boundary(cfg, model, out):
    c = model.cusped
    eps = cfg.epsilon
    vc = bd.VisualConfig(eps, cfg.shell_radius)
    sample = bd.sample_boundary(c, vc, cfg.samples["boundary_count"], cfg.samples["boundary_seed"])
    rays = bd.BoundarySample(tuple(sample.rays), sample.shell_radius, sample.seed)
    res = {}
    dec = None
    if c.peripheral_count:
        dec = bd.shadow_decoration(c, eps)
        res["separation_C"] = _const(bd.separation_check(c, dec), "separation_check", c.peripheral_count)
        res["horoball_entry_C"] = _const(
            bd.horoball_entry_constant(c, dec, rays), "horoball_entry_constant", len(rays)
        )
        res["busemann_at_basepoint"] = _const(
            busemann_estimate(c, 0, c.basepoint).value, "busemann_estimate", 1
        )
        res["inclusion_distortion_C"] = _const(inclusion_distortion(c, 0), "inclusion_distortion", 1)
    if len(rays) >= 2:
        rho = bd.visual_matrix(c, rays.points, eps)
        res["uniform_perfectness_lambda"] = _const(
            bd.uniform_perfectness_check(rho), "uniform_perfectness_check", len(rays)
        )
        dist_o = c.graph.distances_from(c.basepoint)[: c.base.vertex_count]
        probe_r = max(0.0, float(dist_o.max()) - 2)
        probes = np.flatnonzero(np.abs(dist_o - probe_r) < 0.5)[: cfg.samples["probes"]]
        sub = bd.BoundarySample(tuple(rays.points[:40]), rays.shell_radius, rays.seed)
        res["visual_completeness_C"] = _const(
            bd.visual_completeness_check(c, sub, probes.tolist()), "visual_completeness_check", len(probes)
        )
        idx_pairs = [(i, i + 1) for i in range(0, min(len(rays), 60) - 1, 2)]
        res["quasi_centre_gap"] = _const(
            bd.quasi_centre_gap(c, rays, eps, idx_pairs), "quasi_centre_gap", len(idx_pairs)
        )
    out.summary["boundary"] = res
    out.attachments["boundary.json"] = bd.boundary_json(dec, sample, eps)


def section_maps(cfg, model, out):
    spec = build_map_spec(cfg, model)
    if spec is None:
        out.summary["maps"] = {"skipped": "no map configured"}
        return
    c = model.cusped
    tcfg = tr.TransientConfig(cfg.mu, cfg.R)
    res: dict[str, Any] = {"map": spec.name}
    if c.peripheral_count:
        snow = [mp.check_snowflake_on_peripheral(spec, pid) for pid in range(c.peripheral_count)]
        res["snowflake_C"] = _const(max(snow), "check_snowflake_on_peripheral", len(snow))
    grid = tuple(float(x) for x in (cfg.map or {}).get("c_prime_grid", mp.C_PRIME_GRID))
    resp = mp.peripheral_respect_check(spec, grid)
    res["peripheral_respect"] = {
        "cond1_C": _const(resp.cond1_C, "peripheral_respect_check", c.peripheral_count),
        "cond2_C": {
            f"{k:g}": _const(v, "peripheral_respect_check", c.peripheral_count, c_prime=k)
            for k, v in resp.cond2_C.items()
        },
        "note": "the second condition quantifies over every C'; only the listed C' grid is tested",
    }
    fc = mp.build_f_cusp(spec)
    core = mp.reliable_core(c, 3.0)
    pairs = mp.sample_pairs(core, cfg.samples["pairs"], cfg.samples["pair_seed"])
    prof = mp.distortion_of_cusped_map(fc, pairs)
    res["distortion"] = {
        "lipschitz_C": _const(prof.lipschitz_C, "measure_distortion", prof.sample_size),
        "lower_alpha": _const(prof.lower_alpha, "measure_distortion", prof.sample_size),
        "lower_C": _const(prof.lower_C, "measure_distortion", prof.sample_size),
        "class": prof.distortion_class,
    }
    base_pairs = _pairs(cfg, c)[:200]
    res["transient_image_E"] = _const(
        mp.transient_image_proximity(spec, base_pairs, tcfg), "transient_image_proximity", len(base_pairs)
    )
    res["transient_hausdorff_C"] = _const(
        mp.transient_hausdorff_check(spec, base_pairs, tcfg), "transient_hausdorff_check", len(base_pairs)
    )
    if c.peripheral_count:
        res["rough_similarity_error"] = _const(
            mp.rough_similarity_error(fc, 0), "rough_similarity_error", len(c.interior(0))
        )
        dec = bd.shadow_decoration(c, cfg.epsilon)
        pids = list(range(min(3, c.peripheral_count)))
        sample = bd.sample_horoball_proxies(c, pids)
        pairing = mp.induced_boundary_map(fc, sample)
        rep = mp.shadow_qs_check(pairing, c, c, dec, dec, spec.correspondence, seed=cfg.samples["boundary_seed"])
        res["shadow_qs"] = {
            "cond1_C": _const(rep.cond1_C, "shadow_qs_check", len(pairing.source)),
            "cond2_C": _const(rep.cond2_C, "shadow_qs_check", len(pairing.source)),
            "lambda_a": {
                str(p): (None if v is None else _const(v, "shadow_qs_check", rep.triple_counts[p]))
                for p, v in sorted(rep.lambda_a_est.items())
            },
        }
        out.tables["eta.csv"] = _csv(["t_quantile", "worst_ratio"], [list(e) for e in rep.eta_samples])
    res["warnings"] = sorted(set(fc.warnings))
    out.summary["maps"] = res
    out.attachments["map_spec.json"] = mp.spec_to_json(spec)
    if cfg.negative_controls and model.presentation is not None:
        _negative_controls(cfg, model, tcfg, out)


def _negative_controls(cfg, model, tcfg, out):
    """Collapse the first factor; a healthy pipeline must see the lower bound fail."""
    c = model.cusped
    spec = mp.group_map_spec(c, c, model.presentation, mp.delete_factor(model.presentation, 0), name="collapse")
    pairs = _pairs(cfg, c)[:300]
    prof = mp.distortion_of_base_map(spec, pairs)
    haus = mp.transient_hausdorff_check(spec, pairs, tcfg)
    out.summary["negative_controls"] = {
        "collapse": {
            "distortion_class": prof.distortion_class,
            "lower_C": _const(prof.lower_C, "measure_distortion", prof.sample_size),
            "transient_hausdorff_C": _const(haus, "transient_hausdorff_check", len(pairs)),
        }
    }
    if prof.distortion_class == "none":
        out.flags.append("collapse negative control: no coarse lower bound on the base map")


def section_realhyp(cfg, model, out):
    rng = np.random.default_rng(cfg.samples["realhyp_seed"])
    n = cfg.samples["realhyp_pairs"]
    worst = 0.0
    for _ in range(n):
        p = HalfSpacePoint(tuple(rng.normal(size=2)), float(np.exp(rng.normal())))
        q = HalfSpacePoint(tuple(rng.normal(size=2)), float(np.exp(rng.normal())))
        worst = max(worst, abs(hyp_distance(p, q) - hyp_distance_quadrature(p, q)))
    beta = busemann_halfspace(None, HalfSpacePoint((0.0, 0.0), math.e**3), HalfSpacePoint((0.0, 0.0), 1.0))
    radii = [1.0, 0.5, 0.25, 0.8, 0.6]
    if model.cusped.peripheral_count >= 5:
        dec = bd.shadow_decoration(model.cusped, cfg.epsilon)
        radii = [e.r for e in dec.entries[:5]]
    pts = tuple((tuple(rng.uniform(-1, 1, size=2)), r) for r in radii)
    base = HoroballFamilyConfig(pts, cfg.epsilon)
    t0 = separation_t0(base)
    fam = build_horoball_family(HoroballFamilyConfig(pts, cfg.epsilon, t0 + 1.0, t0))
    out.summary["realhyp"] = {
        "quadrature_max_error": _const(worst, "hyp_distance", n),
        "busemann_infinity_e3": _const(beta, "busemann_halfspace", 1),
        "t0": _const(t0, "separation_t0", len(pts)),
        "separation_at_t0_plus_1": _const(horoball_separation_check(fam), "horoball_separation_check", len(fam)),
    }
    out.attachments["horoballs.json"] = family_json(fam, 3)


RUNNERS = {
    "build": section_build,
    "delta": section_delta,
    "horoball": section_horoball,
    "transient": section_transient,
    "distform": section_distform,
    "boundary": section_boundary,
    "maps": section_maps,
    "realhyp": section_realhyp,
}


def run_experiment(
    cfg: ExperimentConfig, sections: tuple[str, ...] = SECTIONS, write: bool = True
) -> ReportBundle:
    """Run the requested sections and (optionally) write the bundle to ``cfg.out``."""
    for s in sections:
        if s not in RUNNERS:
            raise InputError(f"unknown section {s!r}")
    model = build_model(cfg)
    bundle = ReportBundle({"experiment": cfg.name, "config_sha256": cfg.digest()}, {}, {}, [])
    for s in SECTIONS:
        if s in sections:
            RUNNERS[s](cfg, model, bundle)
    bundle.summary["flags"] = list(bundle.flags)
    if write:
        write_bundle(bundle, cfg)
    return bundle


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def write_bundle(bundle: ReportBundle, cfg: ExperimentConfig) -> Path:
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {"summary.json": json.dumps(bundle.summary, indent=2, sort_keys=True) + "\n"}
    # the output directory is not part of the experiment, so bundles compare across locations
    written = cfg.to_dict()
    written.pop("out")
    files["config.json"] = json.dumps(written, indent=2, sort_keys=True) + "\n"
    files.update(bundle.tables)
    files.update(bundle.attachments)
    for name, text in files.items():
        (out / name).write_text(text)
    manifest = {
        "config_sha256": cfg.digest(),
        "files": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(files.items())},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


# -- command line ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuspgeom", description="Build finite cusped spaces and measure their coarse constants."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SECTIONS + ("all",):
        p = sub.add_parser(name, help=f"run the {name} suite" if name != "all" else "run every suite")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="experiment config (JSON)")
        src.add_argument("--preset", choices=PRESETS, help="named desk-scale scenario")
        p.add_argument("--seed", type=int, help="override every sampling seed")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./cuspgeom_out)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = ExperimentConfig.from_json(args.config.read_text())
        else:
            cfg = preset(args.preset or "punctured_torus")
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.out is not None:
            cfg.out = args.out
        sections = SECTIONS if args.command == "all" else (args.command,)
        bundle = run_experiment(cfg, sections)
    except (CuspGeomError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {output_dir(cfg)}")
    for flag in bundle.flags:
        print(f"flagged: {flag}", file=sys.stderr)
    return bundle.exit_code()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
