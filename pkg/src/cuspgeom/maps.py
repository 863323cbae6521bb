"""Maps between cusped models: snowflakes on peripherals, the cusped extension and its measurements.

A :class:`PeripheralMapSpec` carries a base-vertex map ``f`` between two
cusped models, a correspondence ``P -> P'`` between their peripherals and an
exponent ``lambda_P`` per source peripheral. :func:`build_f_cusp` extends
``f`` over the horoballs by sending ``(v, m)`` to ``(f(v), lambda_P m)``,
rounded to the nearest level.

Vertices whose image falls outside the target ball are mapped to ``-1`` and
left out of every statistic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .boundary import (
    PARABOLIC,
    RAY,
    BoundaryPoint,
    BoundarySample,
    ShadowDecoration,
    parabolic_point,
    visual_matrix,
)
from .cusped_space import CuspedSpace
from .errors import InputError
from .group_ball import (
    GEN_LETTERS,
    Element,
    PresentationSpec,
    element_label,
    inverse,
    multiply,
    parse_word,
)
from .metric_graph import TOL, quasi_centre
from .transient import TransientConfig, base_geodesic, transient_decomposition

ALPHA_GRID = tuple(round(1.0 - 0.1 * i, 10) for i in range(10))
DEFAULT_CMAX = 4.0


@dataclass
class PeripheralMapSpec:
    source: CuspedSpace
    target: CuspedSpace
    f: np.ndarray
    correspondence: dict[int, int]
    lam: dict[int, float]
    name: str = ""
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=np.int64)
        if self.f.shape != (self.source.base.vertex_count,):
            raise InputError("vertex map must cover every source base vertex")
        if np.any(self.f >= self.target.base.vertex_count) or np.any(self.f < -1):
            raise InputError("vertex map points outside the target base graph")
        for pid, q in self.correspondence.items():
            self.source._check_pid(pid)
            self.target._check_pid(q)
        for pid, lam in self.lam.items():
            self.source._check_pid(pid)
            if not 0 < lam <= 1:
                raise InputError(f"lambda for peripheral {pid} must lie in (0, 1], got {lam}")

    def lambda_of(self, pid: int) -> float:
        return self.lam.get(pid, 1.0)


# -- building vertex maps ------------------------------------------------------------


def vertex_map_from_elements(
    source: CuspedSpace,
    target: CuspedSpace,
    spec_src: PresentationSpec,
    func: Callable[[Element], Element],
) -> np.ndarray:
    """Base vertex map induced by a function on group elements (labels are words)."""
    out = np.full(source.base.vertex_count, -1, dtype=np.int64)
    for v, lab in enumerate(source.base.labels):
        img = element_label(func(parse_word(spec_src, lab)))
        if target.base.has_label(img):
            out[v] = target.base.index_of(img)
    return out


def homomorphism(spec_src: PresentationSpec, spec_tgt: PresentationSpec, images: Mapping[str, str]):
    """Element function of the homomorphism given on generators by words."""
    gen_img = {}
    for k in range(spec_src.rank):
        ch = GEN_LETTERS[k]
        gen_img[k] = parse_word(spec_tgt, images.get(ch, ch))

    def func(g: Element) -> Element:
        out: Element = ()
        for k, e in g:
            step = gen_img[k] if e > 0 else inverse(spec_tgt, gen_img[k])
            for _ in range(abs(e)):
                out = multiply(spec_tgt, out, step)
        return out

    return func


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def peripheral_snowflake(spec: PresentationSpec, factor: int, lam: float):
    """Shrink a trailing syllable ``x^k`` of the given factor to ``x^(sign(k) round(|k|^lam))``.

    Each coset ``w<x>`` with ``w`` not ending in ``x`` is mapped into itself by
    ``w x^k -> w x^round(k^lam)``, so the map is a ``lam``-snowflake on every
    peripheral of that factor and keeps distinct cosets apart. Shrinking every
    syllable instead would merge the cosets ``x^k y<x>`` for nearby ``k``.
    """

    def func(g: Element) -> Element:
        if not g or g[-1][0] != factor:
            return g
        k, e = g[-1]
        e = (1 if e > 0 else -1) * round_half_up(abs(e) ** lam)
        return g[:-1] + ((k, e),) if e else g[:-1]

    return func


def delete_factor(spec: PresentationSpec, factor: int):
    """Negative control: collapse every syllable of one factor to the identity."""

    def func(g: Element) -> Element:
        out: Element = ()
        for k, e in g:
            if k != factor:
                out = multiply(spec, out, ((k, e),))
        return out

    return func


def derive_correspondence(
    source: CuspedSpace, target: CuspedSpace, f: np.ndarray
) -> tuple[dict[int, int], dict[int, float]]:
    """For each source peripheral, the target peripheral best containing its image.

    Minimises the largest distance from ``f(P)`` to ``P'``; ties go to the
    target peripheral hit most often, then to the smallest id. Also returns
    that distance per peripheral.
    """
    corr: dict[int, int] = {}
    miss: dict[int, float] = {}
    if target.peripheral_count == 0:
        return corr, miss
    to_p = target.base_distance_to_peripherals()
    for pid in range(source.peripheral_count):
        img = f[list(source.peripheral_vertices(pid))]
        img = img[img >= 0]
        if img.size == 0:
            continue
        worst = to_p[:, img].max(axis=1)
        hits = (to_p[:, img] <= TOL).sum(axis=1)
        order = np.lexsort((np.arange(worst.size), -hits, worst))
        q = int(order[0])
        corr[pid] = q
        miss[pid] = float(worst[q])
    return corr, miss


def make_spec(
    source: CuspedSpace,
    target: CuspedSpace,
    f: np.ndarray,
    lam: Mapping[int, float] | float = 1.0,
    correspondence: Mapping[int, int] | None = None,
    name: str = "",
) -> PeripheralMapSpec:
    if correspondence is None:
        correspondence, _ = derive_correspondence(source, target, f)
    if not isinstance(lam, Mapping):
        lam = {pid: float(lam) for pid in range(source.peripheral_count)}
    return PeripheralMapSpec(source, target, f, dict(correspondence), dict(lam), name)


def identity_spec(c: CuspedSpace) -> PeripheralMapSpec:
    f = np.arange(c.base.vertex_count)
    corr = {pid: pid for pid in range(c.peripheral_count)}
    return make_spec(c, c, f, 1.0, corr, "identity")


def group_map_spec(
    source: CuspedSpace,
    target: CuspedSpace,
    spec_src: PresentationSpec,
    func: Callable[[Element], Element],
    lam: Mapping[int, float] | float = 1.0,
    name: str = "",
) -> PeripheralMapSpec:
    f = vertex_map_from_elements(source, target, spec_src, func)
    return make_spec(source, target, f, lam, None, name)


def compose_specs(spec_f: PeripheralMapSpec, spec_g: PeripheralMapSpec) -> PeripheralMapSpec:
    """The map spec of ``g o f``: composed vertex maps, correspondences and exponents."""
    if spec_f.target is not spec_g.source:
        raise InputError("specs are not composable")
    f = np.where(spec_f.f >= 0, spec_g.f[np.maximum(spec_f.f, 0)], -1)
    corr = {}
    lam = {}
    for pid, q in spec_f.correspondence.items():
        if q in spec_g.correspondence:
            corr[pid] = spec_g.correspondence[q]
        lam[pid] = spec_f.lambda_of(pid) * spec_g.lambda_of(q)
    name = f"{spec_g.name} o {spec_f.name}"
    return PeripheralMapSpec(spec_f.source, spec_g.target, f, corr, lam, name)


# -- peripheral respect ----------------------------------------------------------------

C_PRIME_GRID = (1.0, 2.0, 4.0)


@dataclass(frozen=True)
class PeripheralRespect:
    """Measured constants for mapping peripherals near peripherals.

    ``cond1_C`` is the worst distance from ``f(P)`` to its best target
    peripheral. ``cond2_C[c]`` is, for the neighbourhood size ``c``, the
    smallest ``C`` such that every preimage ``f^-1(N_c(P'))`` has diameter
    at most ``C`` or lies in ``N_C(P)`` for one source peripheral. The second
    condition asks for every ``c > 0``; only the listed grid is tested.
    """

    cond1_C: float
    cond2_C: dict[float, float]


def peripheral_respect_check(
    spec: PeripheralMapSpec, c_grid: Sequence[float] = C_PRIME_GRID
) -> PeripheralRespect:
    src, tgt = spec.source, spec.target
    _, miss = derive_correspondence(src, tgt, spec.f)
    cond1 = max(miss.values(), default=0.0)
    keep = np.flatnonzero(spec.f >= 0)
    cond2: dict[float, float] = {}
    if tgt.peripheral_count == 0:
        return PeripheralRespect(float(cond1), {float(c): 0.0 for c in c_grid})
    to_tgt = tgt.base_distance_to_peripherals()[:, spec.f[keep]]
    to_src = src.base_distance_to_peripherals() if src.peripheral_count else None
    for c in c_grid:
        worst = 0.0
        for q in range(tgt.peripheral_count):
            pre = keep[to_tgt[q] <= c + TOL]
            if pre.size < 2:
                continue
            near = float(to_src[:, pre].max(axis=1).min()) if to_src is not None else math.inf
            if near <= worst:
                continue
            # one eccentricity brackets the diameter in [ecc, 2 ecc]
            ecc = float(src.base.distances_from(int(pre[0]))[pre].max())
            if near <= ecc:
                worst = near
                continue
            if 2.0 * ecc <= worst:
                continue
            diam = float(src.base.distance_rows(pre)[:, pre].max())
            worst = max(worst, min(diam, near))
        cond2[float(c)] = worst
    return PeripheralRespect(float(cond1), cond2)


# -- snowflake checks and the cusped extension ---------------------------------------


def snowflake_constant(d: np.ndarray, d_img: np.ndarray, lam: float) -> float:
    """Smallest ``C`` with ``d^lam / C - C <= d' <= C d^lam + C`` on the given pairs."""
    d = np.asarray(d, dtype=float)
    d_img = np.asarray(d_img, dtype=float)
    if d.size == 0:
        return 0.0
    p = d**lam
    upper = d_img / (p + 1.0)
    lower = (-d_img + np.sqrt(d_img**2 + 4.0 * p)) / 2.0
    return float(max(upper.max(), lower.max()))


def check_snowflake_on_peripheral(spec: PeripheralMapSpec, pid: int) -> float:
    verts = np.asarray(spec.source.peripheral_vertices(pid))
    img = spec.f[verts]
    keep = img >= 0
    verts, img = verts[keep], img[keep]
    if verts.size < 2:
        return 0.0
    iu = np.triu_indices(verts.size, 1)
    d = spec.source.base.distance_rows(verts)[:, verts][iu]
    d_img = spec.target.base.distance_rows(img)[:, img][iu]
    return snowflake_constant(d, d_img, spec.lambda_of(pid))


def level_round(x: float) -> int:
    """Nearest integer, ties toward the smaller one."""
    return int(math.ceil(x - 0.5 - 1e-9))


def adjusted_base_image(spec: PeripheralMapSpec, pid: int) -> tuple[np.ndarray, float]:
    """Images of the peripheral's vertices moved into ``P'`` and the largest move."""
    q = spec.correspondence.get(pid)
    verts = np.asarray(spec.source.peripheral_vertices(pid))
    img = spec.f[verts].copy()
    if q is None:
        return np.full(verts.size, -1, dtype=np.int64), math.inf
    tv = np.asarray(spec.target.peripheral_vertices(q))
    in_q = np.isin(img, tv)
    worst = 0.0
    for i in np.flatnonzero(~in_q & (img >= 0)):
        d = spec.target.base.distances_from(int(img[i]))[tv]
        j = int(np.flatnonzero(d <= d.min() + TOL)[0])
        worst = max(worst, float(d[j]))
        img[i] = tv[j]
    return img, worst


@dataclass
class HoroballExtension:
    peripheral: int
    target_peripheral: int | None
    source_ids: np.ndarray  # (k, N+1) cusped ids in the source
    image_ids: np.ndarray  # same shape, target cusped ids (-1 if clipped)
    warnings: list[str] = field(default_factory=list)


def extend_into_horoball(spec: PeripheralMapSpec, pid: int) -> HoroballExtension:
    """``(v, m) -> (f(v), round(lambda m))`` with the level clamped to the target depth."""
    src = spec.source
    tgt = spec.target
    lam = spec.lambda_of(pid)
    q = spec.correspondence.get(pid)
    ids = src.horoball_ids(pid)
    warnings: list[str] = []
    out = np.full(ids.shape, -1, dtype=np.int64)
    if q is None:
        warnings.append(f"peripheral {pid}: no corresponding target peripheral")
        return HoroballExtension(pid, None, ids, out, warnings)
    img, moved = adjusted_base_image(spec, pid)
    C = check_snowflake_on_peripheral(spec, pid)
    if moved > C + TOL:
        warnings.append(f"peripheral {pid}: base adjustment {moved:g} exceeds snowflake C {C:g}")
    if lam * src.depth > tgt.depth + TOL:
        warnings.append(
            f"peripheral {pid}: target depth {tgt.depth} below lambda * depth {lam * src.depth:g}"
        )
    levels = [min(level_round(lam * m), tgt.depth) for m in range(src.depth + 1)]
    for i, w in enumerate(img.tolist()):
        if w < 0:
            continue
        for m, n in enumerate(levels):
            out[i, m] = tgt.vertex(q, w, n)
    return HoroballExtension(pid, q, ids, out, warnings)


@dataclass
class FCusp:
    spec: PeripheralMapSpec
    image: np.ndarray  # source cusped id -> target cusped id, -1 when clipped
    warnings: list[str]

    def __call__(self, p: int) -> int:
        return int(self.image[p])


def build_f_cusp(spec: PeripheralMapSpec) -> FCusp:
    src = spec.source
    nb = src.base.vertex_count
    image = np.full(src.vertex_count, -1, dtype=np.int64)
    image[:nb] = spec.f
    warnings = list(spec.warnings)
    clipped = int(np.sum(spec.f < 0))
    if clipped:
        warnings.append(f"{clipped} base vertices map outside the target ball")
    assigned = np.zeros(nb, dtype=bool)
    for pid in range(src.peripheral_count):
        ext = extend_into_horoball(spec, pid)
        warnings.extend(ext.warnings)
        image[ext.source_ids[:, 1:].ravel()] = ext.image_ids[:, 1:].ravel()
        # the bounded adjustment of f on P, first peripheral wins on shared vertices
        base_ids = ext.source_ids[:, 0]
        fresh = ~assigned[base_ids]
        image[base_ids[fresh]] = ext.image_ids[fresh, 0]
        assigned[base_ids] = True
    return FCusp(spec, image, warnings)


# -- reliable cores and distortion ---------------------------------------------------


def truncation_shell(c: CuspedSpace) -> np.ndarray:
    """Base vertices of less than full degree plus every top-level horoball vertex."""
    deg = c.base.degrees()
    base_shell = np.flatnonzero(deg < deg.max())
    tops = [c.horoball_ids(pid)[:, -1] for pid in range(c.peripheral_count)]
    return np.unique(np.concatenate([base_shell] + tops)) if tops else base_shell


def reliable_core(c: CuspedSpace, margin: float) -> np.ndarray:
    """Ids of cusped vertices at distance at least ``margin`` from the truncation shell."""
    shell = truncation_shell(c)
    if shell.size == 0:
        return np.arange(c.vertex_count)
    d = c.graph.distances_to_set(shell)
    return np.flatnonzero(d >= margin - TOL)


@dataclass(frozen=True)
class DistortionProfile:
    lipschitz_C: float
    lower_alpha: float
    lower_C: float
    distortion_class: str
    sample_size: int


def lower_constant(d: np.ndarray, d_img: np.ndarray, tau: np.ndarray) -> float:
    """Smallest ``C`` with ``tau / C - C <= d'``."""
    return float(np.max((-d_img + np.sqrt(d_img**2 + 4.0 * np.maximum(tau, 0.0))) / 2.0))


def _informative(tau: np.ndarray, C: float) -> bool:
    return bool(np.max(tau / C - C) >= 1.0) if C > 0 else bool(tau.max() >= 1.0)


def measure_distortion(
    d: np.ndarray,
    d_img: np.ndarray,
    alpha_grid: Sequence[float] = ALPHA_GRID,
    c_max: float = DEFAULT_CMAX,
) -> DistortionProfile:
    """Fit coarse Lipschitz and lower power bounds to paired source/target distances.

    ``alpha`` is accepted when the lower bound holds with ``C' <= c_max`` and
    bites somewhere on the sample (``max(d^alpha / C' - C') >= 1``).
    """
    d = np.asarray(d, dtype=float)
    d_img = np.asarray(d_img, dtype=float)
    if d.size == 0:
        raise InputError("empty reliable sample")
    lip = float(np.max(d_img / (d + 1.0)))
    best_alpha, best_C = 0.0, math.inf
    for alpha in sorted(alpha_grid, reverse=True):
        tau = d**alpha
        C = lower_constant(d, d_img, tau)
        if C <= c_max and _informative(tau, C):
            best_alpha, best_C = float(alpha), C
            break
    if best_alpha == 1.0:
        cls = "quasi-isometric"
    elif best_alpha > 0:
        cls = "polynomial"
    else:
        tau = np.log1p(d) ** 2
        C = lower_constant(d, d_img, tau)
        cls = "subexponential" if C <= c_max and _informative(tau, C) else "none"
        best_C = C
    return DistortionProfile(lip, best_alpha, best_C, cls, int(d.size))


def sample_pairs(ids: np.ndarray, count: int, seed: int) -> list[tuple[int, int]]:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size < 2:
        raise InputError("need at least two vertices to sample pairs")
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        i, j = rng.integers(0, ids.size, 2)
        if i != j:
            out.append((int(ids[i]), int(ids[j])))
    return out


def distortion_of_cusped_map(
    fc: FCusp, pairs: Sequence[tuple[int, int]], **kw
) -> DistortionProfile:
    a = np.array([p[0] for p in pairs], dtype=np.int64)
    b = np.array([p[1] for p in pairs], dtype=np.int64)
    fa, fb = fc.image[a], fc.image[b]
    ok = (fa >= 0) & (fb >= 0)
    d = fc.spec.source.graph.pair_distances(a[ok], b[ok])
    d_img = fc.spec.target.graph.pair_distances(fa[ok], fb[ok])
    return measure_distortion(d, d_img, **kw)


def distortion_of_base_map(
    spec: PeripheralMapSpec, pairs: Sequence[tuple[int, int]], **kw
) -> DistortionProfile:
    a = np.array([p[0] for p in pairs], dtype=np.int64)
    b = np.array([p[1] for p in pairs], dtype=np.int64)
    fa, fb = spec.f[a], spec.f[b]
    ok = (fa >= 0) & (fb >= 0)
    d = spec.source.base.pair_distances(a[ok], b[ok])
    d_img = spec.target.base.pair_distances(fa[ok], fb[ok])
    return measure_distortion(d, d_img, **kw)


def rough_similarity_error(fc: FCusp, pid: int) -> float:
    """Max ``|d'(f p, f q) - lambda d(p, q)|`` over all vertex pairs of one horoball."""
    spec = fc.spec
    ids = spec.source.horoball_ids(pid).ravel()
    img = fc.image[ids]
    keep = img >= 0
    ids, img = ids[keep], img[keep]
    d = spec.source.graph.distance_rows(ids)[:, ids]
    d_img = spec.target.graph.distance_rows(img)[:, img]
    return float(np.max(np.abs(d_img - spec.lambda_of(pid) * d)))


# -- boundary maps and shadow quasisymmetry ------------------------------------------


@dataclass
class BoundaryPairing:
    source: list[BoundaryPoint]
    target: list[BoundaryPoint]
    dropped: int
    warnings: list[str]


def induced_boundary_map(
    fc: FCusp, sample: BoundarySample, target_shell: float | None = None
) -> BoundaryPairing:
    spec = fc.spec
    tgt = spec.target
    shell = sample.shell_radius if target_shell is None else target_shell
    to_o = tgt.graph.distances_from(tgt.basepoint)
    src_pts, tgt_pts, warnings = [], [], []
    dropped = 0
    for p in sample.points:
        if p.kind == PARABOLIC:
            q = spec.correspondence.get(p.peripheral)
            if q is None:
                dropped += 1
                warnings.append(f"parabolic point of peripheral {p.peripheral} has no image")
                continue
            src_pts.append(p)
            tgt_pts.append(parabolic_point(tgt, q))
        else:
            img = int(fc.image[p.terminal])
            if img < 0 or to_o[img] < shell - TOL:
                dropped += 1
                continue
            src_pts.append(p)
            tgt_pts.append(BoundaryPoint(RAY, img))
    if dropped:
        warnings.append(f"{dropped} boundary points dropped (clipped or below the target shell)")
    return BoundaryPairing(src_pts, tgt_pts, dropped, warnings)


@dataclass
class ShadowQSReport:
    eta_samples: list[tuple[float, float]]
    cond1_C: float
    cond2_C: float
    cond3_C: dict[int, float]
    lambda_a_est: dict[int, float | None]
    triple_counts: dict[int, int]

    def lambda_summary(self) -> float | None:
        vals = [v for v in self.lambda_a_est.values() if v is not None]
        return float(np.median(vals)) if vals else None


def shadow_qs_check(
    pairing: BoundaryPairing,
    source: CuspedSpace,
    target: CuspedSpace,
    dec_src: ShadowDecoration,
    dec_tgt: ShadowDecoration,
    correspondence: Mapping[int, int],
    min_triples: int = 10,
    eta_triples: int = 20000,
    seed: int = 0,
) -> ShadowQSReport:
    """Measure the constants of a shadow-respecting quasisymmetric embedding on a sample."""
    rho = visual_matrix(source, pairing.source, dec_src.epsilon)
    rho_t = visual_matrix(target, pairing.target, dec_tgt.epsilon)
    n = len(pairing.source)
    c1 = c2 = 0.0
    c3: dict[int, float] = {}
    lam_est: dict[int, float | None] = {}
    counts: dict[int, int] = {}
    for i, a in enumerate(pairing.source):
        if a.kind != PARABOLIC:
            continue
        pid = a.peripheral
        r = dec_src.radius(pid)
        r_t = dec_tgt.radius(correspondence[pid])
        others = np.array([j for j in range(n) if j != i], dtype=np.int64)
        inside = others[rho[i, others] <= r]
        outside = others[rho[i, others] >= r]
        if inside.size:
            c1 = max(c1, float(np.max(rho_t[i, inside]) / r_t))
        if outside.size:
            pos = rho_t[i, outside]
            c2 = max(c2, float(r_t / pos.min()) if pos.min() > 0 else math.inf)
        # condition (3) window: (rho(a,b)/r) rho(a,b) <= rho(b,c) <= rho(a,b) <= r
        xs, ys = [], []
        for b in inside:
            rab = rho[i, b]
            cs = others[(others != b)]
            rbc = rho[b, cs]
            ok = (rab * rab / r <= rbc + 1e-15) & (rbc <= rab) & (rbc > 0)
            for cidx in cs[ok]:
                if rho_t[b, cidx] <= 0:
                    continue
                xs.append(math.log(rho[b, cidx] / r))
                ys.append(math.log(rho_t[b, cidx] / r_t))
        counts[pid] = len(xs)
        x = np.asarray(xs)
        y = np.asarray(ys)
        if x.size >= min_triples and np.ptp(x) > 0:
            slope = float(np.polyfit(x, y, 1)[0])
            lam_est[pid] = slope
            c3[pid] = float(math.exp(np.max(np.abs(y - slope * x))))
        else:
            lam_est[pid] = None
    # condition (2), second half: target shadows missed by the correspondence
    hit = set(correspondence[p.peripheral] for p in pairing.source if p.kind == PARABOLIC)
    missed = [q for q in range(target.peripheral_count) if q not in hit]
    if missed and pairing.target:
        pts = [parabolic_point(target, q) for q in missed] + list(pairing.target)
        m = visual_matrix(target, pts, dec_tgt.epsilon)[: len(missed), len(missed) :]
        for k, q in enumerate(missed):
            row = m[k]
            if row.min() > 0:
                c2 = max(c2, dec_tgt.radius(q) / float(row.min()))
    eta = eta_profile(rho, rho_t, eta_triples, seed)
    return ShadowQSReport(eta, c1, c2, c3, lam_est, counts)


def eta_profile(
    rho: np.ndarray, rho_t: np.ndarray, count: int, seed: int, bins: int = 10
) -> list[tuple[float, float]]:
    """Worst ``rho'(hx,hy)/rho'(hx,hz)`` per quantile bin of ``t = rho(x,y)/rho(x,z)``."""
    n = rho.shape[0]
    if n < 3:
        return []
    rng = np.random.default_rng(seed)
    tri = rng.integers(0, n, size=(count, 3))
    x, y, z = tri.T
    ok = (x != y) & (x != z) & (y != z)
    x, y, z = x[ok], y[ok], z[ok]
    ok = (rho[x, z] > 0) & (rho_t[x, z] > 0)
    x, y, z = x[ok], y[ok], z[ok]
    if x.size == 0:
        return []
    t = rho[x, y] / rho[x, z]
    ratio = rho_t[x, y] / rho_t[x, z]
    edges = np.quantile(t, np.linspace(0, 1, bins + 1))
    out = []
    for k in range(bins):
        sel = (t >= edges[k]) & (t <= edges[k + 1])
        if sel.any():
            out.append((float(edges[k + 1]), float(ratio[sel].max())))
    return out


# -- transient sets under maps ---------------------------------------------------------


def transient_image_proximity(
    spec: PeripheralMapSpec,
    pairs: Sequence[tuple[int, int]],
    cfg: TransientConfig = TransientConfig(),
) -> float:
    """Max distance from a transient point of ``[f x, f y]`` to the image path ``f([x, y])``."""
    worst = 0.0
    for x, y in pairs:
        fx, fy = int(spec.f[x]), int(spec.f[y])
        if fx < 0 or fy < 0:
            continue
        alpha = spec.f[base_geodesic(spec.source, x, y)]
        if np.any(alpha < 0):
            continue
        trans = transient_decomposition(
            spec.target, base_geodesic(spec.target, fx, fy), cfg
        ).transient_vertices()
        to_alpha = spec.target.base.distances_to_set(alpha.tolist())
        worst = max(worst, float(to_alpha[trans].max()))
    return worst


def hausdorff(g, a: Sequence[int], b: Sequence[int]) -> float:
    if not len(a) or not len(b):
        return 0.0 if not len(a) and not len(b) else math.inf
    return float(max(g.distances_to_set(b)[list(a)].max(), g.distances_to_set(a)[list(b)].max()))


def transient_hausdorff_check(
    spec: PeripheralMapSpec,
    pairs: Sequence[tuple[int, int]],
    cfg: TransientConfig = TransientConfig(),
) -> float:
    """Max Hausdorff distance between ``f(trans[x, y])`` and ``trans[f x, f y]``."""
    worst = 0.0
    for x, y in pairs:
        fx, fy = int(spec.f[x]), int(spec.f[y])
        if fx < 0 or fy < 0:
            continue
        src_t = transient_decomposition(
            spec.source, base_geodesic(spec.source, x, y), cfg
        ).transient_vertices()
        img = spec.f[src_t]
        if np.any(img < 0):
            continue
        tgt_t = transient_decomposition(
            spec.target, base_geodesic(spec.target, fx, fy), cfg
        ).transient_vertices()
        worst = max(worst, hausdorff(spec.target.base, np.unique(img).tolist(), tgt_t))
    return worst


def composition_consistency(
    spec_f: PeripheralMapSpec, spec_g: PeripheralMapSpec, margin: float = 3.0
) -> float:
    """Sup over reliable source vertices of ``d((g o f)_Cusp(p), g_Cusp(f_Cusp(p)))``."""
    fc = build_f_cusp(spec_f)
    gc = build_f_cusp(spec_g)
    hc = build_f_cusp(compose_specs(spec_f, spec_g))
    core = reliable_core(spec_f.source, margin)
    mid = fc.image[core]
    ok = mid >= 0
    core, mid = core[ok], mid[ok]
    two = gc.image[mid]
    one = hc.image[core]
    ok = (one >= 0) & (two >= 0)
    if not ok.any():
        return 0.0
    return float(spec_g.target.graph.pair_distances(one[ok], two[ok]).max())


def quasi_centre_displacement(fc: FCusp, triples: Sequence[tuple[int, int, int]]) -> float:
    """Max ``d(f qc(x,y,z), qc(fx,fy,fz))`` over triples of source cusped vertices."""
    src, tgt = fc.spec.source.graph, fc.spec.target.graph
    worst = 0.0
    for x, y, z in triples:
        fx, fy, fz = (int(fc.image[v]) for v in (x, y, z))
        p, _ = quasi_centre(src, x, y, z)
        fp = int(fc.image[p])
        if min(fx, fy, fz, fp) < 0:
            continue
        q, _ = quasi_centre(tgt, fx, fy, fz)
        worst = max(worst, tgt.distance(fp, q))
    return worst


# -- serialisation -------------------------------------------------------------------


def spec_to_json(spec: PeripheralMapSpec) -> str:
    sl = spec.source.base.labels
    tl = spec.target.base.labels
    doc = {
        "name": spec.name,
        "vertex_map": [
            [sl[v] if sl else v, (tl[w] if tl else w) if w >= 0 else None]
            for v, w in enumerate(spec.f.tolist())
        ],
        "correspondence": sorted([int(p), int(q)] for p, q in spec.correspondence.items()),
        "lambda": sorted([int(p), float(l)] for p, l in spec.lam.items()),
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def spec_from_json(text: str, source: CuspedSpace, target: CuspedSpace) -> PeripheralMapSpec:
    try:
        doc = json.loads(text)
        f = np.full(source.base.vertex_count, -1, dtype=np.int64)
        for s, t in doc["vertex_map"]:
            v = source.base.index_of(s) if isinstance(s, str) else int(s)
            if t is not None:
                f[v] = target.base.index_of(t) if isinstance(t, str) else int(t)
        corr = {int(p): int(q) for p, q in doc["correspondence"]}
        lam = {int(p): float(l) for p, l in doc["lambda"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed map spec: {exc}") from None
    return PeripheralMapSpec(source, target, f, corr, lam, doc.get("name", ""))
