"""Transient and deep points of base geodesics, relative Rips checks and the distance formula.

A point ``p`` of a geodesic ``alpha`` is *deep* along ``P`` if it lies on a
subgeodesic ``[x, y]`` of ``alpha`` with both endpoints in ``N_mu(P)`` and
``d(p, x) > R``, ``d(p, y) > R``. Points that are deep along no peripheral
are transient. Because subgeodesics of a geodesic realise distances, the
widest choice is the first and last vertex of ``alpha`` inside ``N_mu(P)``,
so the deep set along ``P`` is a single interval of indices.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .cusped_space import CuspedSpace
from .errors import DataError, InputError
from .metric_graph import TOL, shortest_path


@dataclass(frozen=True)
class TransientConfig:
    mu: float = 2.0
    R: float = 4.0

    def __post_init__(self):
        if not (0 <= self.mu <= self.R):
            raise InputError(f"need R >= mu >= 0, got mu={self.mu}, R={self.R}")


@dataclass(frozen=True)
class DeepComponent:
    peripheral: int
    start: int
    end: int  # inclusive

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class GeodesicDecomposition:
    geodesic: tuple[int, ...]
    transient: tuple[int, ...]
    deep: tuple[DeepComponent, ...]
    config: TransientConfig

    def transient_vertices(self) -> list[int]:
        return [self.geodesic[i] for i in self.transient]

    def deep_indices(self) -> list[int]:
        return [i for comp in self.deep for i in range(comp.start, comp.end + 1)]


def project_to_peripheral(c: CuspedSpace, pid: int, x: int) -> int:
    """Nearest vertex of the peripheral to ``x`` in the base metric (smallest id on ties)."""
    verts = np.asarray(c.peripheral_vertices(pid))
    if verts.size == 0:
        raise InputError(f"peripheral {pid} is empty")
    x = c.base.check_vertex(x)
    d = c.base.distances_from(x)[verts]
    return int(verts[int(np.flatnonzero(d <= d.min() + TOL)[0])])


def _check_base_path(c: CuspedSpace, geodesic: Sequence[int]) -> np.ndarray:
    geo = np.asarray(geodesic, dtype=np.int64)
    if geo.size == 0:
        raise InputError("empty geodesic")
    if geo.min() < 0 or geo.max() >= c.base.vertex_count:
        raise InputError("geodesic leaves the base graph")
    return geo


def transient_decomposition(
    c: CuspedSpace, geodesic: Sequence[int], cfg: TransientConfig = TransientConfig()
) -> GeodesicDecomposition:
    geo = _check_base_path(c, geodesic)
    # arclength along the path; equals the base distance from its start for geodesics
    steps = c.base.pair_distances(geo[:-1], geo[1:]) if geo.size > 1 else np.zeros(0)
    s = np.concatenate([[0.0], np.cumsum(steps)])
    intervals: list[tuple[int, int, int]] = []
    if c.peripheral_count:
        near = c.base_distance_to_peripherals()[:, geo] <= cfg.mu + TOL
        for pid in np.flatnonzero(near.sum(axis=1) >= 2):
            hits = np.flatnonzero(near[pid])
            lo, hi = s[hits[0]], s[hits[-1]]
            deep = np.flatnonzero((s - lo > cfg.R + TOL) & (hi - s > cfg.R + TOL))
            if deep.size:
                intervals.append((int(deep[0]), int(deep[-1]), int(pid)))
    merged: list[DeepComponent] = []
    for lo, hi, pid in sorted(intervals):
        if merged and lo <= merged[-1].end:
            prev = merged[-1]
            keep = pid if hi - lo > prev.end - prev.start else prev.peripheral
            merged[-1] = DeepComponent(keep, prev.start, max(hi, prev.end))
        else:
            merged.append(DeepComponent(pid, lo, hi))
    covered = np.zeros(geo.size, dtype=bool)
    for comp in merged:
        covered[comp.start : comp.end + 1] = True
    transient = tuple(int(i) for i in np.flatnonzero(~covered))
    return GeodesicDecomposition(tuple(int(v) for v in geo), transient, tuple(merged), cfg)


def base_geodesic(c: CuspedSpace, x: int, y: int) -> list[int]:
    return shortest_path(c.base, x, y)[1]


def transient_set(c: CuspedSpace, x: int, y: int, cfg: TransientConfig) -> list[int]:
    return transient_decomposition(c, base_geodesic(c, x, y), cfg).transient_vertices()


def relative_rips_check(
    c: CuspedSpace, x: int, y: int, z: int, cfg: TransientConfig = TransientConfig()
) -> float:
    """Smallest ``D`` with ``trans[x,y]`` inside the D-neighbourhood of ``trans[x,z] + trans[z,y]``."""
    t_xy = transient_set(c, x, y, cfg)
    others = set(transient_set(c, x, z, cfg)) | set(transient_set(c, z, y, cfg))
    to_others = c.base.distances_to_set(others)
    return float(to_others[t_xy].max())


# -- the distance formula ----------------------------------------------------------


def cusped_geodesic(c: CuspedSpace, x: int, y: int) -> list[int]:
    return shortest_path(c.graph, x, y)[1]


def theta_all(c: CuspedSpace, x: int, y: int) -> dict[int, float]:
    """``theta_Q(x, y)`` for every peripheral whose horoball interior the geodesic meets."""
    c.base.check_vertex(x)
    c.base.check_vertex(y)
    path = np.asarray(cusped_geodesic(c, x, y))
    owner = c.peripheral_of(path)
    out: dict[int, float] = {}
    for pid in np.unique(owner[owner >= 0]).tolist():
        idx = np.flatnonzero(owner == pid)
        # the neighbours outside the interior are level-0 points of Q
        x_in = int(c.base_vertex(path[idx[0] - 1]))
        y_out = int(c.base_vertex(path[idx[-1] + 1]))
        out[pid] = c.base.distance(x_in, y_out)
    return out


def theta(c: CuspedSpace, pid: int, x: int, y: int) -> float:
    """Base distance between the entrance and exit points of ``[x, y]`` in the horoball over Q."""
    c._check_pid(pid)
    return theta_all(c, x, y).get(pid, 0.0)


def cutoff(a: float, L: float) -> float:
    return a if a > L else 0.0


@dataclass
class DistanceFormulaFit:
    threshold: float
    fit_lambda: float
    fit_mu: float
    max_residual: float
    unit_residual: float  # additive error with lam fixed at 1
    rows: list[dict] = field(default_factory=list, repr=False)

    def csv_text(self) -> str:
        buf = io.StringIO()
        cols = ["pair_id", "d_X", "d_cusp", "theta_sum", "rhs", "residual"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: (f"{r[k]:.12g}" if isinstance(r[k], float) else r[k]) for k in cols})
        return buf.getvalue()


def distance_formula_terms(
    c: CuspedSpace, pairs: Iterable[tuple[int, int]], L: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per pair ``(d_X, d_Cusp, sum of cut-off theta terms)``."""
    pairs = list(pairs)
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    dx = c.base.pair_distances(a, b)
    dc = c.graph.pair_distances(a, b)
    th = np.array([sum(cutoff(t, L) for t in theta_all(c, x, y).values()) for x, y in pairs])
    return dx, dc, th


def fit_lambda_mu(lhs: np.ndarray, rhs: np.ndarray) -> tuple[float, float]:
    """Smallest ``(lam, mu)`` with ``lhs <= lam rhs + mu`` and ``rhs <= lam lhs + mu``.

    "Smallest" means minimal ``lam + mu``. Weighting ``lam`` by a sample
    scale instead makes the optimum jump between LP vertices as the sample grows.
    """
    A = np.concatenate(
        [np.stack([-rhs, -np.ones_like(rhs)], axis=1), np.stack([-lhs, -np.ones_like(lhs)], axis=1)]
    )
    b = np.concatenate([-lhs, -rhs])
    res = linprog(c=[1.0, 1.0], A_ub=A, b_ub=b, bounds=[(1, None), (0, None)], method="highs")
    if not res.success:  # pragma: no cover - the LP is always feasible
        raise DataError(f"distance-formula fit failed: {res.message}")
    lam, mu = (float(v) for v in res.x)
    return lam, mu


def two_sided_residual(lhs: np.ndarray, rhs: np.ndarray, lam: float) -> np.ndarray:
    return np.maximum(lhs - lam * rhs, rhs - lam * lhs)


def distance_formula_fit(
    c: CuspedSpace, pairs: Sequence[tuple[int, int]], L: float
) -> DistanceFormulaFit:
    if L < 0:
        raise InputError("L must be nonnegative")
    if not pairs:
        raise InputError("empty pair sample")
    dx, dc, th = distance_formula_terms(c, pairs, L)
    rhs = th + dc
    lam, mu = fit_lambda_mu(dx, rhs)
    resid = two_sided_residual(dx, rhs, lam)
    rows = [
        {
            "pair_id": i,
            "d_X": float(dx[i]),
            "d_cusp": float(dc[i]),
            "theta_sum": float(th[i]),
            "rhs": float(rhs[i]),
            "residual": float(resid[i]),
        }
        for i in range(len(pairs))
    ]
    unit = float(max(two_sided_residual(dx, rhs, 1.0).max(), 0.0))
    return DistanceFormulaFit(float(L), lam, mu, float(max(resid.max(), 0.0)), unit, rows)


def sample_base_pairs(c: CuspedSpace, count: int, seed: int) -> list[tuple[int, int]]:
    """Seeded pairs of distinct base vertices."""
    n = c.base.vertex_count
    if n < 2:
        raise InputError("need at least two base vertices")
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x, y = (int(v) for v in rng.integers(0, n, 2))
        if x != y:
            out.append((x, y))
    return out


# -- projection constants, measured -------------------------------------------------


def deep_projection_offset(
    c: CuspedSpace, pairs: Iterable[tuple[int, int]], cfg: TransientConfig = TransientConfig()
) -> float:
    """Largest base distance between a deep component's ends and the projections of x, y."""
    worst = 0.0
    for x, y in pairs:
        dec = transient_decomposition(c, base_geodesic(c, x, y), cfg)
        for comp in dec.deep:
            px = project_to_peripheral(c, comp.peripheral, x)
            py = project_to_peripheral(c, comp.peripheral, y)
            a, b = dec.geodesic[comp.start], dec.geodesic[comp.end]
            worst = max(worst, c.base.distance(a, px), c.base.distance(b, py))
    return worst


def deep_length_deficit(
    c: CuspedSpace,
    pairs: Iterable[tuple[int, int]],
    cfg: TransientConfig = TransientConfig(),
) -> float:
    """Smallest ``C`` such that a deep component along P has length >= d(pi_P x, pi_P y) - C.

    Only peripherals whose projections are more than ``C`` apart force a
    component; the returned value is the maximum over pairs and peripherals of
    ``d(pi_P x, pi_P y) - (length of the deep component along P)``, with an
    absent component counting as length 0.
    """
    worst = 0.0
    for x, y in pairs:
        dec = transient_decomposition(c, base_geodesic(c, x, y), cfg)
        lengths: dict[int, float] = {}
        for comp in dec.deep:
            span = c.base.distance(dec.geodesic[comp.start], dec.geodesic[comp.end])
            lengths[comp.peripheral] = max(lengths.get(comp.peripheral, 0.0), span)
        for pid in range(c.peripheral_count):
            d = c.base.distance(project_to_peripheral(c, pid, x), project_to_peripheral(c, pid, y))
            worst = max(worst, d - lengths.get(pid, 0.0))
    return worst
