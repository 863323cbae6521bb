"""Finite proxies for the boundary of a cusped space and their visual quasi-metric.

Boundary points are represented by vertices of the cusped graph: a ray limit
by the terminal vertex of a geodesic from the basepoint that reaches the
sampling shell, and the parabolic point of a peripheral ``P`` by its apex,
the deepest vertex over the vertex of ``P`` nearest the basepoint. The
visual quasi-metric is ``exp(-eps (a|b)_o)`` evaluated on these proxies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cusped_space import CuspedSpace
from .errors import DataError, InputError
from .metric_graph import TOL, gromov_product, quasi_centre, shortest_path

PARABOLIC = "parabolic"
RAY = "ray"


@dataclass(frozen=True)
class BoundaryPoint:
    kind: str
    terminal: int
    peripheral: int | None = None

    def __post_init__(self):
        if self.kind not in (PARABOLIC, RAY):
            raise InputError(f"unknown boundary point kind {self.kind!r}")
        if (self.kind == PARABOLIC) != (self.peripheral is not None):
            raise InputError("parabolic points carry a peripheral id, ray limits do not")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "terminal": self.terminal, "peripheral": self.peripheral}


@dataclass(frozen=True)
class VisualConfig:
    epsilon: float = 1.0
    shell_radius: float = 4.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if self.shell_radius < 0:
            raise InputError("shell radius must be nonnegative")


@dataclass(frozen=True)
class BoundarySample:
    points: tuple[BoundaryPoint, ...]
    shell_radius: float
    seed: int

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i: int) -> BoundaryPoint:
        return self.points[i]

    @property
    def parabolic(self) -> list[BoundaryPoint]:
        return [p for p in self.points if p.kind == PARABOLIC]

    @property
    def rays(self) -> list[BoundaryPoint]:
        return [p for p in self.points if p.kind == RAY]

    def terminals(self) -> np.ndarray:
        return np.array([p.terminal for p in self.points], dtype=np.int64)


@dataclass(frozen=True)
class ShadowEntry:
    peripheral: int
    point: BoundaryPoint
    r: float


@dataclass(frozen=True)
class ShadowDecoration:
    epsilon: float
    entries: tuple[ShadowEntry, ...]

    def radius(self, pid: int) -> float:
        return self.entries[pid].r


def parabolic_point(c: CuspedSpace, pid: int) -> BoundaryPoint:
    return BoundaryPoint(PARABOLIC, c.apex(pid), pid)


def ray_candidates(c: CuspedSpace, shell_radius: float) -> np.ndarray:
    row = c.graph.distances_from(c.basepoint)
    return np.flatnonzero(row >= shell_radius - TOL)


def sample_boundary(
    c: CuspedSpace, cfg: VisualConfig, count: int | None, seed: int
) -> BoundarySample:
    """All parabolic points plus ``count`` seeded ray limits (``None`` takes every candidate).

    Ray terminals are drawn without replacement from the vertices at cusped
    distance at least ``shell_radius`` from the basepoint, in sampled order.
    """
    points = [parabolic_point(c, pid) for pid in range(c.peripheral_count)]
    if count is None or count > 0:
        cand = ray_candidates(c, cfg.shell_radius)
        if cand.size == 0:
            raise InputError(f"no vertex reaches the shell at radius {cfg.shell_radius}")
        if count is None or count >= cand.size:
            chosen = cand
        else:
            rng = np.random.default_rng(seed)
            chosen = rng.choice(cand, size=count, replace=False)
        points.extend(BoundaryPoint(RAY, int(v)) for v in chosen)
    return BoundarySample(tuple(points), float(cfg.shell_radius), int(seed))


def sample_horoball_proxies(
    c: CuspedSpace, peripherals: Sequence[int], min_level: int = 1
) -> BoundarySample:
    """Parabolic points of the given peripherals plus every horoball vertex above them.

    A vertex ``(v, n)`` deep in the horoball over ``P`` stands for the boundary
    points whose rays turn at depth ``n`` near ``v``; these are the points
    that approach ``a_P``, which uniform shell sampling rarely reaches.
    """
    points = [parabolic_point(c, pid) for pid in peripherals]
    for pid in peripherals:
        ids = c.horoball_ids(pid)[:, min_level:]
        points.extend(BoundaryPoint(RAY, int(v)) for v in ids.ravel())
    return BoundarySample(tuple(points), 0.0, 0)


def visual_quasimetric(
    c: CuspedSpace, a: BoundaryPoint, b: BoundaryPoint, epsilon: float, o: int | None = None
) -> float:
    if a == b:
        return 0.0
    o = c.basepoint if o is None else o
    return math.exp(-epsilon * gromov_product(c.graph, o, a.terminal, b.terminal))


def visual_matrix(
    c: CuspedSpace, points: Sequence[BoundaryPoint], epsilon: float, o: int | None = None
) -> np.ndarray:
    """Pairwise visual quasi-metric on a list of boundary points."""
    o = c.basepoint if o is None else o
    t = np.array([p.terminal for p in points], dtype=np.int64)
    rows = c.graph.distance_rows(t)[:, t]
    rows = np.where(t[:, None] <= t[None, :], rows, rows.T)
    do = c.graph.distances_from(o)[t]
    gp = np.maximum(0.5 * (do[:, None] + do[None, :] - rows), 0.0)
    rho = np.exp(-epsilon * gp)
    kind = np.array([-1 if p.peripheral is None else p.peripheral for p in points])
    same = (t[:, None] == t[None, :]) & (kind[:, None] == kind[None, :])
    rho[same] = 0.0
    return rho


def shadow_decoration(c: CuspedSpace, epsilon: float) -> ShadowDecoration:
    if c.peripheral_count == 0:
        raise InputError("no peripherals to decorate")
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    entries = tuple(
        ShadowEntry(pid, parabolic_point(c, pid), math.exp(-epsilon * c.distance_to_peripheral(pid)))
        for pid in range(c.peripheral_count)
    )
    return ShadowDecoration(float(epsilon), entries)


def separation_check(c: CuspedSpace, decoration: ShadowDecoration) -> float:
    """Smallest ``C`` with ``rho(a_P, a_Q) >= sqrt(r_P r_Q) / C`` over all peripheral pairs."""
    k = len(decoration.entries)
    if k < 2:
        return 0.0
    pts = [e.point for e in decoration.entries]
    rho = visual_matrix(c, pts, decoration.epsilon)
    r = np.array([e.r for e in decoration.entries])
    iu = np.triu_indices(k, 1)
    vals = rho[iu]
    if np.any(vals <= 0.0):
        i = int(np.flatnonzero(vals <= 0)[0])
        raise DataError(
            f"parabolic proxies of peripherals {iu[0][i]} and {iu[1][i]} coincide; increase depth"
        )
    return float(np.max(np.sqrt(r[iu[0]] * r[iu[1]]) / vals))


def uniform_perfectness_check(rho: np.ndarray, radii: Sequence[float] | None = None) -> float:
    """Largest ``lam`` over tested balls with ``B(z, r) \\ B(z, r/lam)`` empty.

    ``rho`` is the pairwise quasi-metric on the sample. The default radii are
    the realised distances, nudged down so each ball is open, keeping those
    above the smallest distance and at most the diameter. A ball holding no
    point besides its centre gives ``inf``. With two points, or no admissible
    radius, the diameter-to-minimum ratio is reported instead.
    """
    rho = np.asarray(rho, dtype=float)
    n = rho.shape[0]
    if n < 2:
        raise InputError("need at least two sample points")
    off = rho[~np.eye(n, dtype=bool)]
    pos = off[off > 0]
    if pos.size == 0:
        raise DataError("all sample points coincide")
    diam, dmin = float(pos.max()), float(pos.min())
    if radii is None:
        radii = np.unique(pos) * (1 - 1e-9)
    radii = np.asarray([r for r in radii if dmin < r <= diam], dtype=float)
    if n == 2 or radii.size == 0:
        return diam / dmin
    worst = 1.0
    masked = np.where(np.eye(n, dtype=bool) | (rho <= 0), -np.inf, rho)
    for r in radii:
        inner = np.where(masked < r, masked, -np.inf).max(axis=1)
        if np.any(np.isinf(inner)):
            return math.inf
        worst = max(worst, float(np.max(r / inner)))
    return worst


def visual_completeness_check(
    c: CuspedSpace, sample: BoundarySample, probes: Sequence[int], o: int | None = None
) -> float:
    """Max over probes of the best ``max(d(x,[o,a)), d(x,[o,b)), d(x,[a,b]))`` over sample pairs."""
    o = c.basepoint if o is None else o
    terms = sorted({int(t) for t in sample.terminals()})
    if len(terms) < 2:
        raise InputError("need at least two distinct sample terminals")
    rays = [np.asarray(shortest_path(c.graph, o, t)[1]) for t in terms]
    pairs = [(i, j) for i in range(len(terms)) for j in range(i + 1, len(terms))]
    sides = [np.asarray(shortest_path(c.graph, terms[i], terms[j])[1]) for i, j in pairs]
    worst = 0.0
    for x in probes:
        dx = c.graph.distances_from(x)
        to_ray = np.array([dx[r].min() for r in rays])
        best = min(
            max(to_ray[i], to_ray[j], float(dx[s].min())) for (i, j), s in zip(pairs, sides)
        )
        worst = max(worst, float(best))
    return worst


# -- measured constants --------------------------------------------------------------


def quasi_centre_gap(
    c: CuspedSpace, sample: BoundarySample, epsilon: float, pairs: Sequence[tuple[int, int]]
) -> float:
    """Max ``|d(o, qc(o, a, b)) + log(rho(a, b)) / eps|`` over index pairs of the sample."""
    o = c.basepoint
    worst = 0.0
    for i, j in pairs:
        a, b = sample[i], sample[j]
        if a == b:
            continue
        p, _ = quasi_centre(c.graph, o, a.terminal, b.terminal)
        rho = visual_quasimetric(c, a, b, epsilon)
        worst = max(worst, abs(c.graph.distance(o, p) + math.log(rho) / epsilon))
    return worst


def horoball_entry_constant(
    c: CuspedSpace, decoration: ShadowDecoration, sample: BoundarySample
) -> float:
    """Smallest ``C`` with ``rho(a_P, a) <= C r_P exp(-eps k)`` when ``[o, a)`` reaches depth k in P."""
    eps = decoration.epsilon
    worst = 0.0
    for a in sample.rays:
        path = np.asarray(shortest_path(c.graph, c.basepoint, a.terminal)[1])
        owner = c.peripheral_of(path)
        levels = c.level(path)
        for pid in np.unique(owner[owner >= 0]).tolist():
            k = int(levels[owner == pid].max())
            e = decoration.entries[pid]
            rho = visual_quasimetric(c, e.point, a, eps)
            worst = max(worst, rho / (e.r * math.exp(-eps * k)))
    return worst


def boundary_json(decoration: ShadowDecoration | None, sample: BoundarySample, epsilon: float) -> str:
    doc = {
        "epsilon": epsilon,
        "points": [p.to_dict() for p in sample.points],
        "shadows": []
        if decoration is None
        else [{"peripheral": e.peripheral, "r": e.r} for e in decoration.entries],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
