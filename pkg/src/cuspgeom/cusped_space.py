"""Finite cusped spaces: a base graph with a truncated horoball on each peripheral set.

A peripheral set need not be connected in the base graph (a coset of a
commutator subgroup is not), so each set ``P`` gets a graph approximation
``Gamma_P``: two vertices of ``P`` are joined when their base distance is at
most ``R_P``, the smallest threshold that makes ``Gamma_P`` connected. The
horoball over ``P`` is the combinatorial horoball over ``Gamma_P`` with its
level-0 copy identified with ``P`` inside the base graph. Horizontal edges
are only added at levels ``>= 1``, so deleting every horoball vertex leaves
the base graph untouched.

Vertex numbering: base vertices keep their ids; then, peripheral by
peripheral, each vertex of the (sorted) set contributes levels ``1..N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .errors import InputError
from .group_ball import PeripheralStructure
from .metric_graph import WeightedGraph, dumps_graph


@dataclass(frozen=True)
class Provenance:
    """Where a cusped vertex comes from. ``peripheral`` is ``None`` for base vertices."""

    peripheral: int | None
    base_vertex: int
    level: int

    @property
    def is_base(self) -> bool:
        return self.peripheral is None

    def tag(self) -> str:
        if self.peripheral is None:
            return f"B:{self.base_vertex}"
        return f"H:{self.peripheral}:{self.base_vertex}:{self.level}"


@dataclass(frozen=True)
class BusemannValue:
    value: float
    proxy_level: int


def peripheral_connectivity_radius(
    base: WeightedGraph, vertices, d: np.ndarray | None = None
) -> float:
    """Smallest ``R`` for which the ``d_X <= R`` graph on ``vertices`` is connected.

    ``d`` optionally supplies the base distance matrix among ``vertices``.
    """
    vs = np.asarray(vertices, dtype=np.int64)
    if vs.size < 2:
        return 0.0
    if d is None:
        d = base.distance_rows(vs)[:, vs]
    mst = minimum_spanning_tree(d)
    return float(mst.data.max()) if mst.nnz else 0.0


class CuspedSpace:
    def __init__(
        self,
        base: WeightedGraph,
        peripherals: PeripheralStructure,
        depth: int,
        basepoint: int = 0,
    ):
        if depth < 1:
            raise InputError("depth must be >= 1")
        _, _, w = base.edge_array()
        if w.size and not np.all(w == 1.0):
            raise InputError("cusped spaces are built over unit-weight base graphs")
        self.base = base
        self.peripherals = peripherals
        self.depth = int(depth)
        self.basepoint = base.check_vertex(basepoint)
        self._check_peripherals()

        nb = base.vertex_count
        N = self.depth
        eu, ev, ew = base.edge_array()
        edges = list(zip(eu.tolist(), ev.tolist(), ew.tolist()))
        base_labels = base.labels or tuple(str(v) for v in range(nb))
        labels = list(base_labels)
        prov_p = [-1] * nb
        prov_v = list(range(nb))
        prov_l = [0] * nb
        self._ids: list[np.ndarray] = []
        self._radii: list[float] = []
        next_id = nb
        for pid, ps in enumerate(peripherals):
            verts = np.asarray(ps.vertices, dtype=np.int64)
            k = verts.size
            ids = np.empty((k, N + 1), dtype=np.int64)
            ids[:, 0] = verts
            ids[:, 1:] = next_id + np.arange(k * N).reshape(k, N)
            next_id += k * N
            self._ids.append(ids)
            for i, v in enumerate(verts.tolist()):
                for n in range(1, N + 1):
                    edges.append((int(ids[i, n - 1]), int(ids[i, n]), 1.0))
                    labels.append(f"h{pid}:{base_labels[v]}@{n}")
                    prov_p.append(pid)
                    prov_v.append(v)
                    prov_l.append(n)
            d = base.distance_rows(verts)[:, verts]
            radius = peripheral_connectivity_radius(base, verts, d)
            self._radii.append(radius)
            ii, jj = np.nonzero(np.triu(d <= radius + 1e-9, k=1))
            for n in range(1, N + 1):
                wn = math.exp(-n)
                edges.extend(
                    zip(ids[ii, n].tolist(), ids[jj, n].tolist(), [wn] * ii.size)
                )
        self.graph = WeightedGraph(next_id, edges, labels)
        self._prov_p = np.asarray(prov_p, dtype=np.int64)
        self._prov_v = np.asarray(prov_v, dtype=np.int64)
        self._prov_l = np.asarray(prov_l, dtype=np.int64)
        self._base_to_p: np.ndarray | None = None

    def _check_peripherals(self) -> None:
        owner: dict[tuple[int, int], int] = {}
        for pid, ps in enumerate(self.peripherals):
            if len(ps.vertices) < 2:
                raise InputError(f"peripheral {pid} has fewer than 2 vertices")
            for v in ps.vertices:
                self.base.check_vertex(v)
                if ps.group is None:
                    continue
                key = (ps.group, v)
                if key in owner:
                    raise InputError(
                        f"peripherals {owner[key]} and {pid} of group {ps.group} share vertex {v}"
                    )
                owner[key] = pid

    # -- queries -------------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    @property
    def peripheral_count(self) -> int:
        return len(self.peripherals)

    def peripheral_vertices(self, pid: int) -> tuple[int, ...]:
        return self.peripherals[self._check_pid(pid)].vertices

    def connectivity_radius(self, pid: int) -> float:
        return self._radii[self._check_pid(pid)]

    def vertex(self, pid: int, v: int, level: int) -> int:
        """Cusped id of ``(v, level)`` in the horoball over peripheral ``pid``."""
        ids = self._ids[self._check_pid(pid)]
        verts = self.peripherals[pid].vertices
        i = np.searchsorted(verts, v)
        if i >= len(verts) or verts[i] != v:
            raise InputError(f"vertex {v} is not in peripheral {pid}")
        if not 0 <= level <= self.depth:
            raise InputError(f"level {level} outside 0..{self.depth}")
        return int(ids[i, level])

    def horoball_ids(self, pid: int) -> np.ndarray:
        """Array ``ids[i, n]`` for the i-th vertex of the peripheral at level n."""
        return self._ids[self._check_pid(pid)]

    def interior(self, pid: int) -> np.ndarray:
        return self._ids[self._check_pid(pid)][:, 1:].ravel()

    def provenance(self, p: int) -> Provenance:
        p = self.graph.check_vertex(p)
        pid = int(self._prov_p[p])
        return Provenance(None if pid < 0 else pid, int(self._prov_v[p]), int(self._prov_l[p]))

    def level(self, p) -> np.ndarray | int:
        out = self._prov_l[p]
        return int(out) if np.ndim(out) == 0 else out

    def base_vertex(self, p) -> np.ndarray | int:
        out = self._prov_v[p]
        return int(out) if np.ndim(out) == 0 else out

    def peripheral_of(self, p) -> np.ndarray | int:
        """Peripheral id of a horoball vertex, ``-1`` for base vertices."""
        out = self._prov_p[p]
        return int(out) if np.ndim(out) == 0 else out

    def is_base(self, p: int) -> bool:
        return int(self._prov_p[p]) < 0

    def nearest_peripheral_vertex(self, pid: int, x: int) -> int:
        """Vertex of the peripheral nearest ``x`` in the cusped metric (smallest id on ties)."""
        verts = np.asarray(self.peripheral_vertices(pid))
        d = self.graph.distances_from(x)[verts]
        return int(verts[int(np.flatnonzero(d <= d.min() + 1e-9)[0])])

    def apex(self, pid: int) -> int:
        """Deepest vertex over the peripheral vertex nearest the basepoint."""
        v = self.nearest_peripheral_vertex(pid, self.basepoint)
        return self.vertex(pid, v, self.depth)

    def base_distance_to_peripherals(self) -> np.ndarray:
        """Matrix ``M[pid, v] = d_X(v, P_pid)`` in the base metric (computed once)."""
        if self._base_to_p is None:
            m = np.empty((len(self.peripherals), self.base.vertex_count))
            for pid, ps in enumerate(self.peripherals):
                m[pid] = self.base.distances_to_set(ps.vertices)
            m.setflags(write=False)
            self._base_to_p = m
        return self._base_to_p

    def distance_to_peripheral(self, pid: int, x: int | None = None) -> float:
        """Cusped distance from ``x`` (default the basepoint) to the peripheral set."""
        x = self.basepoint if x is None else x
        verts = np.asarray(self.peripheral_vertices(pid))
        return float(self.graph.distances_from(x)[verts].min())

    def _check_pid(self, pid: int) -> int:
        if not 0 <= pid < len(self.peripherals):
            raise InputError(f"unknown peripheral {pid}")
        return pid

    def __repr__(self) -> str:
        return (
            f"CuspedSpace(base={self.base.vertex_count}, peripherals={len(self.peripherals)}, "
            f"depth={self.depth}, vertices={self.vertex_count})"
        )


def build_cusped_space(
    base: WeightedGraph, peripherals: PeripheralStructure, depth: int, basepoint: int = 0
) -> CuspedSpace:
    return CuspedSpace(base, peripherals, depth, basepoint)


def busemann_estimate(c: CuspedSpace, pid: int, x: int) -> BusemannValue:
    """``d(x, a_N) - d(o, a_N)`` for the apex proxy ``a_N`` of the peripheral."""
    a = c.apex(pid)
    row = c.graph.distances_from(a)
    x = c.graph.check_vertex(x)
    return BusemannValue(float(row[x] - row[c.basepoint]), c.depth)


def inclusion_distortion(c: CuspedSpace, pid: int) -> float:
    """Smallest ``C`` with ``d_Cusp(x, y) >= 2 log(d_X(x, y) + 1) - C`` on the peripheral."""
    verts = np.asarray(c.peripheral_vertices(pid))
    dx = c.base.distance_rows(verts)[:, verts]
    dc = c.graph.distance_rows(verts)[:, verts]
    return float(np.max(2.0 * np.log(dx + 1.0) - dc))


def dumps_cusped(c: CuspedSpace) -> str:
    """Graph file text with provenance tags (``B:v`` or ``H:pid:v:level``) as labels."""
    tagged = WeightedGraph(
        c.vertex_count,
        c.graph.edges(),
        [c.provenance(p).tag() for p in range(c.vertex_count)],
    )
    return dumps_graph(tagged)
