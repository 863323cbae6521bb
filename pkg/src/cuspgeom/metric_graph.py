"""Weighted graphs with exact shortest paths and coarse-geometric measurements.

Every geometric model in the package (Cayley balls, horoballs, cusped
spaces) is a :class:`WeightedGraph`. Distances are computed with Dijkstra
(``scipy.sparse.csgraph``); geodesics are extracted greedily so that the
returned vertex sequence is the lexicographically smallest among all
geodesics between the two endpoints.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import InputError, ResourceError

#: Absolute/relative tolerance for comparing path lengths.
TOL = 1e-9

#: Largest graph on which the exhaustive four-point scan is allowed.
EXACT_DELTA_CAP = 400

# Row cache budget, in float64 entries.
_CACHE_ENTRIES = 40_000_000
# Sources per Dijkstra batch when many rows are needed at once.
_BATCH_ENTRIES = 20_000_000


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))


class WeightedGraph:
    """Immutable undirected graph with positive finite edge lengths.

    Parameters
    ----------
    vertex_count : int
        Vertices are ``0 .. vertex_count - 1``.
    edges : iterable of (u, v, w)
        Undirected edges. Parallel edges keep the shortest length.
    labels : sequence of str, optional
        Opaque per-vertex tags (words, provenance strings).
    """

    def __init__(
        self,
        vertex_count: int,
        edges: Iterable[tuple[int, int, float]],
        labels: Sequence[str] | None = None,
    ):
        n = int(vertex_count)
        if n < 1:
            raise InputError("a graph needs at least one vertex")
        best: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if not (math.isfinite(w) and w > 0):
                raise InputError(f"edge ({u}, {v}) has non-positive or non-finite weight {w}")
            key = (u, v) if u < v else (v, u)
            if key not in best or w < best[key]:
                best[key] = w
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != n:
                raise InputError(f"expected {n} labels, got {len(labels)}")

        keys = sorted(best)
        eu = np.array([k[0] for k in keys], dtype=np.int64)
        ev = np.array([k[1] for k in keys], dtype=np.int64)
        ew = np.array([best[k] for k in keys], dtype=np.float64)
        self._n = n
        self._eu, self._ev, self._ew = eu, ev, ew
        self._labels = labels
        self._label_index: dict[str, int] | None = None
        rows = np.concatenate([eu, ev])
        cols = np.concatenate([ev, eu])
        data = np.concatenate([ew, ew])
        self._csr = csr_matrix((data, (rows, cols)), shape=(n, n))
        self._csr.sort_indices()
        if n > 1:
            ncomp, _ = connected_components(self._csr, directed=False)
            if ncomp != 1:
                raise InputError(f"graph is disconnected ({ncomp} components)")
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._max_rows = max(64, _CACHE_ENTRIES // n)

    # -- basic structure -------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return self._n

    def __len__(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._ew)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(w)) for u, v, w in zip(self._eu, self._ev, self._ew)]

    def edge_array(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._eu, self._ev, self._ew

    @property
    def labels(self) -> tuple[str, ...] | None:
        return self._labels

    def label(self, v: int) -> str:
        if self._labels is None:
            return str(v)
        return self._labels[v]

    def index_of(self, label: str) -> int:
        """Vertex carrying ``label``; raises :class:`InputError` if absent."""
        if self._labels is None:
            raise InputError("graph has no labels")
        if self._label_index is None:
            self._label_index = {s: i for i, s in enumerate(self._labels)}
        try:
            return self._label_index[label]
        except KeyError:
            raise InputError(f"no vertex labelled {label!r}") from None

    def has_label(self, label: str) -> bool:
        if self._labels is None:
            return False
        if self._label_index is None:
            self._label_index = {s: i for i, s in enumerate(self._labels)}
        return label in self._label_index

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbour ids (ascending) and the corresponding edge lengths."""
        self.check_vertex(v)
        lo, hi = self._csr.indptr[v], self._csr.indptr[v + 1]
        return self._csr.indices[lo:hi], self._csr.data[lo:hi]

    def degrees(self) -> np.ndarray:
        return np.diff(self._csr.indptr)

    @property
    def csr(self) -> csr_matrix:
        return self._csr

    def check_vertex(self, v: int) -> int:
        if not isinstance(v, (int, np.integer)) or not (0 <= v < self._n):
            raise InputError(f"unknown vertex id {v!r}")
        return int(v)

    # -- distances -------------------------------------------------------

    def distances_from(self, source: int) -> np.ndarray:
        """Exact distances from ``source`` to every vertex (read-only array)."""
        source = self.check_vertex(source)
        row = self._rows.get(source)
        if row is not None:
            self._rows.move_to_end(source)
            return row
        row = dijkstra(self._csr, directed=False, indices=source)
        row.setflags(write=False)
        self._rows[source] = row
        if len(self._rows) > self._max_rows:
            self._rows.popitem(last=False)
        return row

    def distance(self, u: int, v: int) -> float:
        # measured from the smaller id so that d(u, v) == d(v, u) bit for bit
        self.check_vertex(u)
        self.check_vertex(v)
        u, v = min(u, v), max(u, v)
        return float(self.distances_from(u)[v])

    def distances_to_set(self, sources: Iterable[int]) -> np.ndarray:
        """Distance from every vertex to the nearest vertex of ``sources``."""
        src = sorted({self.check_vertex(int(s)) for s in sources})
        if not src:
            raise InputError("empty source set")
        if len(src) == 1:
            return self.distances_from(src[0])
        return dijkstra(self._csr, directed=False, indices=src, min_only=True)

    def distance_rows(self, sources: Sequence[int]) -> np.ndarray:
        """Stacked distance rows for ``sources`` (one Dijkstra per source)."""
        src = np.asarray(sources, dtype=np.int64)
        if src.size == 0:
            return np.zeros((0, self._n))
        out = np.empty((src.size, self._n))
        batch = max(1, _BATCH_ENTRIES // self._n)
        for lo in range(0, src.size, batch):
            chunk = src[lo : lo + batch]
            out[lo : lo + chunk.size] = dijkstra(self._csr, directed=False, indices=chunk)
        return out

    def distance_matrix(self) -> np.ndarray:
        return self.distance_rows(np.arange(self._n))

    def pair_distances(self, a: Sequence[int], b: Sequence[int]) -> np.ndarray:
        """Vectorised ``d(a[i], b[i])`` computing each needed source row once."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = np.empty(a.size)
        if a.size == 0:
            return out
        return self.pair_distances_many([(a, b)])[0]

    def pair_distances_many(
        self, pairs: Sequence[tuple[Sequence[int], Sequence[int]]]
    ) -> list[np.ndarray]:
        """:meth:`pair_distances` for several index arrays sharing one pass over source rows."""
        pairs = [(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)) for a, b in pairs]
        outs = [np.empty(a.size) for a, _ in pairs]
        if not pairs or all(a.size == 0 for a, _ in pairs):
            return outs
        uniq = np.unique(np.concatenate([a for a, _ in pairs]))
        invs = [np.searchsorted(uniq, a) for a, _ in pairs]
        batch = max(1, _BATCH_ENTRIES // self._n)
        for lo in range(0, uniq.size, batch):
            rows = self.distance_rows(uniq[lo : lo + batch])
            for (_, b), inv, out in zip(pairs, invs, outs):
                sel = (inv >= lo) & (inv < lo + batch)
                out[sel] = rows[inv[sel] - lo, b[sel]]
        return outs

    def eccentricity(self, v: int) -> float:
        return float(self.distances_from(v).max())

    # -- subgraphs -------------------------------------------------------

    def induced_subgraph(self, keep: Sequence[int]) -> tuple["WeightedGraph", np.ndarray]:
        """Subgraph on ``keep`` (renumbered in the given order) and the id map."""
        keep = np.asarray(keep, dtype=np.int64)
        pos = -np.ones(self._n, dtype=np.int64)
        pos[keep] = np.arange(keep.size)
        mask = (pos[self._eu] >= 0) & (pos[self._ev] >= 0)
        edges = zip(pos[self._eu[mask]], pos[self._ev[mask]], self._ew[mask])
        labels = None if self._labels is None else [self._labels[k] for k in keep]
        return WeightedGraph(keep.size, edges, labels), keep

    def __repr__(self) -> str:
        return f"WeightedGraph(vertices={self._n}, edges={self.edge_count})"


# -- builders --------------------------------------------------------------


def path_graph(n: int) -> WeightedGraph:
    """Unit-weight path ``0 - 1 - ... - (n-1)``."""
    return WeightedGraph(n, ((i, i + 1, 1.0) for i in range(n - 1)))


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise InputError("a cycle needs at least 3 vertices")
    return WeightedGraph(n, ((i, (i + 1) % n, 1.0) for i in range(n)))


def grid_graph(rows: int, cols: int | None = None) -> WeightedGraph:
    """Unit grid; vertex ``(i, j)`` has id ``i * cols + j`` and label ``"i,j"``."""
    cols = rows if cols is None else cols
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            if j + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if i + 1 < rows:
                edges.append((v, v + cols, 1.0))
    labels = [f"{i},{j}" for i in range(rows) for j in range(cols)]
    return WeightedGraph(rows * cols, edges, labels)


# -- paths and products ----------------------------------------------------


def shortest_path(g: WeightedGraph, u: int, v: int) -> tuple[float, list[int]]:
    """Exact distance and the lexicographically smallest geodesic from u to v."""
    u = g.check_vertex(u)
    v = g.check_vertex(v)
    to_v = g.distances_from(v)
    path = [u]
    cur = u
    while cur != v:
        nbrs, wts = g.neighbors(cur)
        here = to_v[cur]
        for w, length in zip(nbrs, wts):
            if _close(length + to_v[w], here) and to_v[w] < here:
                cur = int(w)
                break
        else:  # pragma: no cover - only reachable through float pathologies
            raise RuntimeError(f"geodesic extraction stalled at vertex {cur}")
        path.append(cur)
    return float(to_v[u]), path


def gromov_product(g: WeightedGraph, o: int, x: int, y: int) -> float:
    """``(x|y)_o = (d(o,x) + d(o,y) - d(x,y)) / 2``."""
    row = g.distances_from(o)
    g.check_vertex(x)
    g.check_vertex(y)
    val = 0.5 * (row[x] + row[y] - g.distance(x, y))
    return max(0.0, float(val))


# -- hyperbolicity ---------------------------------------------------------


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    method: str  # "exact" | "sampled"
    sample_count: int
    seed: int | None


def _four_point_excess(s1: np.ndarray, s2: np.ndarray, s3: np.ndarray) -> np.ndarray:
    hi = np.maximum(np.maximum(s1, s2), s3)
    lo = np.minimum(np.minimum(s1, s2), s3)
    mid = s1 + s2 + s3 - hi - lo
    return 0.5 * (hi - mid)


def four_point_delta(
    g: WeightedGraph,
    mode: str = "exact",
    count: int = 100_000,
    seed: int = 0,
    cap: int = EXACT_DELTA_CAP,
) -> DeltaEstimate:
    """Four-point hyperbolicity constant.

    For a quadruple with pair sums ``S1 >= S2 >= S3`` the excess is
    ``(S1 - S2) / 2``; the estimate is the maximum excess over all quadruples
    (``mode="exact"``) or over ``count`` uniformly drawn quadruples
    (``mode="sampled"``, reproducible from ``seed``).
    """
    n = g.vertex_count
    if mode == "exact":
        if n > cap:
            raise ResourceError(f"exact four-point scan limited to {cap} vertices (graph has {n})")
        D = g.distance_matrix()
        best = 0.0
        # quadruples w < x < y, z > x cover every unordered quadruple
        for w in range(n):
            for x in range(w + 1, n - 1):
                sub = D[x + 1 :, x + 1 :]
                dwy = D[w, x + 1 :]
                dxy = D[x, x + 1 :]
                s1 = D[w, x] + sub
                s2 = dwy[:, None] + dxy[None, :]
                s3 = dxy[:, None] + dwy[None, :]
                val = float(_four_point_excess(s1, s2, s3).max())
                if val > best:
                    best = val
        return DeltaEstimate(best, "exact", n**4, None)
    if mode == "sampled":
        if count < 1:
            raise InputError("sample count must be positive")
        rng = np.random.default_rng(seed)
        q = rng.integers(0, n, size=(count, 4))
        w, x, y, z = q.T
        dwx, dyz, dwy, dxz, dwz, dxy = g.pair_distances_many(
            [(w, x), (y, z), (w, y), (x, z), (w, z), (x, y)]
        )
        ex = _four_point_excess(dwx + dyz, dwy + dxz, dwz + dxy)
        return DeltaEstimate(float(ex.max()), "sampled", int(count), int(seed))
    raise InputError(f"unknown mode {mode!r}; expected 'exact' or 'sampled'")


# -- quasi-centres -----------------------------------------------------------


def quasi_centre(g: WeightedGraph, x: int, y: int, z: int) -> tuple[int, float]:
    """Vertex on the union of the three canonical geodesics closest to all sides.

    Minimises ``max(d(p,[x,y]), d(p,[y,z]), d(p,[z,x]))`` over vertices of the
    three geodesics; returns the minimiser (smallest id on ties) and the value.
    """
    sides = [shortest_path(g, a, b)[1] for a, b in ((x, y), (y, z), (z, x))]
    to_side = [g.distances_to_set(s) for s in sides]
    cand = np.array(sorted(set().union(*sides)), dtype=np.int64)
    excess = np.max(np.stack([t[cand] for t in to_side]), axis=0)
    best = excess.min()
    i = int(np.flatnonzero(excess <= best + TOL * max(1.0, best))[0])
    return int(cand[i]), float(excess[i])


# -- file format ---------------------------------------------------------------


def dumps_graph(g: WeightedGraph) -> str:
    """Serialise to the line format ``v <n>`` / ``e <u> <v> <w>`` / ``l <v> <tag>``."""
    lines = [f"v {g.vertex_count}"]
    lines.extend(f"e {u} {v} {w!r}" for u, v, w in g.edges())
    if g.labels is not None:
        lines.extend(f"l {i} {s}" for i, s in enumerate(g.labels))
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> WeightedGraph:
    n = None
    edges = []
    labels: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        try:
            if kind == "v":
                n = int(rest)
            elif kind == "e":
                u, v, w = rest.split()
                edges.append((int(u), int(v), float(w)))
            elif kind == "l":
                v, _, tag = rest.partition(" ")
                labels[int(v)] = tag
            else:
                raise ValueError(f"unknown record {kind!r}")
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
    if n is None:
        raise InputError("missing 'v <count>' record")
    lab = None
    if labels:
        lab = [labels.get(i, str(i)) for i in range(n)]
    return WeightedGraph(n, edges, lab)


def write_graph(g: WeightedGraph, path: str | Path) -> None:
    Path(path).write_text(dumps_graph(g), encoding="utf-8")


def read_graph(path: str | Path) -> WeightedGraph:
    return loads_graph(Path(path).read_text(encoding="utf-8"))
