"""Truncated combinatorial horoballs and their distance formulas.

Over a unit-weight base graph, the horoball has vertices ``(v, n)`` for
levels ``0 <= n <= depth``, vertical edges of length 1 between consecutive
levels, and a horizontal copy of every base edge at level ``n`` with length
``exp(-n)``.

A geodesic between ``(x, m)`` and ``(y, n)`` climbs to some level ``t``,
crosses ``d(x, y)`` base edges there and descends, so its length is
``2(t - max(m, n)) + |m - n| + exp(-t) d(x, y)`` minimised over admissible
integer ``t``. :func:`horoball_distance_exact` performs that minimisation;
:func:`horoball_distance_estimate` is the closed-form coarse estimate
``2 log(d exp(-max(m, n)) + 1) + |m - n|``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .metric_graph import WeightedGraph

# 2e / (e - 1): the horizontal length at which climbing one more level stops paying.
RHO = 2 * math.e / (math.e - 1)


class TruncatedHoroball:
    """Graph horoball of finite depth over a unit-weight base graph.

    Vertex ``(v, n)`` has id ``v * (depth + 1) + n``.
    """

    def __init__(self, base: WeightedGraph, depth: int):
        if depth < 1:
            raise InputError("depth must be >= 1")
        _, _, w = base.edge_array()
        if w.size and not np.all(w == 1.0):
            raise InputError("horoballs are built over unit-weight base graphs")
        self.base = base
        self.depth = int(depth)
        L = self.depth + 1
        nb = base.vertex_count
        eu, ev, _ = base.edge_array()
        edges = []
        for v in range(nb):
            for n in range(self.depth):
                edges.append((v * L + n, v * L + n + 1, 1.0))
        for n in range(L):
            w_n = math.exp(-n)
            edges.extend(zip((eu * L + n).tolist(), (ev * L + n).tolist(), [w_n] * eu.size))
        labels = [f"{base.label(v)}@{n}" for v in range(nb) for n in range(L)]
        self.graph = WeightedGraph(nb * L, edges, labels)

    def vertex(self, v: int, n: int) -> int:
        if not (0 <= n <= self.depth):
            raise InputError(f"level {n} outside 0..{self.depth}")
        self.base.check_vertex(v)
        return v * (self.depth + 1) + n

    def base_vertex(self, p: int) -> int:
        return p // (self.depth + 1)

    def level(self, p: int) -> int:
        return p % (self.depth + 1)

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count

    def __repr__(self) -> str:
        return f"TruncatedHoroball(base={self.base!r}, depth={self.depth})"


def build_truncated_horoball(base: WeightedGraph, depth: int) -> TruncatedHoroball:
    return TruncatedHoroball(base, depth)


def horoball_distance_estimate(d_base: float, m: float, n: float) -> float:
    if d_base < 0 or m < 0 or n < 0:
        raise InputError("distance and levels must be nonnegative")
    return 2.0 * math.log(d_base * math.exp(-max(m, n)) + 1.0) + abs(m - n)


def horoball_distance_estimate_array(d_base: np.ndarray, m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Vectorised :func:`horoball_distance_estimate`."""
    d_base = np.asarray(d_base, dtype=float)
    m = np.asarray(m)
    n = np.asarray(n)
    if np.any(d_base < 0) or np.any(m < 0) or np.any(n < 0):
        raise InputError("distance and levels must be nonnegative")
    return 2.0 * np.log(d_base * np.exp(-np.maximum(m, n)) + 1.0) + np.abs(m - n)


def horoball_distance_exact(d_base: int, m: int, n: int, depth: int) -> tuple[float, int]:
    """Exact horoball distance and the crossing level (smallest on ties)."""
    if d_base < 0 or m < 0 or n < 0:
        raise InputError("distance and levels must be nonnegative")
    top = max(m, n)
    if depth < top:
        raise InputError(f"depth {depth} is below level {top}")
    best, best_t = math.inf, top
    for t in range(top, depth + 1):
        val = 2.0 * (t - top) + abs(m - n) + math.exp(-t) * d_base
        if val < best - 1e-12:
            best, best_t = val, t
        else:
            # convex in t: once it stops decreasing it only grows
            break
    return best, best_t


def horoball_distance_exact_array(
    d_base: np.ndarray, m: np.ndarray, n: np.ndarray, depth: int
) -> np.ndarray:
    """Vectorised :func:`horoball_distance_exact` (values only)."""
    d_base = np.asarray(d_base, dtype=float)
    top = np.maximum(m, n)
    gap = np.abs(np.asarray(m) - np.asarray(n))
    best = np.full(np.broadcast(d_base, top).shape, np.inf)
    for t in range(depth + 1):
        val = 2.0 * (t - top) + gap + math.exp(-t) * d_base
        best = np.where(t >= top, np.minimum(best, val), best)
    return best


def proof_crossing_level(d_base: float) -> int:
    """Ceiling choice ``ceil(log(d / rho))`` for the crossing level (cross-check only)."""
    if d_base <= 0:
        return 0
    return max(0, math.ceil(math.log(d_base / RHO)))
