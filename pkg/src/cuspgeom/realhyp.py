"""Upper half-space computations: distances, Busemann functions and horoball families.

A point is ``(x, h)`` with ``x`` in R^(N-1) and height ``h > 0``. Boundary
points are either a horizontal vector or ``None`` for the point at infinity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import InputError


@dataclass(frozen=True)
class HalfSpacePoint:
    horizontal: tuple[float, ...]
    height: float

    def __post_init__(self):
        object.__setattr__(self, "horizontal", tuple(float(v) for v in self.horizontal))
        if not (self.height > 0 and math.isfinite(self.height)):
            raise InputError(f"height must be positive and finite, got {self.height}")

    @property
    def dimension(self) -> int:
        return len(self.horizontal) + 1

    def x(self) -> np.ndarray:
        return np.asarray(self.horizontal)


def _horizontal_gap(p: HalfSpacePoint, q: HalfSpacePoint) -> float:
    if len(p.horizontal) != len(q.horizontal):
        raise InputError("points live in different dimensions")
    return float(np.linalg.norm(p.x() - q.x()))


def hyp_distance(p: HalfSpacePoint, q: HalfSpacePoint) -> float:
    """Closed-form hyperbolic distance."""
    d2 = _horizontal_gap(p, q) ** 2
    h1, h2 = p.height, q.height
    num = math.sqrt(d2 + (h1 - h2) ** 2) + math.sqrt(d2 + (h1 + h2) ** 2)
    return 2.0 * math.log(num / (2.0 * math.sqrt(h1 * h2)))


def hyp_distance_quadrature(p: HalfSpacePoint, q: HalfSpacePoint) -> float:
    """Hyperbolic length of the geodesic arc, integrated numerically.

    Independent of :func:`hyp_distance`: the arc is a vertical segment or a
    semicircle orthogonal to the boundary, on which ``ds = d(theta) / sin(theta)``.
    """
    D = _horizontal_gap(p, q)
    h1, h2 = p.height, q.height
    if D < 1e-12 * max(h1, h2):
        val, _ = quad(lambda h: 1.0 / h, min(h1, h2), max(h1, h2), epsabs=1e-13, epsrel=1e-12)
        return val
    c = (D * D + h2 * h2 - h1 * h1) / (2.0 * D)
    radius = math.hypot(c, h1)
    t1 = math.atan2(h1, -c)
    t2 = math.atan2(h2, D - c)
    lo, hi = sorted((t1, t2))
    val, _ = quad(lambda t: 1.0 / math.sin(t), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _boundary_factor(a: Sequence[float], p: HalfSpacePoint) -> float:
    """``(|x - a|^2 + h^2) / h``, the inverse height of ``p`` after inverting at ``a``."""
    a = np.asarray(a, dtype=float)
    if a.shape != (len(p.horizontal),):
        raise InputError("boundary point has the wrong dimension")
    return (float(np.sum((p.x() - a) ** 2)) + p.height**2) / p.height


def busemann_halfspace(
    a: Sequence[float] | None, x: HalfSpacePoint, o: HalfSpacePoint
) -> float:
    """``beta_a(x, o)``; ``a = None`` is the point at infinity.

    At infinity this is ``log(h_o / h_x)``. A finite ``a`` is sent to infinity
    by inversion, which replaces heights by ``h / (|x - a|^2 + h^2)``.
    """
    if a is None:
        return math.log(o.height / x.height)
    return math.log(_boundary_factor(a, x)) - math.log(_boundary_factor(a, o))


def busemann_limit(
    a: Sequence[float], x: HalfSpacePoint, o: HalfSpacePoint, eps: float = 1e-8
) -> float:
    """Numeric oracle: ``d(gamma(t), x) - t`` far along the geodesic ray from ``o`` to ``a``.

    The quantity is nonincreasing in ``t``; its limit is the Busemann value.
    """
    a = np.asarray(a, dtype=float)
    u_vec = a - o.x()
    u = float(np.linalg.norm(u_vec))
    eta = o.height * eps  # height of the far point
    if u == 0.0:
        far = HalfSpacePoint(tuple(a), eta)
    else:
        # semicircle through o ending at a, radius (u^2 + h^2) / 2u; the offset
        # back from a is written without cancellation so tiny u stays accurate
        rad = (u * u + o.height**2) / (2.0 * u)
        s = u - eta * eta / (rad + math.sqrt(rad * rad - eta * eta))
        far = HalfSpacePoint(tuple(o.x() + s * (u_vec / u)), eta)
    return hyp_distance(far, x) - hyp_distance(far, o)


# -- horoball families ---------------------------------------------------------------


@dataclass(frozen=True)
class HoroballFamilyConfig:
    boundary_points: tuple[tuple[tuple[float, ...], float], ...]
    epsilon: float = 1.0
    t: float = 0.0
    t0: float = 0.0
    basepoint: HalfSpacePoint | None = None

    def __post_init__(self):
        pts = tuple((tuple(float(v) for v in a), float(r)) for a, r in self.boundary_points)
        object.__setattr__(self, "boundary_points", pts)
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if self.t < self.t0:
            raise InputError("need t >= t0")
        if any(r <= 0 for _, r in pts):
            raise InputError("shadow radii must be positive")
        if len({a for a, _ in pts}) != len(pts):
            raise InputError("boundary points must be distinct")

    def base(self) -> HalfSpacePoint:
        if self.basepoint is not None:
            return self.basepoint
        dim = len(self.boundary_points[0][0]) if self.boundary_points else 2
        return HalfSpacePoint((0.0,) * dim, 1.0)


@dataclass(frozen=True)
class Horoball:
    tangent: tuple[float, ...]
    diameter: float

    @property
    def center(self) -> tuple[float, ...]:
        return self.tangent + (self.diameter / 2.0,)

    def contains(self, p: HalfSpacePoint) -> bool:
        c = np.asarray(self.center)
        return float(np.sum((np.append(p.x(), p.height) - c) ** 2)) <= (self.diameter / 2) ** 2


def build_horoball_family(cfg: HoroballFamilyConfig) -> list[Horoball]:
    """Euclidean descriptions of ``{y : beta_a(y, o) <= -t + log(r) / eps}``.

    Writing ``K = (|o - a|^2 + h_o^2) / h_o``, the sublevel set is the ball
    tangent to the boundary at ``a`` with diameter ``K r^(1/eps) e^(-t)``.
    """
    o = cfg.base()
    out = []
    for a, r in cfg.boundary_points:
        K = _boundary_factor(a, o)
        out.append(Horoball(a, K * r ** (1.0 / cfg.epsilon) * math.exp(-cfg.t)))
    return out


def horoball_distance(h1: Horoball, h2: Horoball) -> float:
    """Hyperbolic distance between two horoballs; negative when they overlap."""
    gap2 = float(np.sum((np.asarray(h1.tangent) - np.asarray(h2.tangent)) ** 2))
    return math.log(gap2 / (h1.diameter * h2.diameter))


def horoball_separation_check(family: Sequence[Horoball]) -> float:
    """Minimum pairwise hyperbolic distance in the family (``inf`` for fewer than two)."""
    best = math.inf
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            best = min(best, horoball_distance(family[i], family[j]))
    return best


def separation_t0(cfg: HoroballFamilyConfig) -> float:
    """The ``t0`` for which the family at parameter ``t`` is ``2(t - t0)``-separated.

    The exact threshold is nudged up by a relative ``1e-12`` so the inequality
    survives floating-point rounding.
    """
    at_zero = HoroballFamilyConfig(cfg.boundary_points, cfg.epsilon, 0.0, 0.0, cfg.basepoint)
    t0 = -horoball_separation_check(build_horoball_family(at_zero)) / 2.0
    return t0 + 1e-12 * max(1.0, abs(t0))


def family_json(family: Sequence[Horoball], dimension: int) -> str:
    doc = {
        "dimension": dimension,
        "entries": [{"center": list(h.center), "diameter": h.diameter} for h in family],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
