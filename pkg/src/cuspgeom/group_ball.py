"""Finite balls in Cayley graphs of free groups and free products of cyclic groups.

Group elements are stored in alternating normal form: a tuple of syllables
``(factor, exponent)`` with consecutive syllables in different factors and,
for a finite factor of order ``n``, the exponent reduced into
``(-n/2, n/2]``. The word length for the standard generators is then the
sum of ``|exponent|``. A free group of rank ``r`` is the free product of
``r`` infinite cyclic factors.

Words are written with one letter per generator (``a``, ``b``, ``c``, ...;
the letter ``e`` is skipped) and upper case for inverses, so the commutator
``[a, b]`` is ``"abAB"``. The identity is labelled ``"e"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InputError, ResourceError
from .metric_graph import WeightedGraph

GEN_LETTERS = "abcdfghijklmnopqrstuvwxyz"
IDENTITY_LABEL = "e"

#: Default radius cap for Cayley balls.
MAX_RADIUS = 10
#: Hard vertex budget for a single ball.
MAX_VERTICES = 200_000

Element = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PresentationSpec:
    """A free group or a free product of cyclic groups, with peripheral subgroups.

    ``factors`` lists the cyclic factors: ``None`` for an infinite cyclic
    factor, an integer ``n >= 2`` for ``Z/n``. Each peripheral is either a
    factor index or a generating word; it names the cyclic subgroup whose
    left cosets form the peripheral sets.
    """

    kind: str
    factors: tuple[int | None, ...]
    peripherals: tuple[int | str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("free", "free_product"):
            raise InputError(f"unknown presentation kind {self.kind!r}")
        if self.kind == "free":
            if not self.factors or any(f is not None for f in self.factors):
                raise InputError("a free group has only infinite cyclic factors and rank >= 1")
        elif len(self.factors) < 2:
            raise InputError("a free product needs at least two factors")
        for f in self.factors:
            if f is not None and (not isinstance(f, int) or f < 2):
                raise InputError(f"finite factor order must be an integer >= 2, got {f!r}")
        if len(self.factors) > len(GEN_LETTERS):
            raise InputError("too many factors")
        for p in self.peripherals:
            if isinstance(p, bool) or not isinstance(p, (int, str)):
                raise InputError(f"peripheral must be a factor index or a word, got {p!r}")
            if isinstance(p, int):
                if not 0 <= p < len(self.factors):
                    raise InputError(f"peripheral factor index {p} out of range")
            else:
                letters = _parse_letters(p, len(self.factors))
                if not letters:
                    raise InputError("peripheral words must be nonempty")
                for s, t in zip(letters, letters[1:]):
                    if s == -t:
                        raise InputError(f"peripheral word {p!r} is not freely reduced")

    @classmethod
    def free(cls, rank: int, peripherals: Sequence[int | str] = ()) -> "PresentationSpec":
        return cls("free", (None,) * int(rank), tuple(peripherals))

    @classmethod
    def free_product(
        cls, factors: Sequence[int | None | str], peripherals: Sequence[int | str] = ()
    ) -> "PresentationSpec":
        facs = tuple(None if f in (None, "Z", "inf") else int(f) for f in factors)
        return cls("free_product", facs, tuple(peripherals))

    @property
    def rank(self) -> int:
        return len(self.factors)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "free":
            d["rank"] = self.rank
        else:
            d["factors"] = ["Z" if f is None else f for f in self.factors]
        d["peripherals"] = list(self.peripherals)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PresentationSpec":
        try:
            kind = d["kind"]
            if kind == "free":
                return cls.free(int(d["rank"]), d.get("peripherals", ()))
            return cls.free_product(d["factors"], d.get("peripherals", ()))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad presentation spec {d!r}: {exc}") from None


# -- normal forms ------------------------------------------------------------------


def _parse_letters(word: str, rank: int) -> list[int]:
    """Letters as signed 1-based generator indices."""
    if word in ("", IDENTITY_LABEL):
        return []
    out = []
    for ch in word:
        k = GEN_LETTERS.find(ch.lower())
        if k < 0 or k >= rank:
            raise InputError(f"letter {ch!r} is not a generator of a rank-{rank} presentation")
        out.append(k + 1 if ch.islower() else -(k + 1))
    return out


def _canon(e: int, order: int | None) -> int:
    if order is None:
        return e
    e %= order
    if e > order // 2:
        e -= order
    return e


def multiply_letter(spec: PresentationSpec, g: Element, letter: int) -> Element:
    """Right-multiply ``g`` by a generator (``letter`` > 0) or its inverse (< 0)."""
    k = abs(letter) - 1
    sign = 1 if letter > 0 else -1
    order = spec.factors[k]
    if g and g[-1][0] == k:
        e = _canon(g[-1][1] + sign, order)
        return g[:-1] if e == 0 else g[:-1] + ((k, e),)
    return g + ((k, _canon(sign, order)),)


def letters_of(g: Element) -> list[int]:
    out = []
    for k, e in g:
        out.extend([(k + 1) if e > 0 else -(k + 1)] * abs(e))
    return out


def multiply(spec: PresentationSpec, g: Element, h: Element) -> Element:
    for s in letters_of(h):
        g = multiply_letter(spec, g, s)
    return g


def inverse(spec: PresentationSpec, g: Element) -> Element:
    return tuple((k, _canon(-e, spec.factors[k])) for k, e in reversed(g))


def parse_word(spec: PresentationSpec, word: str) -> Element:
    g: Element = ()
    for s in _parse_letters(word, spec.rank):
        g = multiply_letter(spec, g, s)
    return g


def word_length(g: Element) -> int:
    return sum(abs(e) for _, e in g)


def element_label(g: Element) -> str:
    if not g:
        return IDENTITY_LABEL
    chars = []
    for k, e in g:
        ch = GEN_LETTERS[k]
        chars.append((ch if e > 0 else ch.upper()) * abs(e))
    return "".join(chars)


def _shortlex_key(g: Element) -> tuple:
    # a < A < b < B < ...
    return (word_length(g), tuple(2 * (abs(s) - 1) + (s < 0) for s in letters_of(g)))


def _generator_letters(spec: PresentationSpec) -> list[int]:
    out = []
    for k, order in enumerate(spec.factors):
        out.append(k + 1)
        if order != 2:
            out.append(-(k + 1))
    return out


# -- balls -------------------------------------------------------------------------


def cayley_ball(
    spec: PresentationSpec,
    radius: int,
    max_radius: int = MAX_RADIUS,
    max_vertices: int = MAX_VERTICES,
) -> WeightedGraph:
    """Ball of the given radius about the identity, with word labels.

    Vertices are ordered shortlex, so vertex 0 is the identity.
    """
    if radius < 1:
        raise InputError("radius must be >= 1")
    if radius > max_radius:
        raise ResourceError(f"radius {radius} exceeds the configured cap {max_radius}")
    gens = _generator_letters(spec)
    seen = {(): 0}
    frontier: list[Element] = [()]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for s in gens:
                h = multiply_letter(spec, g, s)
                if h not in seen:
                    seen[h] = 0
                    nxt.append(h)
        if len(seen) > max_vertices:
            raise ResourceError(f"ball exceeds {max_vertices} vertices")
        frontier = nxt
    elems = sorted(seen, key=_shortlex_key)
    index = {g: i for i, g in enumerate(elems)}
    edges = []
    for i, g in enumerate(elems):
        for s in gens:
            j = index.get(multiply_letter(spec, g, s))
            if j is not None and j > i:
                edges.append((i, j, 1.0))
    return WeightedGraph(len(elems), edges, [element_label(g) for g in elems])


def ball_elements(spec: PresentationSpec, ball: WeightedGraph) -> list[Element]:
    return [parse_word(spec, s) for s in ball.labels]


# -- peripheral structures ---------------------------------------------------------


@dataclass(frozen=True)
class PeripheralSet:
    """One peripheral subset of a base graph.

    ``group`` identifies the family (e.g. the subgroup whose coset this is);
    sets in the same family must be disjoint. ``None`` puts the set in a
    family of its own.
    """

    vertices: tuple[int, ...]
    group: int | None = None
    rep: str = ""

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted({int(v) for v in self.vertices})))


@dataclass(frozen=True)
class PeripheralStructure:
    sets: tuple[PeripheralSet, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i: int) -> PeripheralSet:
        return self.sets[i]

    @classmethod
    def from_sets(
        cls, sets: Iterable[Iterable[int]], groups: Sequence[int | None] | None = None
    ) -> "PeripheralStructure":
        sets = [tuple(s) for s in sets]
        groups = [None] * len(sets) if groups is None else list(groups)
        return cls(tuple(PeripheralSet(s, grp) for s, grp in zip(sets, groups)))


def _subgroup_generator(spec: PresentationSpec, p: int | str) -> Element:
    if isinstance(p, int):
        return ((p, 1),)
    return parse_word(spec, p)


def _powers(spec: PresentationSpec, h: Element, bound: int) -> list[Element]:
    """Powers ``h^j`` (both signs, including the identity) of length <= bound."""
    out: list[Element] = [()]
    for step in (h, inverse(spec, h)):
        cur = step
        while cur and word_length(cur) <= bound:
            out.append(cur)
            cur = multiply(spec, cur, step)
    return list(dict.fromkeys(out))


def enumerate_peripheral_cosets(
    ball: WeightedGraph,
    spec: PresentationSpec,
    max_cosets: int | None = None,
) -> PeripheralStructure:
    """Left cosets ``gH`` of each peripheral subgroup, intersected with the ball.

    Only cosets meeting the ball in at least two vertices are kept. Cosets are
    ordered by subgroup, then by their shortlex-minimal representative;
    ``max_cosets`` truncates each subgroup's list.
    """
    if ball.labels is None:
        raise InputError("ball must carry word labels")
    elems = ball_elements(spec, ball)
    radius = max(word_length(g) for g in elems)
    index = {g: i for i, g in enumerate(elems)}
    out = []
    for gi, p in enumerate(spec.peripherals):
        h = _subgroup_generator(spec, p)
        powers = _powers(spec, h, 2 * radius)
        assigned = [False] * len(elems)
        kept = 0
        for v, g in enumerate(elems):
            if assigned[v]:
                continue
            orbit = set()
            for hp in powers:
                j = index.get(multiply(spec, g, hp))
                if j is not None:
                    orbit.add(j)
            for j in orbit:
                assigned[j] = True
            if len(orbit) < 2:
                continue
            if max_cosets is not None and kept >= max_cosets:
                continue
            out.append(PeripheralSet(tuple(orbit), gi, ball.labels[min(orbit)]))
            kept += 1
    return PeripheralStructure(tuple(out))
