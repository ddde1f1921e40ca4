"""Colour-halving edges and matchings.

At a point ``p`` of a complete drawing on an even number of points, the
incident edges split into a larger and a smaller colour class (the degree
is odd, so there is no tie).  An incident edge ``e = (p, q)`` is halving
when the larger class is split evenly, up to one, by the line through
``e`` directed from ``q`` to ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .coloring import as_coloring
from .errors import InvalidMatching, NotFound, OddCardinality, TieAtPoint
from .geometry import Drawing


class SideCounts(NamedTuple):
    L_l: int
    L_r: int
    S_l: int
    S_r: int


def _require_complete(D: Drawing) -> None:
    if not D.complete:
        raise ValueError("halving edges are defined on complete drawings")


def larger_class_at(D: Drawing, colors, p: int) -> tuple[int, int, int]:
    """``(larger colour, its size, smaller size)`` at point ``p``."""
    _require_complete(D)
    c = as_coloring(colors, D.n_edges)
    E = D.edge_index
    blue = sum(int(c[E[p, r]]) for r in range(D.n) if r != p)
    red = D.n - 1 - blue
    if red == blue:
        raise TieAtPoint(p, red)
    return (1, blue, red) if blue > red else (0, red, blue)


def side_counts(D: Drawing, colors, p: int, e: int) -> SideCounts:
    """Edges at ``p`` left/right of ``e`` directed towards ``p``, split by class.

    ``e`` itself is excluded, so the four counts add up to ``n - 2``.
    """
    _require_complete(D)
    i, j = D.edges[e]
    if p not in (i, j):
        raise ValueError(f"edge {e} = {(i, j)} is not incident to point {p}")
    q = j if p == i else i
    c = as_coloring(colors, D.n_edges)
    big, _, _ = larger_class_at(D, c, p)
    E = D.edge_index
    T = D.orientation_table
    counts = [0, 0, 0, 0]
    for r in range(D.n):
        if r == p or r == q:
            continue
        large = int(c[E[p, r]]) == big
        left = T[q, p, r] > 0
        counts[(0 if large else 2) + (0 if left else 1)] += 1
    return SideCounts(*counts)


def is_halving_edge(D: Drawing, colors, p: int, e: int) -> tuple[bool, SideCounts]:
    s = side_counts(D, colors, p, e)
    return abs(s.L_l - s.L_r) <= 1, s


def halving_candidates(D: Drawing, colors, p: int) -> list[int]:
    E = D.edge_index
    out = []
    for r in range(D.n):
        if r != p:
            e = int(E[p, r])
            if is_halving_edge(D, colors, p, e)[0]:
                out.append(e)
    return sorted(out)


@dataclass(frozen=True)
class HalvingMatching:
    """``match[p]`` is the canonical index of the halving edge assigned to point ``p``."""

    match: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.match)

    def __getitem__(self, p: int) -> int:
        return self.match[p]

    def partner(self, D: Drawing, p: int) -> int:
        i, j = D.edges[self.match[p]]
        return j if i == p else i


def check_matching(D: Drawing, colors, M: HalvingMatching) -> None:
    """Re-check a matching from scratch; raises :class:`InvalidMatching`."""
    if len(M.match) != D.n:
        raise InvalidMatching(f"matching covers {len(M.match)} of {D.n} points")
    if len(set(M.match)) != len(M.match):
        raise InvalidMatching("two points share a matched edge")
    for p, e in enumerate(M.match):
        if not (0 <= e < D.n_edges) or p not in D.edges[e]:
            raise InvalidMatching(f"edge {e} is not incident to point {p}")
        ok, s = is_halving_edge(D, colors, p, e)
        if not ok:
            raise InvalidMatching(f"edge {e} is not halving at point {p}: {tuple(s)}")


def _max_matching(cands: list[list[int]], fixed: dict[int, int] | None = None) -> dict[int, int]:
    """Augmenting-path (Kuhn) maximum matching, points -> edges."""
    owner: dict[int, int] = {}
    match: dict[int, int] = {}
    if fixed:
        for p, e in fixed.items():
            owner[e] = p
            match[p] = e

    def augment(p, seen):
        for e in cands[p]:
            if e in seen:
                continue
            seen.add(e)
            q = owner.get(e)
            if q is None or (q not in (fixed or {}) and augment(q, seen)):
                owner[e] = p
                match[p] = e
                return True
        return False

    for p in range(len(cands)):
        if p not in match:
            augment(p, set())
    return match


def find_halving_matching(D: Drawing, colors) -> HalvingMatching:
    """Lexicographically least perfect halving matching, or :class:`NotFound`.

    Points are fixed in index order, each to the smallest candidate edge
    that still leaves a perfect matching for the rest.
    """
    _require_complete(D)
    if D.n % 2:
        raise OddCardinality(f"halving matchings need an even number of points, got {D.n}")
    c = as_coloring(colors, D.n_edges)
    cands = [halving_candidates(D, c, p) for p in range(D.n)]
    best = _max_matching(cands)
    if len(best) < D.n:
        raise NotFound(len(best), D.n)
    fixed: dict[int, int] = {}
    for p in range(D.n):
        for e in cands[p]:
            if e in fixed.values():
                continue
            trial = dict(fixed)
            trial[p] = e
            if len(_max_matching(cands, trial)) == D.n:
                fixed = trial
                break
    return HalvingMatching(tuple(fixed[p] for p in range(D.n)))
