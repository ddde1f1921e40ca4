"""2-edge-colourings and monochromatic crossing minimisation.

A colouring is a ``uint8`` numpy array over canonical edge indices with
``RED = 0`` and ``BLUE = 1``.  Minimising monochromatic crossings is a
max-cut on the intersection graph; the heuristics here work on adjacency
lists with an incrementally maintained "same colour neighbours" count so a
flip is evaluated in O(1).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import BudgetExceeded
from .geometry import Drawing, IntersectionGraph

RED, BLUE = 0, 1


class Color(IntEnum):
    RED = 0
    BLUE = 1

    @property
    def char(self) -> str:
        return "RB"[self]


def graph_of(D: Drawing) -> IntersectionGraph:
    """Intersection graph of ``D``, memoised on the drawing."""
    G = D.__dict__.get("_igraph")
    if G is None:
        G = IntersectionGraph.of(D)
        D.__dict__["_igraph"] = G
    return G


def as_coloring(colors, n_edges: int | None = None) -> np.ndarray:
    if isinstance(colors, str):
        bad = set(colors) - {"R", "B"}
        if bad:
            raise ValueError(f"illegal colour characters {sorted(bad)}")
        arr = np.array([BLUE if c == "B" else RED for c in colors], dtype=np.uint8)
    else:
        arr = np.asarray(colors, dtype=np.uint8)
    if arr.ndim != 1 or (len(arr) and arr.max() > 1):
        raise ValueError("colouring must be a flat sequence of 0/1 values")
    if n_edges is not None and len(arr) != n_edges:
        raise ValueError(f"colouring has {len(arr)} entries, drawing has {n_edges} edges")
    return arr


def coloring_str(colors) -> str:
    return "".join("RB"[int(c)] for c in colors)


@dataclass
class ColoringResult:
    coloring: np.ndarray
    mono_count: int
    method: str
    seed: int
    restarts_used: int = 1
    extra: dict = field(default_factory=dict)

    def __repr__(self) -> str:
        return (f"ColoringResult(mono_count={self.mono_count}, method={self.method!r}, "
                f"seed={self.seed}, restarts_used={self.restarts_used})")


def mono_crossings(D: Drawing, colors) -> int:
    """Number of crossing pairs of ``D`` whose edges share a colour."""
    c = as_coloring(colors, D.n_edges)
    cached = D.__dict__.get("_crossings")
    chunks = [cached] if cached is not None else D.iter_crossing_chunks()
    total = 0
    for arr in chunks:
        total += int(np.count_nonzero(c[arr[:, 0]] == c[arr[:, 1]]))
    return total


def _same_counts(adj, col) -> list[int]:
    return [sum(1 for u in nb if col[u] == col[v]) for v, nb in enumerate(adj)]


def _mono_from_same(same) -> int:
    return sum(same) // 2


def _flip(adj, col, same, v) -> None:
    cv = col[v]
    for u in adj[v]:
        if col[u] == cv:
            same[u] -= 1
        else:
            same[u] += 1
    same[v] = len(adj[v]) - same[v]
    col[v] = 1 - cv


def _descend(adj, col, same) -> None:
    """First-improvement single-flip descent, scanning edges in index order."""
    m = len(adj)
    improved = True
    while improved:
        improved = False
        for v in range(m):
            if 2 * same[v] > len(adj[v]):
                _flip(adj, col, same, v)
                improved = True


def _random_colors(m: int, rng: random.Random) -> list[int]:
    return [rng.getrandbits(1) for _ in range(m)]


def _trivial(D: Drawing, method: str, seed: int) -> ColoringResult:
    return ColoringResult(np.zeros(D.n_edges, dtype=np.uint8), 0, method, seed, 0)


def local_search(D: Drawing, seed: int = 0, restarts: int = 1, initial=None) -> ColoringResult:
    """Multi-restart single-flip local search.

    Restart ``r`` starts from a uniformly random colouring drawn with seed
    ``seed + r`` (or from ``initial`` for the first restart when given).
    The lowest mono count wins, ties going to the lowest seed.  Every result
    is a local optimum: no single flip decreases the count.
    """
    G = graph_of(D)
    if G.n_crossings == 0:
        return _trivial(D, "local-search", seed)
    adj = G.adjacency
    best = None
    for r in range(max(1, restarts)):
        if r == 0 and initial is not None:
            col = [int(c) for c in as_coloring(initial, D.n_edges)]
        else:
            col = _random_colors(D.n_edges, random.Random(seed + r))
        same = _same_counts(adj, col)
        _descend(adj, col, same)
        val = _mono_from_same(same)
        if best is None or val < best[0]:
            best = (val, col, seed + r)
        if val == 0:
            break
    val, col, s = best
    return ColoringResult(np.array(col, dtype=np.uint8), val, "local-search", s, r + 1)


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling.  ``start=None`` means crossing count / 10."""

    start: float | None = None
    factor: float = 0.995
    stop: float = 0.05
    max_sweeps: int = 20_000


def _anneal_once(adj, n_crossings, rng, schedule: AnnealSchedule, col=None):
    m = len(adj)
    if col is None:
        col = _random_colors(m, rng)
    start = col[:]
    same = _same_counts(adj, col)
    cur = _mono_from_same(same)
    best_val, best_col = cur, col[:]
    T = schedule.start if schedule.start is not None else n_crossings / 10
    T = max(T, schedule.stop * 1.0001)
    rand = rng.random
    exp = math.exp
    sweeps = 0
    while T > schedule.stop and sweeps < schedule.max_sweeps:
        for v in range(m):
            delta = len(adj[v]) - 2 * same[v]
            if delta <= 0 or rand() < exp(-delta / T):
                _flip(adj, col, same, v)
                cur += delta
                if cur < best_val:
                    best_val, best_col = cur, col[:]
        if best_val == 0:
            break
        T *= schedule.factor
        sweeps += 1
    # polish the final state, the best state seen and the start; the last
    # one is exactly what local search from the same start would return
    out = []
    for c in (col, best_col, start):
        c = c[:]
        s = _same_counts(adj, c)
        _descend(adj, c, s)
        out.append((_mono_from_same(s), c))
    return min(out, key=lambda t: t[0]), sweeps


def anneal(D: Drawing, seed: int = 0, schedule: AnnealSchedule | None = None,
           restarts: int = 1, initial=None) -> ColoringResult:
    """Simulated annealing over single-edge flips, finished by local search.

    One sweep proposes a flip of every edge in canonical order.  Restart
    ``r`` uses its own generator seeded with ``seed + r``; its initial
    colouring is random unless ``initial`` is given (first restart only).
    """
    G = graph_of(D)
    if G.n_crossings == 0:
        return _trivial(D, "annealing", seed)
    schedule = schedule or AnnealSchedule()
    best = None
    for r in range(max(1, restarts)):
        rng = random.Random(seed + r)
        start = None
        if r == 0 and initial is not None:
            start = [int(c) for c in as_coloring(initial, D.n_edges)]
        (val, col), _ = _anneal_once(G.adjacency, G.n_crossings, rng, schedule, start)
        if best is None or val < best[0]:
            best = (val, col, seed + r)
        if val == 0:
            break
    val, col, s = best
    return ColoringResult(np.array(col, dtype=np.uint8), val, "annealing", s, r + 1)


def random_coloring(D: Drawing, seed: int = 0) -> ColoringResult:
    """Each edge red or blue by an independent fair coin."""
    rng = np.random.default_rng(seed)
    col = rng.integers(0, 2, size=D.n_edges, dtype=np.uint8)
    return ColoringResult(col, mono_crossings(D, col), "random", seed, 1)


def best_coloring(D: Drawing, seed: int = 0, restarts: int = 8,
                  schedule: AnnealSchedule | None = None, initial=None) -> ColoringResult:
    """Default heuristic: annealing restarts, seeded with a local-search pass."""
    ls = local_search(D, seed, restarts=max(1, restarts), initial=initial)
    if ls.mono_count == 0:
        return ls
    an = anneal(D, seed, schedule, restarts=restarts, initial=ls.coloring)
    return an if an.mono_count < ls.mono_count else ls


# -- exact branch and bound ---------------------------------------------------

def _packing_by_depth(G: IntersectionGraph, order_pos, max_cycle_len: int) -> list[int]:
    """``pack[d]`` = greedy crossing-disjoint packing of odd cycles lying
    entirely on edges at branching depth >= d."""
    from .bounds import enumerate_odd_cycles

    m = G.n_vertices
    fam = enumerate_odd_cycles(G, max_cycle_len).cycles
    keyed = []
    for cyc in fam:
        cr = frozenset(G.crossing_index(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc)))
        keyed.append((min(order_pos[v] for v in cyc), len(cyc), cyc, cr))
    keyed.sort(key=lambda t: (-t[0], t[1], t[2]))
    pack = [0] * (m + 2)
    used: set[int] = set()
    count = 0
    k = 0
    # packing grows as d decreases; greedy is extended incrementally
    for d in range(m, -1, -1):
        while k < len(keyed) and keyed[k][0] >= d:
            cr = keyed[k][3]
            if used.isdisjoint(cr):
                used |= cr
                count += 1
            k += 1
        pack[d] = count
    return pack


def exact_cr2(D: Drawing, budget: int = 5_000_000, max_cycle_len: int = 5,
              upper: ColoringResult | None = None):
    """Minimum monochromatic crossings over all 2-colourings of ``D``.

    Branch and bound over edge colours.  Edges are branched on in order of
    decreasing crossing degree; the first one is fixed red.  The bound at a
    node adds, to the monochromatic crossings already fixed, the unavoidable
    ones between each open edge and the coloured edges it crosses, plus an
    odd-cycle packing on the all-open part.

    Returns ``(value, coloring)``.  Raises :class:`BudgetExceeded` once
    ``budget`` nodes have been expanded without a proof.
    """
    G = graph_of(D)
    m = D.n_edges
    if G.n_crossings == 0:
        return 0, np.zeros(m, dtype=np.uint8)
    adj = G.adjacency
    if upper is None:
        upper = best_coloring(D, seed=0, restarts=4)
    best_val = upper.mono_count
    best_col = [int(c) for c in upper.coloring]

    order = sorted(range(m), key=lambda v: (-len(adj[v]), v))
    pos = [0] * m
    for i, v in enumerate(order):
        pos[v] = i
    pack = _packing_by_depth(G, pos, max_cycle_len)
    root_bound = pack[0]
    if best_val <= root_bound:
        return best_val, np.array(best_col, dtype=np.uint8)

    col = [-1] * m
    cnt = [[0, 0] for _ in range(m)]  # coloured neighbours per colour
    state = {"nodes": 0, "slack": 0, "cur": 0}

    def assign(v, c):
        cv = cnt[v]
        state["cur"] += cv[c]
        state["slack"] -= min(cv)
        col[v] = c
        for u in adj[v]:
            if col[u] < 0:
                cu = cnt[u]
                before = min(cu)
                cu[c] += 1
                state["slack"] += min(cu) - before
            else:
                cnt[u][c] += 1

    def unassign(v, c):
        col[v] = -1
        for u in adj[v]:
            cu = cnt[u]
            if col[u] < 0:
                before = min(cu)
                cu[c] -= 1
                state["slack"] += min(cu) - before
            else:
                cu[c] -= 1
        cv = cnt[v]
        state["slack"] += min(cv)
        state["cur"] -= cv[c]

    def search(depth):
        nonlocal best_val, best_col
        if depth == m:
            if state["cur"] < best_val:
                best_val = state["cur"]
                best_col = col[:]
            return
        state["nodes"] += 1
        if state["nodes"] > budget:
            raise _Stop
        v = order[depth]
        if depth == 0:
            choices = (RED,)
        else:
            r, b = cnt[v]
            choices = (RED, BLUE) if r <= b else (BLUE, RED)
        for c in choices:
            assign(v, c)
            if state["cur"] + state["slack"] + pack[depth + 1] < best_val:
                search(depth + 1)
            unassign(v, c)
            if best_val <= root_bound:
                return

    try:
        search(0)
    except _Stop:
        raise BudgetExceeded(root_bound, best_val,
                             np.array(best_col, dtype=np.uint8), state["nodes"]) from None
    return best_val, np.array(best_col, dtype=np.uint8)


class _Stop(Exception):
    pass
