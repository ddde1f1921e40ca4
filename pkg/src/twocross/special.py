"""Named drawings with known crossing behaviour: convex position and the double chain."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coloring import BLUE, RED, best_coloring, exact_cr2
from .errors import BudgetExceeded
from .geometry import Drawing


def convex_drawing(n: int) -> Drawing:
    """Complete drawing on the integer parabola points ``(i, i^2)``."""
    if n < 3:
        raise ValueError(f"convex drawing needs n >= 3, got {n}")
    return Drawing([(i, i * i) for i in range(n)])


def two_page_optimum(n: int) -> int:
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    num = (n // 2) * ((n - 1) // 2) * ((n - 2) // 2) * ((n - 3) // 2)
    return num // 4


@dataclass(frozen=True)
class DoubleChain:
    """Upper chain ``0..n-1`` and lower chain ``n..2n-1``, both left to right."""

    n: int
    drawing: Drawing = field(repr=False)
    height: int

    def upper(self, i: int) -> int:
        return i

    def lower(self, j: int) -> int:
        return self.n + j


def _chain_points(n: int, h: int):
    # the upper chain bends down towards the lower one and vice versa
    up = [(x, h + x * x) for x in range(n)]
    lo = [(x, -h - x * x) for x in range(n)]
    return up + lo


def _convex4(T, a, b, c, d) -> bool:
    """Four points in convex position iff no one lies inside the triangle of the others."""
    quad = (a, b, c, d)
    for k in range(4):
        x = quad[k]
        u, v, w = (quad[i] for i in range(4) if i != k)
        s = T[u, v, w]
        if T[u, v, x] == s and T[v, w, x] == s and T[w, u, x] == s:
            return False
    return True


def check_double_chain(D: Drawing, n: int) -> list[str]:
    """Exhaustive check of the two defining conditions; returns the violations."""
    T = D.orientation_table
    chains = (list(range(n)), list(range(n, 2 * n)))
    bad = []
    for side in (0, 1):
        mine, other = chains[side], chains[1 - side]
        for i in range(n - 1):
            for j in range(n - 1):
                q = (mine[i], mine[i + 1], other[j], other[j + 1])
                if not _convex4(T, *q):
                    bad.append(f"successive pairs {q} not in convex position")
        for i in range(n - 2):
            for r in other:
                q = (mine[i], mine[i + 1], mine[i + 2], r)
                if _convex4(T, *q):
                    bad.append(f"{q} in convex position")
    return bad


def double_chain(n: int) -> DoubleChain:
    """(n, n)-double chain with edges only between the chains.

    The chain height starts at ``4 n^3`` and doubles until the exhaustive
    condition check passes; the crossing count is then checked against
    ``C(n, 2)^2``.
    """
    if n < 2:
        raise ValueError(f"double chain needs n >= 2, got {n}")
    edges = [(i, n + j) for i in range(n) for j in range(n)]
    h = 4 * n ** 3
    for _ in range(20):
        D = Drawing(_chain_points(n, h), edges)
        if not check_double_chain(D, n):
            break
        h *= 2
    else:
        raise RuntimeError(f"no valid double chain found for n={n}")
    cr = D.crossing_count()
    if cr != math.comb(n, 2) ** 2:
        raise RuntimeError(f"double chain n={n} has {cr} crossings, expected {math.comb(n, 2) ** 2}")
    return DoubleChain(n, D, h)


def double_chain_coloring(dc: DoubleChain) -> np.ndarray:
    """Edge (upper i, lower j) is blue if i < j, red otherwise (ties red)."""
    col = np.empty(dc.drawing.n_edges, dtype=np.uint8)
    for k, (a, b) in enumerate(dc.drawing.edges):
        i, j = a, b - dc.n
        col[k] = BLUE if i < j else RED
    return col


@dataclass
class RatioReport:
    cr: int
    cr2_best: int
    ratio: Fraction
    exact: bool
    method: str
    flags: tuple[str, ...] = ()


def ratio_report(D: Drawing, effort: int = 200_000, seed: int = 0) -> RatioReport:
    """``cr2 / cr`` with the exact optimum when the node budget allows it."""
    cr = D.crossing_count()
    if cr == 0:
        return RatioReport(0, 0, Fraction(0), True, "trivial", ("no-crossings",))
    heur = best_coloring(D, seed=seed)
    try:
        val, _ = exact_cr2(D, budget=effort, upper=heur)
        return RatioReport(cr, val, Fraction(val, cr), True, "exact")
    except BudgetExceeded:
        return RatioReport(cr, heur.mono_count, Fraction(heur.mono_count, cr), False,
                           heur.method, ("heuristic-upper-bound",))
