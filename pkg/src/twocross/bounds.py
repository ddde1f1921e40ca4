"""Certified lower bounds on the 2-coloured crossing number.

For a fixed drawing, every odd cycle of the intersection graph contains at
least one monochromatic crossing under any colouring.  Crossing-disjoint
odd cycles therefore add up (a packing), and the 0/1 program "pick a set of
crossings hitting every odd cycle, minimise its size" bounds the optimum
from below; with *all* odd cycles it is exact.

Closed-form bounds for complete graphs live at the bottom of the module.
"""
from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import BudgetExceeded, EmptyFamily, ParseError
from .geometry import IntersectionGraph


@dataclass
class OddCycleFamily:
    """Odd cycles of an intersection graph, as vertex (= drawing edge) sequences."""

    cycles: list[tuple[int, ...]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def crossing_sets(self, G: IntersectionGraph) -> list[tuple[int, ...]]:
        """Crossing indices used by each cycle, sorted."""
        return [cycle_crossings(G, c) for c in self.cycles]

    def validate(self, G: IntersectionGraph) -> None:
        nbrs = G.neighbor_sets
        for c in self.cycles:
            L = len(c)
            if L < 3 or L % 2 == 0:
                raise ValueError(f"cycle {c} does not have odd length >= 3")
            if len(set(c)) != L:
                raise ValueError(f"cycle {c} repeats a vertex")
            for i in range(L):
                if c[(i + 1) % L] not in nbrs[c[i]]:
                    raise ValueError(f"cycle {c} uses a non-edge")


def cycle_crossings(G: IntersectionGraph, cyc: Sequence[int]) -> tuple[int, ...]:
    L = len(cyc)
    return tuple(sorted(G.crossing_index(cyc[i], cyc[(i + 1) % L]) for i in range(L)))


def canonical_cycle(cyc: Sequence[int]) -> tuple[int, ...]:
    """Rotate to start at the smallest vertex, oriented so the 2nd vertex < last."""
    L = len(cyc)
    k = min(range(L), key=lambda i: cyc[i])
    rot = tuple(cyc[(k + i) % L] for i in range(L))
    if rot[1] > rot[-1]:
        rot = (rot[0],) + tuple(reversed(rot[1:]))
    return rot


def enumerate_odd_cycles(G: IntersectionGraph, max_len: int = 5) -> OddCycleFamily:
    """All chordless odd cycles with at most ``max_len`` vertices, each once."""
    if max_len < 3 or max_len % 2 == 0:
        raise ValueError("max_len must be an odd integer >= 3")
    nbrs = G.neighbor_sets
    adj = G.adjacency
    found: list[tuple[int, ...]] = []

    def extend(path, blocked):
        s, last = path[0], path[-1]
        L = len(path)
        for v in adj[last]:
            if v <= s or v in path or v in blocked:
                continue
            if s in nbrs[v]:
                # closing edge: chordless cycle of length L+1
                if (L + 1) % 2 == 1 and L >= 2 and path[1] < v:
                    found.append(tuple(path) + (v,))
                continue
            if L + 1 < max_len:
                # v must not see interior vertices (chords)
                extend(path + [v], blocked | (nbrs[last] - {v}))

    for s in range(G.n_vertices):
        for a in adj[s]:
            if a > s:
                extend([s, a], frozenset())
    found.sort(key=lambda c: (len(c), c))
    return OddCycleFamily(found)


@dataclass
class LowerBoundCertificate:
    value: int
    kind: str  # "packing" | "ilp" | "lp-relaxation"
    witness: list[tuple[int, ...]]
    family: OddCycleFamily | None = None
    objective: Fraction | int | None = None
    solution: tuple[int, ...] = ()
    nodes: int = 0
    exact: bool = False

    def __repr__(self) -> str:
        return f"LowerBoundCertificate(value={self.value}, kind={self.kind!r}, cycles={len(self.witness)})"


def cycle_packing_bound(G: IntersectionGraph, family: OddCycleFamily) -> LowerBoundCertificate:
    """Greedy crossing-disjoint packing; shorter cycles are tried first."""
    used: set[int] = set()
    chosen = []
    for cyc, cr in sorted(zip(family.cycles, family.crossing_sets(G)), key=lambda t: (len(t[0]), t[0])):
        if used.isdisjoint(cr):
            used.update(cr)
            chosen.append(cyc)
    return LowerBoundCertificate(len(chosen), "packing", chosen, family, len(chosen))


def verify_packing(G: IntersectionGraph, cert: LowerBoundCertificate) -> bool:
    OddCycleFamily(list(cert.witness)).validate(G)
    seen: set[int] = set()
    for cyc in cert.witness:
        cr = set(cycle_crossings(G, cyc))
        if seen & cr:
            return False
        seen |= cr
    return len(cert.witness) == cert.value


def odd_cycle_forces_mono(length: int) -> bool:
    """Brute force: no 2-colouring of a cycle of this length avoids equal neighbours."""
    for mask in range(1 << length):
        bits = [(mask >> i) & 1 for i in range(length)]
        if all(bits[i] != bits[(i + 1) % length] for i in range(length)):
            return False
    return True


# -- covering program -----------------------------------------------------

def _greedy_packing(order) -> int:
    used: set[int] = set()
    k = 0
    for s in order:
        if used.isdisjoint(s):
            used |= s
            k += 1
    return k


def _integral_packing(sets: list[frozenset]) -> int:
    """Greedy disjoint sets; a valid lower bound on any hitting set.

    Two orders are tried: shortest first, and least-shared crossings first.
    """
    freq: dict[int, int] = {}
    for s in sets:
        for v in s:
            freq[v] = freq.get(v, 0) + 1
    a = _greedy_packing(sorted(sets, key=len))
    b = _greedy_packing(sorted(sets, key=lambda s: sum(freq[v] for v in s)))
    return max(a, b)


def _relaxation_bound(sets: list[frozenset]) -> int:
    return _integral_packing(sets) if sets else 0


def _solve_hitting_set(sets: list[frozenset], budget: int, upper: int | None = None, floor: int = 0):
    """Minimum hitting set by branch and bound.

    Returns ``(value, chosen, nodes, proven_lower)``; ``value`` is None if the
    budget ran out before any bound closed the gap.
    """
    sets = sorted(set(sets), key=lambda s: (len(s), sorted(s)))
    best = [upper if upper is not None else math.inf, None]
    nodes = [0]
    # floor: any externally known lower bound (e.g. a cycle packing)
    root = max(_relaxation_bound(sets), floor)

    def rec(chosen: list[int], forbidden: frozenset, open_sets: list[frozenset]):
        nodes[0] += 1
        if nodes[0] > budget:
            raise _Stop
        reduced = []
        for s in open_sets:
            avail = s - forbidden
            if not avail:
                return
            reduced.append(avail)
        if not reduced:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if len(chosen) + _relaxation_bound(reduced) >= best[0]:
            return
        pivot = min(reduced, key=len)
        # most frequent crossings first
        freq: dict[int, int] = {}
        for s in reduced:
            for v in s:
                freq[v] = freq.get(v, 0) + 1
        cand = sorted(pivot, key=lambda v: (-freq[v], v))
        forb = forbidden
        for v in cand:
            chosen.append(v)
            rec(chosen, forb, [s for s in reduced if v not in s])
            chosen.pop()
            forb = forb | {v}
            if best[0] <= root:
                return

    try:
        rec([], frozenset(), sets)
    except _Stop:
        return None, best[1], nodes[0], root
    return best[0], best[1], nodes[0], best[0]


class _Stop(Exception):
    pass


def _solve_hitting_set_highs(sets: list[frozenset], n_vars: int, budget: int):
    """Same contract as the branch and bound, solved by HiGHS through scipy.

    The value is only trusted after the cover is re-checked exactly and the
    solver's dual bound rounds up to it.
    """
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    A = lil_matrix((len(sets), n_vars))
    for r, s in enumerate(sets):
        for v in s:
            A[r, v] = 1
    res = milp(np.ones(n_vars), integrality=np.ones(n_vars), bounds=Bounds(0, 1),
               constraints=LinearConstraint(A.tocsr(), lb=1),
               options={"node_limit": max(1, budget), "mip_rel_gap": 0})
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    dual = getattr(res, "mip_dual_bound", None)
    lower = math.ceil(dual - 1e-6) if dual is not None and math.isfinite(dual) else 0
    if res.x is None:
        return None, None, nodes, lower
    chosen = [v for v in range(n_vars) if res.x[v] > 0.5]
    picked = set(chosen)
    if any(picked.isdisjoint(s) for s in sets):
        raise RuntimeError("solver returned a set that does not hit every cycle")
    if res.status != 0 or lower < len(chosen):
        return None, chosen, nodes, lower
    return len(chosen), chosen, nodes, lower


def solve_covering_ilp(G: IntersectionGraph, family: OddCycleFamily,
                       budget: int = 200_000, upper: int | None = None,
                       method: str = "highs") -> LowerBoundCertificate:
    """Optimum of the odd-cycle covering program over ``family``.

    One binary per crossing, one "at least one" constraint per cycle.  On
    budget exhaustion the certificate degrades to the proven bound with kind
    ``lp-relaxation``.

    ``method`` is ``"highs"`` (scipy's MILP solver) or ``"bb"``, the in-house
    branch and bound.  ``upper`` is a known achievable mono count; the
    branch and bound then only looks for covers strictly smaller than it,
    and if none exists the certificate has value ``upper`` and an empty
    solution.
    """
    if len(family) == 0:
        raise EmptyFamily("covering program needs at least one cycle")
    if method not in ("highs", "bb"):
        raise ValueError(f"unknown method {method!r}")
    sets = [frozenset(s) for s in family.crossing_sets(G)]
    floor = cycle_packing_bound(G, family).value
    if method == "highs":
        value, chosen, nodes, lower = _solve_hitting_set_highs(sets, G.n_crossings, budget)
        lower = max(lower, floor)
        if value is not None and upper is not None and value >= upper:
            return LowerBoundCertificate(int(upper), "ilp", list(family.cycles), family,
                                         int(upper), (), nodes, exact=True)
    else:
        value, chosen, nodes, lower = _solve_hitting_set(sets, budget, upper, floor)
        if value is not None and chosen is None:
            # nothing below the incumbent: optimum >= upper
            return LowerBoundCertificate(int(value), "ilp", list(family.cycles), family,
                                         int(value), (), nodes, exact=True)
    if value is None:
        return LowerBoundCertificate(int(lower), "lp-relaxation", [], family,
                                     int(lower), (), nodes)
    return LowerBoundCertificate(int(value), "ilp", list(family.cycles), family,
                                 int(value), tuple(sorted(chosen)), nodes)


def _shortest_odd_cycle(adj, removed: set[tuple[int, int]]):
    """An odd cycle of the graph minus ``removed`` edges, or None if bipartite.

    BFS 2-colouring per component; a conflict edge (u, v) closes an odd cycle
    through the BFS tree.
    """
    n = len(adj)
    side = [-1] * n
    parent = [-1] * n
    best = None
    for s in range(n):
        if side[s] >= 0:
            continue
        side[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if (min(u, v), max(u, v)) in removed:
                    continue
                if side[v] < 0:
                    side[v] = 1 - side[u]
                    parent[v] = u
                    dq.append(v)
                elif side[v] == side[u]:
                    cyc = _tree_cycle(parent, u, v)
                    if best is None or len(cyc) < len(best):
                        best = cyc
                        if len(best) == 3:
                            return best
    return best


def _tree_cycle(parent, u, v):
    pu, pv = [u], [v]
    anc = {u: 0}
    x = u
    while parent[x] >= 0:
        x = parent[x]
        anc[x] = len(pu)
        pu.append(x)
    y = v
    while y not in anc:
        y = parent[y]
        pv.append(y)
    lca = y
    path_u = pu[: anc[lca] + 1]
    path_v = pv[:-1]
    return tuple(path_u + list(reversed(path_v)))


def certify_lower_bound(G: IntersectionGraph, max_len: int = 5, budget: int = 200_000,
                        rounds: int = 200, upper: int | None = None,
                        method: str = "highs") -> LowerBoundCertificate:
    """Covering program with lazily added odd cycles.

    Starts from the chordless cycles up to ``max_len``; after each solve,
    deletes the chosen crossings and looks for a surviving odd cycle.  If the
    remainder is bipartite the value is exact (the bipartition is a colouring
    attaining it).  Otherwise the cycle joins the family and we resolve.
    ``budget`` is the node allowance for all rounds together.
    """
    fam = enumerate_odd_cycles(G, max_len)
    if G.n_crossings == 0:
        return LowerBoundCertificate(0, "ilp", [], fam, 0, exact=True)
    pairs = [tuple(p) for p in G.pairs.tolist()]
    cycles = list(fam.cycles)
    seen = set(cycles)
    if not cycles:
        oc = _shortest_odd_cycle(G.adjacency, set())
        if oc is None:
            return LowerBoundCertificate(0, "ilp", [], fam, 0, exact=True)
        cycles.append(canonical_cycle(oc))
        seen.add(cycles[-1])
    cert = None
    spent = 0
    for _ in range(rounds):
        family = OddCycleFamily(cycles)
        cert = solve_covering_ilp(G, family, max(0, budget - spent), upper, method)
        spent += cert.nodes
        cert.nodes = spent
        if cert.kind != "ilp" or cert.exact:
            return cert
        removed = {pairs[k] for k in cert.solution}
        oc = _shortest_odd_cycle(G.adjacency, removed)
        if oc is None:
            cert.exact = True
            return cert
        c = canonical_cycle(oc)
        if c in seen:
            break
        cycles.append(c)
        seen.add(c)
    return cert


# -- LP text format ---------------------------------------------------------

def export_covering_ilp(G: IntersectionGraph, family: OddCycleFamily, path) -> Path:
    """Write the covering program in CPLEX-LP style text."""
    if len(family) == 0:
        raise EmptyFamily("covering program needs at least one cycle")
    path = Path(path)
    names = [f"x{k}" for k in range(G.n_crossings)]
    lines = ["Minimize", "obj: " + " + ".join(names), "Subject To"]
    for k, cr in enumerate(family.crossing_sets(G)):
        lines.append(f"c{k}: " + " + ".join(f"x{i}" for i in cr) + " >= 1")
    lines.append("Binary")
    lines.extend(f" {x}" for x in names)
    lines.append("End")
    path.write_text("\n".join(lines) + "\n")
    return path


_ROW = re.compile(r"^c(\d+):\s*(.+?)\s*>=\s*1\s*$")


def parse_covering_lp(path) -> tuple[int, list[tuple[int, ...]]]:
    """Read back ``(n_variables, rows)`` from an exported program."""
    text = Path(path).read_text().splitlines()
    section = None
    rows: list[tuple[int, ...]] = []
    binaries: list[int] = []
    for ln, raw in enumerate(text, 1):
        line = raw.strip()
        if not line:
            continue
        if line in ("Minimize", "Subject To", "Binary", "End"):
            section = line
            continue
        if section == "Minimize":
            if not line.startswith("obj:"):
                raise ParseError("expected objective", ln)
        elif section == "Subject To":
            m = _ROW.match(line)
            if not m:
                raise ParseError(f"bad constraint {line!r}", ln)
            rows.append(tuple(int(t.strip()[1:]) for t in m.group(2).split("+")))
        elif section == "Binary":
            binaries.append(int(line[1:]))
        else:
            raise ParseError(f"unexpected line {line!r}", ln)
    return len(binaries), rows


# -- closed forms for complete graphs ----------------------------------------

def lemma1_constant(m: int, c_hat: int) -> Fraction:
    """Asymptotic density bound implied by ``c_hat`` forced crossings on every ``m`` points."""
    if m < 4 or c_hat < 0:
        raise ValueError("need m >= 4 and c_hat >= 0")
    return Fraction(24 * c_hat, m * (m - 1) * (m - 2) * (m - 3))


def lemma1_bound(m: int, c_hat: int, n: int) -> Fraction:
    """Averaging bound ``24 c_hat / (m)_4 * C(n, 4)`` for ``n > m``."""
    if n <= m:
        raise ValueError("need n > m")
    return lemma1_constant(m, c_hat) * math.comb(n, 4)


def crossing_lemma_constant() -> tuple[Fraction, list[str]]:
    """The constant 3/116 from the crossing lemma ``cr >= e^3 / (29 n^2)``.

    The edges of K_n split into two colour classes with e1 + e2 = C(n, 2);
    by convexity e1^3 + e2^3 >= 2 (C(n,2)/2)^3 ~ n^6 / 32, so each drawing has
    at least n^4 / (29 * 32) monochromatic crossings, i.e. a fraction
    24 / (29 * 32) of C(n, 4) ~ n^4 / 24.
    """
    const = Fraction(24, 29 * 32)
    trace = [
        "e1 + e2 = C(n,2) ~ n^2/2",
        "mono >= e1^3/(29 n^2) + e2^3/(29 n^2)",
        ">= 2 (n^2/4)^3 / (29 n^2) = n^4 / (32*29)",
        "C(n,4) ~ n^4/24  =>  constant = 24/(29*32) = 3/116",
    ]
    return const, trace
