"""Search loop for good seeds: improve, enlarge by duplication, extract subsets.

Each round
  1. perturbs single points on an integer grid and re-optimises the colouring,
     keeping a move when the monochromatic count does not go up,
  2. duplicates the drawing geometrically when it has an even number of points
     and a halving matching,
  3. deletes points greedily from the duplicate back to ``target_n``, always
     removing the point whose deletion leaves the fewest monochromatic
     crossings after re-optimisation.

Two best-so-far values are tracked: the smallest crossing constant over all
members that admit a halving matching, and the smallest monochromatic count
seen at ``target_n`` points.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coloring import ColoringResult, as_coloring, best_coloring, local_search, mono_crossings
from .duplication import constant_from_coefficients, geometric_duplicate, solve_coefficients
from .errors import GeneralPositionError, NotFound, OddCardinality, TieAtPoint
from .geometry import Drawing
from .halving import HalvingMatching, check_matching, find_halving_matching
from .io import snap_to_grid

log = logging.getLogger(__name__)


@dataclass
class Member:
    drawing: Drawing
    coloring: np.ndarray
    cr2: int
    matching: HalvingMatching | None = None
    constant: Fraction | None = None


@dataclass
class PipelineResult:
    best: Member | None  # lowest constant among members with a matching
    best_at_target: Member
    target_n: int
    history: list = field(default_factory=list)  # best constant after each round
    warnings: list = field(default_factory=list)
    rounds: int = 0

    @property
    def constant(self) -> Fraction | None:
        return self.best.constant if self.best else None


def restrict_coloring(D: Drawing, colors, keep) -> np.ndarray:
    """Colours of the edges induced by ``keep``, in the subdrawing's edge order."""
    c = as_coloring(colors, D.n_edges)
    E = D.edge_index
    sub = []
    for a in range(len(keep)):
        for b in range(a + 1, len(keep)):
            sub.append(c[E[keep[a], keep[b]]])
    return np.array(sub, dtype=np.uint8)


def evaluate(D: Drawing, colors, matching: HalvingMatching | None = None,
             warnings: list | None = None) -> Member:
    """Member record; the constant is filled in when a halving matching exists."""
    c = as_coloring(colors, D.n_edges)
    mem = Member(D, c, mono_crossings(D, c))
    try:
        if matching is not None:
            check_matching(D, c, matching)
            M = matching
        else:
            M = find_halving_matching(D, c)
    except (NotFound, OddCardinality, TieAtPoint) as exc:
        msg = f"n={D.n}: no constant ({exc})"
        log.info(msg)
        if warnings is not None:
            warnings.append(msg)
        return mem
    mem.matching = M
    mem.constant = constant_from_coefficients(solve_coefficients(D, c, M))
    return mem


def _constant_or_none(D: Drawing, colors) -> Fraction | None:
    try:
        M = find_halving_matching(D, colors)
    except (NotFound, OddCardinality, TieAtPoint):
        return None
    return constant_from_coefficients(solve_coefficients(D, colors, M))


def improve(D: Drawing, colors, iters: int, rng: random.Random, grid: int = 1 << 12,
            seed: int = 0) -> tuple[Drawing, ColoringResult]:
    """Step 1: single-point perturbations, accepting moves that do not increase cr2.

    Among moves of equal cr2, one whose crossing constant is not worse (or
    whose predecessor had none) is preferred; others are still accepted
    with probability 1/2 so the walk can leave a plateau.
    """
    D = snap_to_grid(D, grid)
    span = max(max(abs(p.x), abs(p.y)) for p in D.points) or 1
    radii = sorted({max(1, int(span) >> s) for s in (10, 6, 3, 0)})
    cur = local_search(D, seed=seed, restarts=1, initial=colors)
    cur_const = _constant_or_none(D, cur.coloring) if D.n % 2 == 0 else None
    for it in range(iters):
        pts = list(D.points)
        i = rng.randrange(D.n)
        r = rng.choice(radii)
        pts[i] = (pts[i].x + rng.randint(-r, r), pts[i].y + rng.randint(-r, r))
        try:
            E = D.with_points(pts)
        except GeneralPositionError:
            continue
        res = local_search(E, seed=seed + it, restarts=3, initial=cur.coloring)
        if res.mono_count > cur.mono_count:
            continue
        const = _constant_or_none(E, res.coloring) if E.n % 2 == 0 else None
        if res.mono_count == cur.mono_count and cur_const is not None:
            worse = const is None or const > cur_const
            if worse and rng.random() < 0.5:
                continue
        D, cur, cur_const = E, res, const
    return D, cur


def extract(D: Drawing, colors, target_n: int, seed: int = 0) -> tuple[Drawing, ColoringResult]:
    """Step 3: greedy single-point deletion down to ``target_n`` points."""
    keep = list(range(D.n))
    col = as_coloring(colors, D.n_edges).copy()
    cur = ColoringResult(col, mono_crossings(D, col), "local-search", seed, 0)
    sub = D
    while len(keep) > target_n:
        best = None
        for p in range(len(keep)):
            trial = keep[:p] + keep[p + 1:]
            S = D.subdrawing(trial)
            res = local_search(S, seed=seed, restarts=1, initial=restrict_coloring(D, col, trial))
            if best is None or res.mono_count < best[0].mono_count:
                best = (res, trial, S)
        cur, keep, sub = best
        # carry the re-optimised colours back onto the parent's edge order
        E = D.edge_index
        for k, (a, b) in enumerate(sub.edges):
            col[E[keep[a], keep[b]]] = cur.coloring[k]
    return sub, cur


def pipeline(D: Drawing, colors=None, target_n: int | None = None, budget: int = 4,
             seed: int = 0, matching: HalvingMatching | None = None,
             improve_iters: int = 400) -> PipelineResult:
    """Run ``budget`` rounds of improve / duplicate / extract from a seed drawing.

    ``budget=0`` only evaluates the seed.  Stages that need a halving
    matching are skipped, with a warning, when none exists.
    """
    rng = random.Random(seed)
    target_n = D.n if target_n is None else target_n
    if target_n > D.n:
        raise ValueError(f"target_n={target_n} exceeds the seed size {D.n}")
    if colors is None:
        colors = best_coloring(D, seed=seed).coloring
    warnings: list[str] = []
    seed_mem = evaluate(D, colors, matching, warnings)
    best = seed_mem if seed_mem.constant is not None else None
    if D.n > target_n:
        S, res = extract(D, colors, target_n, seed)
        at_target = Member(S, res.coloring, res.mono_count)
    else:
        at_target = seed_mem
    out = PipelineResult(best, at_target, target_n, [], warnings)

    def consider(mem: Member):
        if mem.constant is not None and (out.best is None or mem.constant < out.best.constant):
            out.best = mem
        if mem.drawing.n == target_n and mem.cr2 < out.best_at_target.cr2:
            out.best_at_target = mem

    cur_D, cur_c = at_target.drawing, at_target.coloring
    for rnd in range(budget):
        cur_D, res = improve(cur_D, cur_c, improve_iters, rng, seed=seed + 1000 * rnd)
        cur_c = res.coloring
        mem = evaluate(cur_D, cur_c, warnings=warnings)
        consider(mem)
        if mem.matching is None:
            warnings.append(f"round {rnd}: duplication skipped")
        else:
            Q, qc, QM = geometric_duplicate(cur_D, cur_c, mem.matching)
            consider(evaluate(Q, qc, QM, warnings))
            S, sres = extract(Q, qc, target_n, seed + rnd)
            smem = evaluate(S, sres.coloring, warnings=warnings)
            consider(smem)
            if smem.cr2 <= mem.cr2:
                cur_D, cur_c = S, sres.coloring
        out.history.append(out.constant)
        out.rounds = rnd + 1
    return out
