"""The coloured duplication process.

Every point ``p`` with matched halving edge ``e = (p, q)`` is replaced by
two points ``p1, p2`` on the line through ``e`` close to ``p`` (``p1`` the
one farther from ``q``).  Edges between duplicates of different points
inherit the parent colour; the colour of ``p1 p2`` and the matching of the
new set depend on which of six cases ``p`` is in (class of ``e`` at ``p``,
and the sign of ``L_l - L_r``).

Two routes are provided and must agree:

* combinatorial: a population of per-point profiles and the one-step
  crossing recurrence (:func:`claim1_step`), which scales to any depth;
* geometric: explicit exact coordinates (:func:`geometric_duplicate`),
  whose crossings are counted directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .coloring import as_coloring, mono_crossings
from .errors import InvalidMatching, OddCardinality, ValidationFailed
from .geometry import Drawing, Point, orientation
from .halving import HalvingMatching, check_matching, larger_class_at, side_counts

LARGE, SMALL = "large", "small"


def case_of(match_class: str, L_l: int, L_r: int) -> int:
    base = 0 if match_class == SMALL else 3
    if L_l > L_r:
        return base + 1
    if L_l == L_r:
        return base + 2
    return base + 3


@dataclass(frozen=True, order=True)
class PointProfile:
    case: int
    L_l: int
    L_r: int
    S_l: int
    S_r: int
    match_class: str

    def __post_init__(self):
        if self.case != case_of(self.match_class, self.L_l, self.L_r):
            raise ValueError(f"inconsistent profile {self}")

    @classmethod
    def make(cls, match_class: str, L_l: int, L_r: int, S_l: int, S_r: int) -> "PointProfile":
        return cls(case_of(match_class, L_l, L_r), L_l, L_r, S_l, S_r, match_class)

    @property
    def H(self) -> tuple[int, int]:
        """Side counts of the class the matched edge belongs to."""
        return (self.S_l, self.S_r) if self.match_class == SMALL else (self.L_l, self.L_r)

    @property
    def degree(self) -> int:
        return self.L_l + self.L_r + self.S_l + self.S_r

    def counts(self) -> tuple[int, int, int, int]:
        return (self.L_l, self.L_r, self.S_l, self.S_r)


# child tuples per case, as (dL_l, dL_r, dS_l, dS_r) added to the doubled counts,
# and the class of the child's matched edge
_CHILDREN = {
    1: (((0, 1, 0, 1), SMALL), ((0, 1, 1, 0), SMALL)),
    2: (((0, 0, 1, 1), SMALL), ((0, 0, 1, 1), SMALL)),
    3: (((1, 0, 1, 0), SMALL), ((1, 0, 0, 1), SMALL)),
    4: (((0, 1, 0, 1), LARGE), ((0, 1, 1, 0), LARGE)),
    5: (((1, 1, 0, 0), SMALL), ((0, 1, 1, 0), LARGE)),
    6: (((1, 0, 1, 0), LARGE), ((1, 0, 0, 1), LARGE)),
}


def transition(p: PointProfile) -> tuple[PointProfile, PointProfile]:
    """Profiles of the two duplicates ``(p1, p2)``.

    Each child's sides are measured against its own matched edge, directed
    towards the child.  The second child of case 5 has ``L_l < L_r`` and so
    lands in case 6.
    """
    out = []
    for (a, b, c, d), cls in _CHILDREN[p.case]:
        out.append(PointProfile.make(cls, 2 * p.L_l + a, 2 * p.L_r + b,
                                     2 * p.S_l + c, 2 * p.S_r + d))
    return out[0], out[1]


def classify(D: Drawing, colors, M: HalvingMatching) -> list[PointProfile]:
    """Profile of every point relative to its matched edge."""
    if D.n % 2:
        raise OddCardinality("duplication needs an even number of points")
    check_matching(D, colors, M)
    c = as_coloring(colors, D.n_edges)
    out = []
    for p in range(D.n):
        e = M[p]
        big, _, _ = larger_class_at(D, c, p)
        cls = LARGE if int(c[e]) == big else SMALL
        s = side_counts(D, c, p, e)
        out.append(PointProfile.make(cls, *s))
    return out


@dataclass
class DupState:
    k: int
    m0: int
    profiles: list[PointProfile]
    cr2: int

    @property
    def m(self) -> int:
        return self.m0 << self.k

    def check(self) -> None:
        if len(self.profiles) != self.m:
            raise ValidationFailed(f"{len(self.profiles)} profiles for {self.m} points")
        for p in self.profiles:
            if p.degree != self.m - 2:
                raise ValidationFailed(f"profile {p} does not sum to {self.m - 2}")
            if self.k >= 1 and p.case == 5:
                raise ValidationFailed("case 5 survived a duplication step")


def initial_state(D: Drawing, colors, M: HalvingMatching) -> DupState:
    return DupState(0, D.n, classify(D, colors, M), mono_crossings(D, colors))


def claim1_increment(profiles, m: int) -> int:
    """New monochromatic crossings created by one duplication step, excluding the 16x term."""
    c2 = math.comb
    sides = 0
    matched = 0
    for p in profiles:
        sides += c2(p.L_l, 2) + c2(p.L_r, 2) + c2(p.S_l, 2) + c2(p.S_r, 2)
        matched += sum(p.H)
    return c2(m, 2) - m + 4 * sides + 2 * matched


def claim1_step(state: DupState) -> DupState:
    """One combinatorial duplication step with the exact crossing recurrence."""
    if state.k >= 1 and any(p.case == 5 for p in state.profiles):
        raise ValidationFailed("case 5 present after a duplication step")
    cr2 = 16 * state.cr2 + claim1_increment(state.profiles, state.m)
    kids = []
    for p in state.profiles:
        kids.extend(transition(p))
    return DupState(state.k + 1, state.m0, kids, cr2)


def simulate(state: DupState, steps: int) -> list[int]:
    """``[cr2(Q_0), ..., cr2(Q_steps)]`` from ``state`` onwards."""
    vals = [state.cr2]
    for _ in range(steps):
        state = claim1_step(state)
        vals.append(state.cr2)
    return vals


def simulate_counts(state: DupState, steps: int) -> list[int]:
    """Like :func:`simulate` but tracks only profile multiplicities.

    Much cheaper for deep runs: profiles are kept in a dict with counts.
    """
    pop: dict[PointProfile, int] = {}
    for p in state.profiles:
        pop[p] = pop.get(p, 0) + 1
    m, cr2 = state.m, state.cr2
    vals = [cr2]
    c2 = math.comb
    for _ in range(steps):
        inc = c2(m, 2) - m
        nxt: dict[PointProfile, int] = {}
        for p, w in pop.items():
            inc += w * (4 * (c2(p.L_l, 2) + c2(p.L_r, 2) + c2(p.S_l, 2) + c2(p.S_r, 2))
                        + 2 * sum(p.H))
            for kid in transition(p):
                nxt[kid] = nxt.get(kid, 0) + w
        cr2 = 16 * cr2 + inc
        m *= 2
        pop = nxt
        vals.append(cr2)
    return vals


# -- geometric construction -------------------------------------------------

_PAIR_CASE = {
    # case: (colour of p1p2 is larger class?, match of p1, match of p2)
    1: (True, "q1", "q2"),
    2: (False, "p", "q2"),
    3: (True, "q2", "q1"),
    4: (False, "q1", "q1"),
    5: (False, "p", "q1"),
    6: (False, "q2", "q2"),
}


def _duplicate_coords(xs, ys, partner, t):
    """Integer coordinates of the doubled set for offset ``2^-t`` (scale ``2^(t+1)``)."""
    s = 1 << (t + 1)
    qx, qy = [], []
    for p in range(len(xs)):
        ux = xs[p] - xs[partner[p]]
        uy = ys[p] - ys[partner[p]]
        qx += [s * xs[p] + 2 * ux, s * xs[p] - ux]
        qy += [s * ys[p] + 2 * uy, s * ys[p] - uy]
    return qx, qy


def _inherits_order_type(TP: np.ndarray, TQ: np.ndarray) -> bool:
    m = TP.shape[0]
    Q6 = TQ.reshape(m, 2, m, 2, m, 2).transpose(0, 2, 4, 1, 3, 5)
    a, b, c = np.ogrid[:m, :m, :m]
    distinct = (a != b) & (b != c) & (a != c)
    agree = Q6 == TP[:, :, :, None, None, None]
    return bool(np.all(agree[distinct]))


def geometric_duplicate(D: Drawing, colors, M: HalvingMatching, max_halvings: int = 200):
    """One explicit duplication step.

    Returns ``(Q, colors', M')``.  Point ``p`` becomes points ``2p`` (``p1``)
    and ``2p + 1`` (``p2``) at ``p + eps u`` and ``p - eps/2 u`` with ``u``
    the vector from the partner ``q`` to ``p``; ``eps`` is halved from 1
    until every triple of distinct parents keeps its orientation in all eight
    duplicate combinations.
    """
    c = as_coloring(colors, D.n_edges)
    profiles = classify(D, c, M)
    m = D.n
    partner = [M.partner(D, p) for p in range(m)]
    xs, ys = D.int_coords
    den = D.int_coords_scale
    TP = D.orientation_table
    for t in range(max_halvings):
        qx, qy = _duplicate_coords(xs, ys, partner, t)
        scale = den * (1 << (t + 1))
        pts = [Point(Fraction(x, scale), Fraction(y, scale)) for x, y in zip(qx, qy)]
        try:
            Q = Drawing(pts)
        except ValueError:
            continue
        if _inherits_order_type(TP, Q.orientation_table):
            break
    else:
        raise ValidationFailed("no admissible offset found")

    E = Q.edge_index
    newc = np.zeros(Q.n_edges, dtype=np.uint8)
    for (a, b), col in zip(D.edges, c):
        for i in (0, 1):
            for j in (0, 1):
                newc[E[2 * a + i, 2 * b + j]] = col
    match = [0] * (2 * m)
    for p in range(m):
        q = partner[p]
        prof = profiles[p]
        big, _, _ = larger_class_at(D, c, p)
        larger, m1, m2 = _PAIR_CASE[prof.case]
        newc[E[2 * p, 2 * p + 1]] = big if larger else 1 - big
        # q1: duplicate of q left of the line from q to p
        left = [2 * q + j for j in (0, 1) if _left_of(Q, D, q, p, 2 * q + j)]
        if len(left) != 1:
            raise ValidationFailed(f"duplicates of {q} not split by line {q}->{p}")
        q1 = left[0]
        q2 = 2 * q + 1 if q1 == 2 * q else 2 * q
        who = {"q1": q1, "q2": q2}
        match[2 * p] = int(E[2 * p, who.get(m1, 2 * p + 1)])
        match[2 * p + 1] = int(E[2 * p + 1, who.get(m2, 2 * p)])
    return Q, newc, HalvingMatching(tuple(match))


def _left_of(Q: Drawing, D: Drawing, q: int, p: int, r: int) -> bool:
    """Is Q-point ``r`` left of the line through D-points ``q -> p``?"""
    return orientation(D.points[q], D.points[p], Q.points[r]) > 0


def duplicate_k(D: Drawing, colors, M: HalvingMatching, k: int):
    """Apply :func:`geometric_duplicate` ``k`` times."""
    for _ in range(k):
        D, colors, M = geometric_duplicate(D, colors, M)
    return D, colors, M


# -- closed form -------------------------------------------------------------

@dataclass(frozen=True)
class Coefficients:
    """``cr2(Q_k) = A 16^k + B 8^k + C 4^k + D 2^k``."""

    A: Fraction
    B: Fraction
    C: Fraction
    D: Fraction
    m: int
    prestep: bool = False
    verified: tuple[int, ...] = field(default=())

    def predict(self, k: int) -> Fraction:
        x = Fraction(2) ** k
        return self.A * x**4 + self.B * x**3 + self.C * x**2 + self.D * x


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rows)
    a = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def fit_coefficients(values: dict[int, int], ks=(1, 2, 3, 4)) -> tuple[Fraction, ...]:
    rows = [[Fraction(2) ** (e * k) for e in (4, 3, 2, 1)] for k in ks]
    return tuple(_solve_exact(rows, [Fraction(values[k]) for k in ks]))


def seed_state(D: Drawing, colors, M: HalvingMatching) -> tuple[DupState, bool]:
    """Initial profile state, advanced one step if any point is in case 5."""
    st = initial_state(D, colors, M)
    if any(p.case == 5 for p in st.profiles):
        st = claim1_step(st)
        return DupState(0, st.m, st.profiles, st.cr2), True
    return st, False


def coefficients_from_state(st: DupState, ks=(1, 2, 3, 4), check=(5, 6), prestep=False) -> Coefficients:
    top = max(tuple(ks) + tuple(check))
    vals = dict(enumerate(simulate_counts(st, top)))
    A, B, C, Dc = fit_coefficients(vals, ks)
    coef = Coefficients(A, B, C, Dc, st.m, prestep, tuple(check))
    for k in check:
        if coef.predict(k) != vals[k]:
            raise ValidationFailed(f"closed form predicts {coef.predict(k)} at k={k}, simulation {vals[k]}")
    return coef


def solve_coefficients(D: Drawing, colors, M: HalvingMatching, ks=(1, 2, 3, 4), check=(5, 6)) -> Coefficients:
    """Exact ``A, B, C, D`` by fitting simulated counts at ``ks``, validated at ``check``."""
    st, pre = seed_state(D, colors, M)
    return coefficients_from_state(st, ks, check, pre)


def render_decimal(x: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = digits + 30
        v = Decimal(x.numerator) / Decimal(x.denominator)
        return str(v.quantize(Decimal(1).scaleb(-digits)))


def crossing_constant(D: Drawing, colors, M: HalvingMatching, digits: int = 12) -> tuple[Fraction, str]:
    """``24 A / m^4``, the asymptotic density of the duplicated family.

    ``m`` is the size of the seed the coefficients refer to (doubled if a
    case-5 pre-step was needed).
    """
    coef = solve_coefficients(D, colors, M)
    const = 24 * coef.A / Fraction(coef.m) ** 4
    return const, render_decimal(const, digits)


def constant_from_coefficients(coef: Coefficients) -> Fraction:
    return 24 * coef.A / Fraction(coef.m) ** 4
