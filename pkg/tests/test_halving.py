import itertools
import random

import numpy as np
import pytest

from helpers import random_drawing, random_seed
from oracles import side_recount
from twocross.coloring import BLUE, RED
from twocross.errors import InvalidMatching, NotFound, OddCardinality, TieAtPoint
from twocross.geometry import Drawing
from twocross.halving import (
    HalvingMatching,
    check_matching,
    find_halving_matching,
    halving_candidates,
    is_halving_edge,
    larger_class_at,
    side_counts,
)
from twocross.special import convex_drawing


def test_larger_class_examples():
    D = convex_drawing(4)
    col = np.zeros(6, dtype=np.uint8)
    col[D.edge_id(0, 3)] = BLUE
    assert larger_class_at(D, col, 0) == (RED, 2, 1)
    D6 = convex_drawing(6)
    col = np.zeros(15, dtype=np.uint8)
    for q in range(1, 6):
        col[D6.edge_id(0, q)] = BLUE
    assert larger_class_at(D6, col, 0) == (BLUE, 5, 0)


def test_tie_at_odd_point():
    D = convex_drawing(5)
    col = np.zeros(10, dtype=np.uint8)
    col[D.edge_id(0, 1)] = col[D.edge_id(0, 2)] = BLUE
    with pytest.raises(TieAtPoint):
        larger_class_at(D, col, 0)


def test_is_halving_examples():
    # p = 0 at the origin, q = 1 straight below it
    D = Drawing([(0, 0), (0, -1), (-1, 1), (1, 1)])
    col = np.zeros(6, dtype=np.uint8)
    ok, s = is_halving_edge(D, col, 0, D.edge_id(0, 1))
    assert ok and tuple(s) == (1, 1, 0, 0)
    D = Drawing([(0, 0), (0, -1), (-1, 1), (-3, 1)])
    ok, s = is_halving_edge(D, col, 0, D.edge_id(0, 1))
    assert not ok and tuple(s) == (2, 0, 0, 0)


def test_side_counts_need_incident_edge():
    D = convex_drawing(4)
    with pytest.raises(ValueError):
        side_counts(D, [0] * 6, 0, D.edge_id(1, 2))


def test_side_counts_against_recount_k6():
    D = convex_drawing(6)
    col = [k % 2 for k in range(D.n_edges)]
    by_pair = {frozenset(e): col[k] for k, e in enumerate(D.edges)}
    checked = 0
    for p in range(6):
        for q in range(6):
            if q != p:
                s = side_counts(D, col, p, D.edge_id(p, q))
                assert tuple(s) == side_recount(D.points, by_pair, p, q)
                assert sum(s) == 4
                checked += 1
    assert checked == 30


def _all_matchings(D, col):
    cands = [halving_candidates(D, col, p) for p in range(D.n)]
    for combo in itertools.product(*cands):
        if len(set(combo)) == D.n:
            yield combo


def test_matching_is_lexicographically_least():
    rng = random.Random(1)
    tested = 0
    while tested < 12:
        D = random_drawing(rng, rng.choice([4, 6]))
        col = np.array([rng.getrandbits(1) for _ in range(D.n_edges)], dtype=np.uint8)
        every = sorted(_all_matchings(D, col))
        if not every:
            with pytest.raises(NotFound):
                find_halving_matching(D, col)
            continue
        M = find_halving_matching(D, col)
        assert M.match == every[0]
        check_matching(D, col, M)
        tested += 1


def test_convex_k4_monochrome_exhaustive():
    # each corner's only halving edge is its diagonal, shared with the opposite corner
    D = convex_drawing(4)
    col = np.zeros(6, dtype=np.uint8)
    for p in range(4):
        assert halving_candidates(D, col, p) == [D.edge_id(p, (p + 2) % 4)]
    assert not list(_all_matchings(D, col))
    with pytest.raises(NotFound) as exc:
        find_halving_matching(D, col)
    assert exc.value.matched == 2


def test_not_found_reports_size():
    # first random colouring with no perfect matching at all (checked exhaustively)
    rng = random.Random(2)
    seen = False
    for _ in range(300):
        D = random_drawing(rng, 6)
        col = np.array([rng.getrandbits(1) for _ in range(D.n_edges)], dtype=np.uint8)
        if any(True for _ in _all_matchings(D, col)):
            continue
        with pytest.raises(NotFound) as exc:
            find_halving_matching(D, col)
        assert exc.value.matched < 6 and exc.value.total == 6
        seen = True
        break
    assert seen


def test_odd_cardinality():
    with pytest.raises(OddCardinality):
        find_halving_matching(convex_drawing(5), [0] * 10)


def test_check_matching_rejects():
    D, col, M = random_seed(random.Random(3), 6)
    with pytest.raises(InvalidMatching):
        check_matching(D, col, HalvingMatching(M.match[:3]))
    with pytest.raises(InvalidMatching):
        check_matching(D, col, HalvingMatching((M.match[0],) * 6))
    bad = list(M.match)
    bad[0] = D.edge_id(1, 2)
    with pytest.raises(InvalidMatching):
        check_matching(D, col, HalvingMatching(tuple(bad)))
    # an incident edge that is not halving
    bad = list(M.match)
    bad[0] = next(D.edge_id(0, q) for q in range(1, 6) if D.edge_id(0, q) not in halving_candidates(D, col, 0))
    with pytest.raises(InvalidMatching):
        check_matching(D, col, HalvingMatching(tuple(bad)))
