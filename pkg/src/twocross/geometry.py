"""Exact straight-line drawings and crossing detection.

Points carry :class:`fractions.Fraction` coordinates.  Internally every
drawing keeps an integer copy of its coordinates (scaled by the common
denominator), which leaves all orientation signs unchanged and lets the
bulk predicates run on numpy integer arrays when the values are small
enough, falling back to Python integers otherwise.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import GeneralPositionError

# |coordinate| below this keeps every 2x2 determinant inside int64
_INT64_SAFE = 1 << 30
# pairs are cached on the drawing only below this size
_CACHE_LIMIT = 4_000_000


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x, y) -> "Point":
        return cls(Fraction(x), Fraction(y))


def orientation(p, q, r) -> int:
    """Sign of the signed area of triangle (p, q, r): +1 ccw, -1 cw, 0 collinear."""
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (d > 0) - (d < 0)


def _det_sign_int64(X, Y, I, J, K):
    d = (X[J] - X[I]) * (Y[K] - Y[I]) - (Y[J] - Y[I]) * (X[K] - X[I])
    return np.sign(d).astype(np.int8)


class Drawing:
    """A straight-line drawing on points in general position.

    ``edges`` defaults to the complete graph.  Edges are normalised to
    ``(i, j)`` with ``i < j``, deduplicated and sorted; the position of an
    edge in :attr:`edges` is its canonical index.
    """

    def __init__(self, points: Iterable, edges: Iterable[tuple[int, int]] | None = None):
        self.points: tuple[Point, ...] = tuple(
            p if isinstance(p, Point) else Point.of(*p) for p in points
        )
        n = len(self.points)
        if edges is None:
            self.complete = True
            self.edges = tuple(itertools.combinations(range(n), 2))
        else:
            norm = set()
            for i, j in edges:
                if i == j or not (0 <= i < n and 0 <= j < n):
                    raise ValueError(f"invalid edge ({i}, {j}) for {n} points")
                norm.add((min(i, j), max(i, j)))
            self.edges = tuple(sorted(norm))
            self.complete = len(self.edges) == n * (n - 1) // 2
        self._check_general_position()

    # -- construction helpers -------------------------------------------------

    @cached_property
    def int_coords_scale(self) -> int:
        """Least common denominator of all coordinates."""
        den = 1
        for p in self.points:
            den = math.lcm(den, p.x.denominator, p.y.denominator)
        return den

    @cached_property
    def int_coords(self) -> tuple[list[int], list[int]]:
        den = self.int_coords_scale
        xs = [int(p.x * den) for p in self.points]
        ys = [int(p.y * den) for p in self.points]
        return xs, ys

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        kind = "complete" if self.complete else f"{self.n_edges} edges"
        return f"Drawing(n={self.n}, {kind})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Drawing)
            and self.points == other.points
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.points, self.edges))

    def with_points(self, points) -> "Drawing":
        return Drawing(points, None if self.complete else self.edges)

    def subdrawing(self, keep: Sequence[int]) -> "Drawing":
        """Induced drawing on the points ``keep`` (relabelled 0..k-1 in that order)."""
        pos = {v: i for i, v in enumerate(keep)}
        pts = [self.points[v] for v in keep]
        if self.complete:
            return Drawing(pts)
        edges = [(pos[i], pos[j]) for i, j in self.edges if i in pos and j in pos]
        return Drawing(pts, edges)

    # -- predicates -----------------------------------------------------------

    def orient(self, i: int, j: int, k: int) -> int:
        xs, ys = self.int_coords
        return orientation((xs[i], ys[i]), (xs[j], ys[j]), (xs[k], ys[k]))

    @cached_property
    def orientation_table(self) -> np.ndarray:
        """``T[i, j, k]`` = orientation of points i, j, k (int8, zero on repeats)."""
        n = self.n
        xs, ys = self.int_coords
        if n == 0:
            return np.zeros((0, 0, 0), dtype=np.int8)
        big = max(max(map(abs, xs)), max(map(abs, ys)))
        dtype = np.int64 if big < _INT64_SAFE else object
        X = np.array(xs, dtype=dtype)
        Y = np.array(ys, dtype=dtype)
        I, J, K = np.ix_(range(n), range(n), range(n))
        if dtype is object:
            d = (X[J] - X[I]) * (Y[K] - Y[I]) - (Y[J] - Y[I]) * (X[K] - X[I])
            table = (d > 0).astype(np.int8) - (d < 0).astype(np.int8)
        else:
            table = _det_sign_int64(X, Y, I, J, K)
        return table

    def _check_general_position(self) -> None:
        n = self.n
        seen = {}
        for i, p in enumerate(self.points):
            if p in seen:
                raise GeneralPositionError((seen[p], i), "coincident points")
            seen[p] = i
        if n < 3:
            return
        T = self.orientation_table
        a, b, c = np.nonzero(T == 0)
        mask = (a < b) & (b < c)
        if mask.any():
            k = int(np.argmax(mask))
            raise GeneralPositionError(
                (int(a[k]), int(b[k]), int(c[k])), "collinear points"
            )

    @cached_property
    def edge_index(self) -> np.ndarray:
        """``n x n`` matrix of canonical edge indices, -1 where no edge."""
        idx = np.full((self.n, self.n), -1, dtype=np.int64)
        for k, (i, j) in enumerate(self.edges):
            idx[i, j] = idx[j, i] = k
        return idx

    def edge_id(self, i: int, j: int) -> int:
        k = int(self.edge_index[i, j])
        if k < 0:
            raise KeyError(f"({i}, {j}) is not an edge")
        return k

    def iter_crossing_chunks(self) -> Iterator[np.ndarray]:
        """Yield arrays of crossing edge-index pairs ``(e, f)``, ``e < f``.

        Every crossing comes from exactly one 4-subset in convex position, so
        the enumeration runs over 4-subsets grouped by their smallest point.
        Chunks are not globally sorted.
        """
        n = self.n
        if n < 4:
            return
        T = self.orientation_table
        E = self.edge_index
        triples = np.array(list(itertools.combinations(range(n), 3)), dtype=np.int64)
        starts = np.searchsorted(triples[:, 0], np.arange(n), side="left")
        for a in range(n - 3):
            sub = triples[starts[a + 1]:]
            if len(sub) == 0:
                continue
            b, c, d = sub[:, 0], sub[:, 1], sub[:, 2]
            av = np.full_like(b, a)
            out = []
            for (s, t), (u, v) in (
                ((av, b), (c, d)),
                ((av, c), (b, d)),
                ((av, d), (b, c)),
            ):
                cross = (T[s, t, u] != T[s, t, v]) & (T[u, v, s] != T[u, v, t])
                if not cross.any():
                    continue
                e1 = E[s[cross], t[cross]]
                e2 = E[u[cross], v[cross]]
                keep = (e1 >= 0) & (e2 >= 0)
                e1, e2 = e1[keep], e2[keep]
                out.append(np.stack([np.minimum(e1, e2), np.maximum(e1, e2)], axis=1))
            if out:
                yield np.concatenate(out)

    def crossing_array(self) -> np.ndarray:
        """All crossing pairs as a sorted ``(k, 2)`` int array (cached for moderate sizes)."""
        cached = self.__dict__.get("_crossings")
        if cached is not None:
            return cached
        chunks = list(self.iter_crossing_chunks())
        if chunks:
            arr = np.concatenate(chunks)
            arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
        else:
            arr = np.zeros((0, 2), dtype=np.int64)
        arr.setflags(write=False)
        if len(arr) <= _CACHE_LIMIT:
            self.__dict__["_crossings"] = arr
        return arr

    def crossing_count(self) -> int:
        cached = self.__dict__.get("_crossings")
        if cached is not None:
            return len(cached)
        return sum(len(c) for c in self.iter_crossing_chunks())


def segments_cross(D: Drawing, e: int, f: int) -> bool:
    """Proper crossing test for edges ``e`` and ``f`` given by canonical index."""
    m = D.n_edges
    if not (0 <= e < m and 0 <= f < m):
        raise IndexError(f"edge index out of range: {e}, {f} (have {m})")
    a, b = D.edges[e]
    c, d = D.edges[f]
    if len({a, b, c, d}) < 4:
        return False
    return D.orient(a, b, c) != D.orient(a, b, d) and D.orient(c, d, a) != D.orient(c, d, b)


def crossing_pairs(D: Drawing) -> list[tuple[int, int]]:
    """Every unordered crossing pair once, sorted; ``len`` is the crossing number of D."""
    return [(int(e), int(f)) for e, f in D.crossing_array()]


class IntersectionGraph:
    """Graph on the edges of a drawing, adjacent iff they cross.

    The graph's own edges (the crossings) are numbered in the sorted order
    of their ``(e, f)`` pairs; that number is the crossing index used by
    the lower-bound machinery.
    """

    def __init__(self, n_vertices: int, pairs):
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(arr):
            lo = np.minimum(arr[:, 0], arr[:, 1])
            hi = np.maximum(arr[:, 0], arr[:, 1])
            if (lo == hi).any():
                raise ValueError("self-loop in intersection graph")
            if lo.min() < 0 or hi.max() >= n_vertices:
                raise ValueError("vertex out of range")
            arr = np.unique(np.stack([lo, hi], axis=1), axis=0)
        self.n_edges = n_vertices
        self.pairs = arr
        adj: list[list[int]] = [[] for _ in range(n_vertices)]
        for e, f in arr.tolist():
            adj[e].append(f)
            adj[f].append(e)
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in adj)

    @classmethod
    def of(cls, D: Drawing) -> "IntersectionGraph":
        return cls(D.n_edges, D.crossing_array())

    @property
    def n_vertices(self) -> int:
        return self.n_edges

    @property
    def n_crossings(self) -> int:
        return len(self.pairs)

    def adj(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def crossing_id(self) -> dict[tuple[int, int], int]:
        return {(e, f): k for k, (e, f) in enumerate(self.pairs.tolist())}

    def crossing_index(self, u: int, v: int) -> int:
        return self.crossing_id[(u, v) if u < v else (v, u)]


def intersection_graph(D: Drawing) -> IntersectionGraph:
    return IntersectionGraph.of(D)
