"""File formats and the order-type database scan.

Point files: first meaningful line is ``n``, then ``n`` lines ``x y``
where each coordinate is an integer or a rational ``p/q``.  Everything
after ``#`` on a line is a comment; blank lines are ignored.

Coloring files: one line of ``R``/``B`` characters in canonical edge order.

Matching files: one line of ``n`` integers, the partner point of each point
(point ``p`` is matched with its edge to ``partner[p]``).

Order-type databases: a flat binary stream of records; each record holds
``n`` points, each point ``x`` then ``y``, as unsigned integers of 1 or 2
bytes.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .coloring import as_coloring, best_coloring, coloring_str, graph_of
from .errors import GeneralPositionError, ParseError
from .geometry import Drawing
from .halving import HalvingMatching

log = logging.getLogger(__name__)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_coord(tok: str, lineno: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad coordinate {tok!r}", lineno) from None


def parse_point_text(text: str) -> Drawing:
    rows = [(i + 1, _strip(l)) for i, l in enumerate(text.splitlines())]
    rows = [(i, l) for i, l in rows if l]
    if not rows:
        raise ParseError("empty point file")
    lineno, head = rows[0]
    try:
        n = int(head)
    except ValueError:
        raise ParseError(f"expected point count, got {head!r}", lineno) from None
    if n < 0:
        raise ParseError(f"negative point count {n}", lineno)
    body = rows[1:]
    if len(body) != n:
        where = body[n][0] if len(body) > n else (body[-1][0] if body else lineno)
        raise ParseError(f"expected {n} points, found {len(body)}", where)
    pts = []
    for lineno, line in body:
        toks = line.split()
        if len(toks) != 2:
            raise ParseError(f"expected 'x y', got {line!r}", lineno)
        pts.append(tuple(_parse_coord(t, lineno) for t in toks))
    return Drawing(pts)


def read_point_text(path) -> Drawing:
    return parse_point_text(Path(path).read_text())


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_point_text(D: Drawing) -> str:
    lines = [str(D.n)] + [f"{_fmt(p.x)} {_fmt(p.y)}" for p in D.points]
    return "\n".join(lines) + "\n"


def write_point_text(D: Drawing, path) -> Path:
    path = Path(path)
    path.write_text(format_point_text(D))
    return path


def parse_coloring(text: str, D: Drawing) -> np.ndarray:
    rows = [(i + 1, _strip(l)) for i, l in enumerate(text.splitlines())]
    rows = [(i, l) for i, l in rows if l]
    if len(rows) != 1:
        raise ParseError(f"expected a single colour line, found {len(rows)}")
    lineno, s = rows[0]
    bad = set(s) - {"R", "B"}
    if bad:
        raise ParseError(f"illegal colour characters {sorted(bad)}", lineno)
    if len(s) != D.n_edges:
        raise ParseError(f"{len(s)} colours for {D.n_edges} edges", lineno)
    return as_coloring(s, D.n_edges)


def read_coloring(path, D: Drawing) -> np.ndarray:
    return parse_coloring(Path(path).read_text(), D)


def write_coloring(colors, path) -> Path:
    path = Path(path)
    path.write_text(coloring_str(colors) + "\n")
    return path


def parse_matching(text: str, D: Drawing) -> HalvingMatching:
    toks = " ".join(_strip(l) for l in text.splitlines()).split()
    if len(toks) != D.n:
        raise ParseError(f"{len(toks)} partners for {D.n} points")
    try:
        partner = [int(t) for t in toks]
    except ValueError as exc:
        raise ParseError(f"bad partner index: {exc}") from None
    out = []
    for p, q in enumerate(partner):
        if not 0 <= q < D.n or q == p:
            raise ParseError(f"invalid partner {q} for point {p}")
        out.append(D.edge_id(p, q))
    return HalvingMatching(tuple(out))


def read_matching(path, D: Drawing) -> HalvingMatching:
    return parse_matching(Path(path).read_text(), D)


def write_matching(M: HalvingMatching, D: Drawing, path) -> Path:
    path = Path(path)
    path.write_text(" ".join(str(M.partner(D, p)) for p in range(D.n)) + "\n")
    return path


# -- order-type database ------------------------------------------------------

def _dtype(width: int, big_endian: bool) -> np.dtype:
    if width not in (1, 2):
        raise ValueError(f"width must be 1 or 2 bytes, got {width}")
    return np.dtype(f"{'>' if big_endian else '<'}u{width}")


def record_stride(n: int, width: int) -> int:
    return 2 * n * width


def read_order_type_db(path, n: int, width: int, big_endian: bool = False,
                       permissive: bool = False) -> Iterator[tuple[int, Drawing]]:
    """Yield ``(record index, drawing)`` for each record of the database.

    A record that is not in general position raises, or is skipped with a
    warning when ``permissive`` is set.
    """
    dt = _dtype(width, big_endian)
    raw = Path(path).read_bytes()
    stride = record_stride(n, width)
    if len(raw) % stride:
        raise ParseError(f"file size {len(raw)} is not a multiple of the record size {stride}")
    data = np.frombuffer(raw, dtype=dt).reshape(-1, n, 2)
    for idx, rec in enumerate(data):
        try:
            yield idx, Drawing([(int(x), int(y)) for x, y in rec])
        except GeneralPositionError as exc:
            if not permissive:
                raise ParseError(f"record {idx}: {exc}") from exc
            log.warning("record %d skipped: %s", idx, exc)


def write_order_type_db(drawings: Iterable[Drawing], path, width: int,
                        big_endian: bool = False) -> Path:
    dt = _dtype(width, big_endian)
    hi = 1 << (8 * width)
    rows = []
    for D in drawings:
        for p in D.points:
            if p.x.denominator != 1 or p.y.denominator != 1 or not (0 <= p.x < hi and 0 <= p.y < hi):
                raise ValueError(f"point {p} does not fit an unsigned {width}-byte grid")
            rows.append((int(p.x), int(p.y)))
    path = Path(path)
    path.write_bytes(np.array(rows, dtype=dt).tobytes())
    return path


@dataclass(frozen=True)
class ScanRecord:
    index: int
    cr: int
    cr2_upper: int
    cr2_lower: int
    certified: bool
    coloring: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def scan_drawing(index: int, D: Drawing, seed: int = 0, restarts: int = 8,
                 max_cycle_len: int = 5, budget: int = 200_000) -> ScanRecord:
    from .bounds import certify_lower_bound

    up = best_coloring(D, seed=seed, restarts=restarts)
    cert = certify_lower_bound(graph_of(D), max_len=max_cycle_len, budget=budget,
                               upper=up.mono_count)
    lower = cert.value
    if lower > up.mono_count:
        raise AssertionError(f"record {index}: lower bound {lower} exceeds colouring value {up.mono_count}")
    return ScanRecord(index, D.crossing_count(), up.mono_count, lower,
                      lower == up.mono_count, coloring_str(up.coloring))


def _scan_job(args):
    idx, pts, seed, restarts, max_cycle_len, budget = args
    return scan_drawing(idx, Drawing(pts), seed, restarts, max_cycle_len, budget)


def scan_db(path, n: int, width: int, big_endian: bool = False, jobs: int = 1,
            seed: int = 0, restarts: int = 8, max_cycle_len: int = 5,
            budget: int = 200_000, permissive: bool = False,
            limit: int | None = None) -> Iterator[ScanRecord]:
    """Upper and certified lower bound for every record, in record order."""
    def tasks():
        for k, (idx, D) in enumerate(read_order_type_db(path, n, width, big_endian, permissive)):
            if limit is not None and k >= limit:
                return
            yield idx, D.points, seed, restarts, max_cycle_len, budget

    if jobs <= 1:
        for t in tasks():
            yield _scan_job(t)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map keeps input order whatever order the workers finish in
        yield from pool.map(_scan_job, tasks(), chunksize=4)


def snap_to_grid(D: Drawing, size: int = 1 << 12, max_doublings: int = 40) -> Drawing:
    """Integer drawing with the same order type, coordinates in ``[0, size']``.

    Points are scaled to the grid and rounded; the grid doubles until every
    orientation of the original is preserved.
    """
    xs = [p.x for p in D.points]
    ys = [p.y for p in D.points]
    x0, y0 = min(xs), min(ys)
    span = max(max(xs) - x0, max(ys) - y0) or Fraction(1)
    T = D.orientation_table
    for _ in range(max_doublings):
        pts = [(round((x - x0) * size / span), round((y - y0) * size / span))
               for x, y in zip(xs, ys)]
        try:
            E = D.with_points(pts)
        except GeneralPositionError:
            E = None
        if E is not None and np.array_equal(E.orientation_table, T):
            return E
        size *= 2
    raise RuntimeError("could not snap drawing to an integer grid")

