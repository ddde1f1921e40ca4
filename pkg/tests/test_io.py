import random
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_drawing, random_seed
from twocross.coloring import BLUE, RED, exact_cr2
from twocross.errors import GeneralPositionError, ParseError
from twocross.geometry import Drawing
from twocross.io import (
    format_point_text,
    parse_coloring,
    parse_point_text,
    read_coloring,
    read_matching,
    read_order_type_db,
    read_point_text,
    record_stride,
    scan_db,
    snap_to_grid,
    write_coloring,
    write_matching,
    write_order_type_db,
    write_point_text,
)
from twocross.special import convex_drawing


def test_point_text_example(tmp_path):
    f = tmp_path / "sq.pts"
    f.write_text("4\n0 0\n10 0\n10 10\n0 10\n")
    D = read_point_text(f)
    assert D.n == 4 and D.crossing_count() == 1
    out = write_point_text(D, tmp_path / "out.pts")
    assert out.read_bytes() == f.read_bytes()


def test_point_text_rationals_and_comments():
    D = parse_point_text("# header\n3\n0 0  # origin\n1/2 0\n\n0 7/3\n")
    assert D.points[1].x == Fraction(1, 2) and D.points[2].y == Fraction(7, 3)
    assert parse_point_text(format_point_text(D)).points == D.points


def test_point_text_collinear():
    with pytest.raises(GeneralPositionError) as exc:
        parse_point_text("4\n0 0\n9 9\n1 0\n2 0\n")
    assert exc.value.indices == (0, 2, 3)


@pytest.mark.parametrize("text,line", [
    ("3\n0 0\n1 x\n0 1\n", 3),
    ("3\n0 0\n1 1 1\n0 1\n", 3),
    ("three\n", 1),
    ("3\n0 0\n1 0\n", 3),
    ("2\n0 0\n1 0\n5 5\n", 4),
    ("2\n0 0\n1/0 0\n", 3),
])
def test_point_text_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        parse_point_text(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_point_text_round_trip_random(tmp_path):
    rng = random.Random(1)
    for i in range(5):
        D = random_drawing(rng, 7)
        D = D.with_points([(p.x / 3, p.y + Fraction(1, 7)) for p in D.points])
        assert read_point_text(write_point_text(D, tmp_path / f"{i}.pts")).points == D.points


def test_coloring_file(tmp_path):
    D = convex_drawing(4)
    col = parse_coloring("RBRBRB\n", D)
    assert list(col).count(RED) == 3 and list(col).count(BLUE) == 3
    with pytest.raises(ParseError):
        parse_coloring("RBRB\n", D)
    with pytest.raises(ParseError):
        parse_coloring("RBRBRX\n", D)
    p = write_coloring(col, tmp_path / "c.col")
    assert p.read_text() == "RBRBRB\n"
    assert read_coloring(p, D).tolist() == col.tolist()


def test_matching_file(tmp_path):
    D, col, M = random_seed(random.Random(2), 6)
    M2 = read_matching(write_matching(M, D, tmp_path / "m.txt"), D)
    assert M2.match == M.match
    (tmp_path / "bad.txt").write_text("1 0 3\n")
    with pytest.raises(ParseError):
        read_matching(tmp_path / "bad.txt", D)


def test_db_round_trip(tmp_path):
    a = Drawing([(0, 0), (10, 0), (10, 10), (0, 10)])
    b = Drawing([(0, 0), (10, 0), (5, 10), (5, 3)])
    for width in (1, 2):
        for be in (False, True):
            p = write_order_type_db([a, b], tmp_path / "db.bin", width, be)
            assert p.stat().st_size == 2 * record_stride(4, width)
            got = list(read_order_type_db(p, 4, width, be))
            assert [i for i, _ in got] == [0, 1]
            assert got[0][1].points == a.points and got[1][1].points == b.points


def test_db_stride_and_size_check(tmp_path):
    assert record_stride(9, 2) == 36
    p = tmp_path / "odd.bin"
    p.write_bytes(b"\x00" * 35)
    with pytest.raises(ParseError):
        list(read_order_type_db(p, 9, 2))


def test_db_byte_order(tmp_path):
    a = Drawing([(0, 0), (300, 0), (300, 300), (0, 299)])
    p = write_order_type_db([a], tmp_path / "be.bin", 2, big_endian=True)
    assert list(read_order_type_db(p, 4, 2, big_endian=True))[0][1].points == a.points
    # decoding with the wrong byte order gives a different point set
    wrong = list(read_order_type_db(p, 4, 2, big_endian=False, permissive=True))
    assert not wrong or wrong[0][1].points != a.points


def test_db_permissive_skip(tmp_path, caplog):
    good = Drawing([(0, 0), (10, 0), (10, 10), (0, 10)])
    raw = np.array([[0, 0], [1, 1], [2, 2], [5, 0]], dtype="<u1").tobytes()
    p = write_order_type_db([good], tmp_path / "db.bin", 1)
    p.write_bytes(raw + p.read_bytes())
    with pytest.raises(ParseError, match="record 0"):
        list(read_order_type_db(p, 4, 1))
    got = list(read_order_type_db(p, 4, 1, permissive=True))
    assert [i for i, _ in got] == [1]
    assert "record 0" in caplog.text


def test_db_writer_rejects_off_grid(tmp_path):
    D = Drawing([(0, 0), (Fraction(1, 2), 0), (0, 1)])
    with pytest.raises(ValueError):
        write_order_type_db([D], tmp_path / "x.bin", 1)
    with pytest.raises(ValueError):
        write_order_type_db([Drawing([(0, 0), (300, 0), (0, 1)])], tmp_path / "x.bin", 1)


def test_scan_ordered_and_sound(tmp_path):
    rng = random.Random(3)
    Ds = [random_drawing(rng, 7, 250) for _ in range(8)]
    p = write_order_type_db(Ds, tmp_path / "db.bin", 1)
    serial = list(scan_db(p, 7, 1))
    parallel = list(scan_db(p, 7, 1, jobs=2))
    assert [r.index for r in parallel] == list(range(8))
    assert serial == parallel
    for r, D in zip(serial, Ds):
        assert r.cr == D.crossing_count()
        assert r.cr2_lower <= r.cr2_upper
        if r.certified:
            assert exact_cr2(D)[0] == r.cr2_upper
    assert [r.index for r in scan_db(p, 7, 1, limit=3)] == [0, 1, 2]


def test_snap_to_grid_keeps_order_type():
    rng = random.Random(4)
    for _ in range(5):
        D = random_drawing(rng, 8)
        D = D.with_points([(p.x + Fraction(1, 3), p.y / 7) for p in D.points])
        E = snap_to_grid(D)
        assert all(p.x.denominator == p.y.denominator == 1 for p in E.points)
        assert np.array_equal(E.orientation_table, D.orientation_table)
