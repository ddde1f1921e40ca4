import json
import os
import random
import shutil
from fractions import Fraction

import pytest

from helpers import random_seed
from twocross.cli import main
from twocross.io import write_coloring, write_matching, write_point_text
from twocross.special import convex_drawing

DATA = os.path.join(os.path.dirname(__file__), "data")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, [json.loads(l) for l in out.splitlines() if l.strip()]


@pytest.fixture
def k9(tmp_path):
    for ext in ("pts", "col"):
        shutil.copy(os.path.join(DATA, f"k9_cr2_2.{ext}"), tmp_path / f"k9.{ext}")
    return tmp_path / "k9.pts", tmp_path / "k9.col"


@pytest.fixture
def seed6(tmp_path):
    D, col, M = random_seed(random.Random(7), 6)
    return (write_point_text(D, tmp_path / "s.pts"), write_coloring(col, tmp_path / "s.col"),
            write_matching(M, D, tmp_path / "s.match"))


def test_crossings(capsys, tmp_path):
    p = write_point_text(convex_drawing(6), tmp_path / "k6.pts")
    code, recs = run(capsys, "crossings", p)
    assert code == 0 and recs == [{"n": 6, "edges": 15, "cr": 15}]


def test_parse_error_exit_code(capsys, tmp_path):
    p = tmp_path / "bad.pts"
    p.write_text("3\n0 0\n1 0\n")
    code, recs = run(capsys, "crossings", p)
    assert code == 2 and recs[0]["error"] == "ParseError"
    code, _ = run(capsys, "crossings", tmp_path / "missing.pts")
    assert code == 2


def test_color_opt(capsys, tmp_path):
    p = write_point_text(convex_drawing(8), tmp_path / "k8.pts")
    code, [rec] = run(capsys, "color-opt", p, "--seed", 3, "--exact", "--out", tmp_path / "k8.col")
    assert code == 0 and rec["mono"] == 18 and rec["method"] == "exact"
    assert len((tmp_path / "k8.col").read_text().strip()) == 28
    p = write_point_text(convex_drawing(10), tmp_path / "k10.pts")
    code, [rec] = run(capsys, "color-opt", p, "--exact", "--budget", 5)
    assert code == 3 and rec["status"] == "budget-exceeded" and rec["lower"] <= 60 <= rec["upper"]


def test_lower_bound_and_export(capsys, k9, tmp_path):
    lp = tmp_path / "k9.lp"
    code, [rec] = run(capsys, "lower-bound", k9[0], "--export-lp", lp, "--with-upper")
    assert code == 0 and rec["value"] == 2 and rec["upper"] == 2 and rec["kind"] == "ilp"
    assert lp.read_text().strip().endswith("End")


def test_lower_bound_budget(capsys, tmp_path):
    p = write_point_text(convex_drawing(9), tmp_path / "k9c.pts")
    code, [rec] = run(capsys, "lower-bound", p, "--budget", 3, "--no-separation", "--method", "bb")
    assert code == 3 and rec["kind"] == "lp-relaxation" and rec["packing"] <= rec["value"] <= 36
    code, [rec] = run(capsys, "lower-bound", p)
    assert code == 0 and rec["value"] == 36 and rec["exact"]


def test_lower_bound_empty_export(capsys, tmp_path):
    p = write_point_text(convex_drawing(4), tmp_path / "k4.pts")
    code, [rec] = run(capsys, "lower-bound", p, "--export-lp", tmp_path / "x.lp")
    assert code == 2


def test_halving_and_duplicate(capsys, seed6, tmp_path):
    pts, col, _ = seed6
    code, [rec] = run(capsys, "halving", pts, col, "--out", tmp_path / "h.match")
    assert code == 0 and len(rec["partners"]) == 6
    code, geo = run(capsys, "duplicate", pts, col, "--k", 2, "--geometric",
                    "--matching", tmp_path / "h.match", "--out", tmp_path / "q")
    assert code == 0 and [r["m"] for r in geo] == [12, 24]
    code, comb = run(capsys, "duplicate", pts, col, "--k", 2)
    counts = {r["k"]: r["cr2"] for r in comb if "k" in r}
    if not any("note" in r for r in comb):
        assert [counts[1], counts[2]] == [r["cr2"] for r in geo]
    assert (tmp_path / "q.pts").exists() and (tmp_path / "q.match").exists()


def test_constant(capsys, seed6):
    pts, col, match = seed6
    code, [rec] = run(capsys, "constant", pts, col, "--matching", match, "--digits", 6)
    assert code == 0
    c = Fraction(rec["constant"])
    assert len(rec["decimal"].split(".")[1]) == 6
    code, [rec] = run(capsys, "constant", pts, col, "--bound", str(c))
    assert code == 2 and rec["bound_ok"] is False
    code, [rec] = run(capsys, "constant", pts, col, "--expect-cr2", -1)
    assert code == 2 and rec["cr2_ok"] is False


def test_constant_odd_set(capsys, k9):
    code, [rec] = run(capsys, "constant", *k9, "--expect-cr2", 2)
    assert code == 2 and rec["cr2_ok"] is True and "error" in rec


def test_scan_db(capsys, tmp_path):
    from twocross.io import write_order_type_db
    from helpers import random_drawing

    rng = random.Random(8)
    p = write_order_type_db([random_drawing(rng, 6, 200) for _ in range(3)], tmp_path / "db.bin", 1)
    code, recs = run(capsys, "scan-db", p, "--n", 6, "--width", 1)
    assert code == 0 and [r["index"] for r in recs[:-1]] == [0, 1, 2]
    assert recs[-1]["records"] == 3
    code, _ = run(capsys, "scan-db", p, "--n", 7, "--width", 1)
    assert code == 2


def test_convex_double_chain_ratio(capsys, tmp_path):
    code, [rec] = run(capsys, "convex", "--n", 10, "--out", tmp_path / "k10.pts")
    assert rec == {"n": 10, "cr": 210, "two_page_optimum": 60}
    code, [rec] = run(capsys, "ratio", tmp_path / "k10.pts")
    assert code == 0 and rec["ratio"] == "2/7" and rec["exact"]
    code, [rec] = run(capsys, "double-chain", "--n", 10)
    assert rec["cr"] == 2025 and Fraction(rec["fraction"]) <= Fraction(1, 3) + Fraction(1, 5)
    code, [rec] = run(capsys, "convex", "--n", 2)
    assert code == 2


def test_pipeline_cli(capsys, seed6, tmp_path):
    pts, col, _ = seed6
    code, recs = run(capsys, "pipeline", pts, "--coloring", col, "--budget", 1,
                     "--seed", 2, "--out", tmp_path / "best")
    assert code == 0 and recs[-1]["budget"] == 1 and recs[-1]["seed"] == 2
    assert (tmp_path / "best.pts").exists()


def test_render(capsys, k9, tmp_path):
    svg = tmp_path / "k9.svg"
    code, _ = run(capsys, "render", *k9, "--svg", svg)
    text = svg.read_text()
    assert code == 0 and text.startswith("<svg") and 'stroke="red"' in text and 'stroke="blue"' in text
    code, _ = run(capsys, "render", k9[0], "--svg", svg)
    assert 'stroke="black"' in svg.read_text()
