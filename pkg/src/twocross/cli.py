"""Command-line interface.  Every command prints one JSON record per line.

Exit codes: 0 success, 2 parse or validation error, 3 budget exhausted (a
partial result is still printed).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from . import io as tio
from .bounds import (
    certify_lower_bound,
    cycle_packing_bound,
    enumerate_odd_cycles,
    export_covering_ilp,
    solve_covering_ilp,
)
from .coloring import as_coloring, best_coloring, coloring_str, exact_cr2, graph_of, mono_crossings
from .duplication import (
    classify,
    constant_from_coefficients,
    duplicate_k,
    render_decimal,
    seed_state,
    simulate_counts,
    solve_coefficients,
)
from .errors import BudgetExceeded, EmptyFamily, TwoCrossError
from .halving import check_matching, find_halving_matching
from .special import convex_drawing, double_chain, double_chain_coloring, ratio_report, two_page_optimum

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


class _Invalid(Exception):
    pass


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def emit(rec: dict, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(_jsonable(rec)) + "\n")
    out.flush()


def _load(args):
    D = tio.read_point_text(args.file)
    col = tio.read_coloring(args.coloring, D) if getattr(args, "coloring", None) else None
    return D, col


def _matching(args, D, col):
    if getattr(args, "matching", None):
        M = tio.read_matching(args.matching, D)
        check_matching(D, col, M)
        return M
    return find_halving_matching(D, col)


def cmd_crossings(args):
    D, _ = _load(args)
    emit({"n": D.n, "edges": D.n_edges, "cr": D.crossing_count()})


def cmd_color_opt(args):
    D, _ = _load(args)
    res = best_coloring(D, seed=args.seed, restarts=args.restarts)
    rec = {"n": D.n, "cr": D.crossing_count(), "method": res.method, "seed": res.seed,
           "mono": res.mono_count, "coloring": coloring_str(res.coloring)}
    if args.exact:
        try:
            val, col = exact_cr2(D, budget=args.budget, upper=res)
        except BudgetExceeded as exc:
            rec.update(method="exact", status="budget-exceeded", lower=exc.lower, upper=exc.upper,
                       nodes=exc.nodes)
            emit(rec)
            return EXIT_BUDGET
        rec.update(method="exact", mono=val, coloring=coloring_str(col))
    if args.out:
        tio.write_coloring(as_coloring(rec["coloring"], D.n_edges), args.out)
    emit(rec)


def cmd_lower_bound(args):
    D, _ = _load(args)
    G = graph_of(D)
    fam = enumerate_odd_cycles(G, args.max_cycle_len)
    if args.export_lp:
        try:
            export_covering_ilp(G, fam, args.export_lp)
        except EmptyFamily:
            raise _Invalid("no odd cycles: nothing to export")
    pack = cycle_packing_bound(G, fam)
    if args.no_separation:
        cert = solve_covering_ilp(G, fam, args.budget, method=args.method) if len(fam) else pack
    else:
        upper = best_coloring(D, seed=0).mono_count if args.with_upper else None
        cert = certify_lower_bound(G, args.max_cycle_len, args.budget, upper=upper, method=args.method)
    rec = {"n": D.n, "cr": G.n_crossings, "cycles": len(fam), "packing": pack.value,
           "value": cert.value, "kind": cert.kind, "exact": cert.exact, "nodes": cert.nodes}
    if not args.no_separation and args.with_upper:
        rec["upper"] = upper
    emit(rec)
    if cert.kind == "lp-relaxation":
        return EXIT_BUDGET


def cmd_halving(args):
    D, col = _load(args)
    M = find_halving_matching(D, col)
    emit({"n": D.n, "partners": [M.partner(D, p) for p in range(D.n)], "edges": list(M.match)})
    if args.out:
        tio.write_matching(M, D, args.out)


def cmd_duplicate(args):
    D, col = _load(args)
    M = _matching(args, D, col)
    if args.geometric:
        Q, qc, QM = D, col, M
        for k in range(1, args.k + 1):
            Q, qc, QM = duplicate_k(Q, qc, QM, 1)
            emit({"k": k, "m": Q.n, "cr2": mono_crossings(Q, qc), "cr": Q.crossing_count()})
        if args.out:
            tio.write_point_text(Q, args.out + ".pts")
            tio.write_coloring(qc, args.out + ".col")
            tio.write_matching(QM, Q, args.out + ".match")
        return
    st, pre = seed_state(D, col, M)
    if pre:
        emit({"note": "case-5 point present; counting starts after one pre-step", "m": st.m})
    for k, v in enumerate(simulate_counts(st, args.k)):
        emit({"k": k, "m": st.m << k, "cr2": v})


def cmd_constant(args):
    D, col = _load(args)
    cr2 = mono_crossings(D, col)
    rec = {"n": D.n, "cr2": cr2}
    ok = True
    if args.expect_cr2 is not None:
        rec["cr2_ok"] = cr2 == args.expect_cr2
        ok &= rec["cr2_ok"]
    try:
        M = _matching(args, D, col)
    except TwoCrossError as exc:
        rec["error"] = str(exc)
        emit(rec)
        return EXIT_INVALID
    coef = solve_coefficients(D, col, M)
    const = constant_from_coefficients(coef)
    rec.update(m=coef.m, prestep=coef.prestep, A=coef.A, B=coef.B, C=coef.C, D=coef.D,
               constant=const, decimal=render_decimal(const, args.digits),
               profiles=[p.case for p in classify(D, col, M)])
    if args.bound is not None:
        rec["bound_ok"] = const < Fraction(args.bound)
        ok &= rec["bound_ok"]
    emit(rec)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_scan_db(args):
    total = certified = 0
    worst = None
    for r in tio.scan_db(args.file, args.n, args.width, args.big_endian, args.jobs,
                         seed=args.seed, permissive=args.permissive, limit=args.limit):
        emit(r.as_dict())
        total += 1
        certified += r.certified
        if r.certified and (worst is None or r.cr2_upper < worst):
            worst = r.cr2_upper
    emit({"records": total, "certified": certified, "min_certified_cr2": worst})


def cmd_convex(args):
    D = convex_drawing(args.n)
    if args.out:
        tio.write_point_text(D, args.out)
    emit({"n": args.n, "cr": D.crossing_count(), "two_page_optimum": two_page_optimum(args.n)})


def cmd_double_chain(args):
    dc = double_chain(args.n)
    col = double_chain_coloring(dc)
    cr = dc.drawing.crossing_count()
    mono = mono_crossings(dc.drawing, col)
    emit({"n": args.n, "height": dc.height, "cr": cr, "mono": mono, "fraction": Fraction(mono, cr)})


def cmd_ratio(args):
    D, _ = _load(args)
    r = ratio_report(D, effort=args.effort, seed=args.seed)
    emit({"cr": r.cr, "cr2_best": r.cr2_best, "ratio": r.ratio, "exact": r.exact,
          "method": r.method, "flags": list(r.flags)})


def cmd_pipeline(args):
    from .pipeline import pipeline

    D, col = _load(args)
    res = pipeline(D, col, target_n=args.target_n, budget=args.budget, seed=args.seed)
    for i, c in enumerate(res.history):
        emit({"round": i, "best_constant": c})
    for w in res.warnings:
        logging.getLogger("twocross").warning(w)
    rec = {"seed": args.seed, "budget": args.budget, "target_n": res.target_n,
           "best_cr2_at_target": res.best_at_target.cr2, "best_constant": res.constant}
    if res.constant is not None:
        rec["best_constant_decimal"] = render_decimal(res.constant, 10)
        rec["best_n"] = res.best.drawing.n
    emit(rec)
    if args.out:
        b = res.best_at_target
        tio.write_point_text(b.drawing, args.out + ".pts")
        tio.write_coloring(b.coloring, args.out + ".col")


def render_svg(D, colors=None, size: int = 600) -> str:
    xs = [float(p.x) for p in D.points]
    ys = [float(p.y) for p in D.points]
    x0, y0 = min(xs), min(ys)
    span = max(max(xs) - x0, max(ys) - y0) or 1.0
    pad = 20
    s = (size - 2 * pad) / span

    def xy(i):
        return pad + (xs[i] - x0) * s, size - pad - (ys[i] - y0) * s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for k, (i, j) in enumerate(D.edges):
        stroke = "black" if colors is None else ("red" if colors[k] == 0 else "blue")
        (a, b), (c, d) = xy(i), xy(j)
        out.append(f'<line x1="{a:.2f}" y1="{b:.2f}" x2="{c:.2f}" y2="{d:.2f}" '
                   f'stroke="{stroke}" stroke-width="1"/>')
    for i in range(D.n):
        a, b = xy(i)
        out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_render(args):
    D, col = _load(args)
    with open(args.svg, "w") as fh:
        fh.write(render_svg(D, col))
    emit({"svg": args.svg, "n": D.n, "edges": D.n_edges})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twocross", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crossings")
    p.add_argument("file")
    p.set_defaults(func=cmd_crossings)

    p = sub.add_parser("color-opt")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_color_opt)

    p = sub.add_parser("lower-bound")
    p.add_argument("file")
    p.add_argument("--max-cycle-len", type=int, default=5)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--export-lp")
    p.add_argument("--no-separation", action="store_true",
                   help="solve only over the enumerated short cycles")
    p.add_argument("--method", choices=("highs", "bb"), default="highs",
                   help="MILP solver or the built-in branch and bound")
    p.add_argument("--with-upper", action="store_true",
                   help="seed the search with a heuristic colouring value")
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("halving")
    p.add_argument("file")
    p.add_argument("coloring")
    p.add_argument("--out")
    p.set_defaults(func=cmd_halving)

    p = sub.add_parser("duplicate")
    p.add_argument("file")
    p.add_argument("coloring")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--geometric", action="store_true")
    p.add_argument("--matching")
    p.add_argument("--out", help="prefix for the final .pts/.col/.match files")
    p.set_defaults(func=cmd_duplicate)

    p = sub.add_parser("constant")
    p.add_argument("file")
    p.add_argument("coloring")
    p.add_argument("--digits", type=int, default=12)
    p.add_argument("--matching")
    p.add_argument("--expect-cr2", type=int)
    p.add_argument("--bound", help="require constant < BOUND (decimal or p/q)")
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("scan-db")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--width", type=int, choices=(1, 2), required=True)
    p.add_argument("--big-endian", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int)
    p.add_argument("--permissive", action="store_true")
    p.set_defaults(func=cmd_scan_db)

    p = sub.add_parser("convex")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convex)

    p = sub.add_parser("double-chain")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_double_chain)

    p = sub.add_parser("ratio")
    p.add_argument("file")
    p.add_argument("--effort", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("pipeline")
    p.add_argument("file")
    p.add_argument("--coloring")
    p.add_argument("--target-n", type=int)
    p.add_argument("--budget", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="prefix for the best drawing at the target size")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("render")
    p.add_argument("file")
    p.add_argument("coloring", nargs="?")
    p.add_argument("--svg", required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        code = args.func(args)
    except BudgetExceeded as exc:
        emit({"status": "budget-exceeded", "lower": exc.lower, "upper": exc.upper, "nodes": exc.nodes})
        return EXIT_BUDGET
    except (TwoCrossError, ValueError, _Invalid, OSError) as exc:
        emit({"status": "error", "error": type(exc).__name__, "message": str(exc)})
        return EXIT_INVALID
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
