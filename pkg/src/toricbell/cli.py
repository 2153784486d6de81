"""``bell`` command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .bellexpr import (
    BETA_STAR_D3,
    BellExpression,
    build_expression,
    local_bound_formulas,
    quantum_bound,
    ratio,
    ratio_d3,
)
from .lattice import LatticeError, SpecialSiteSet, TorusLattice, validate_special_sites
from .localbound import (
    BudgetExceeded,
    assemble_extremal_strategy,
    certify_special_tile,
    evaluate,
    heuristic_tile_bounds,
    random_search,
    resolve_workers,
    saturating_strategy,
)
from .polyomino import DecompositionError, Polyomino, decompose, validate_decomposition
from .quantum import bell_expectation, ground_state_group, verify_sos

SIG = 12


class UsageError(Exception):
    pass


def fmt(x: float) -> float:
    """Round to 12 significant digits for stable output."""
    if x == 0 or not math.isfinite(x):
        return float(x)
    return float(f"{x:.{SIG}g}")


@dataclass
class RunReport:
    command: str
    inputs: dict
    results: dict
    certified: dict = field(default_factory=dict)
    seed: int | None = None
    wall_clock_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


def _lattice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--special", default="", help="special sites as 'i,j;i,j'")


def _load_lattice(args) -> tuple[TorusLattice, SpecialSiteSet]:
    try:
        lattice = TorusLattice(args.L, args.d)
        special = SpecialSiteSet.parse(lattice, args.special)
    except (LatticeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if special.R:
        report = validate_special_sites(lattice, special)
        if not report.separation_ok:
            raise UsageError("; ".join(report.violations))
    return lattice, special


def _load_expr(path: str) -> BellExpression:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read expression {path}: {exc}") from exc
    lattice = TorusLattice(int(data["L"]), int(data["d"]))
    special = SpecialSiteSet(tuple(lattice.coord(i, j) for i, j in data["special"]))
    expr = build_expression(lattice, special)
    stored = BellExpression.from_dict(data)
    if not _same_terms(expr, stored):
        raise UsageError(f"{path} does not match the toric-code expression for its lattice")
    return expr


def _same_terms(a: BellExpression, b: BellExpression) -> bool:
    if len(a.terms) != len(b.terms):
        return False
    return all(
        s.factors == t.factors and abs(s.coeff - t.coeff) < 1e-9 for s, t in zip(a.terms, b.terms)
    )


def cmd_build(args) -> tuple[RunReport, int]:
    lattice, special = _load_lattice(args)
    expr = build_expression(lattice, special)
    text = expr.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text + "\n")
    res = {"terms": len(expr.terms), "variables": len(expr.variables()), "N": lattice.N, "R": special.R}
    return RunReport("build", vars(args).copy(), res), 0


def cmd_local_bound(args) -> tuple[RunReport, int]:
    expr = _load_expr(args.expr)
    lattice, d, N, R = expr.lattice, expr.d, expr.N, expr.R
    results: dict = {}
    certified = {}
    workers = resolve_workers(args.threads)
    status = 0
    if R == 0:
        bmax = 2.0 * N
        smin = local_bound_formulas(N, d, 0, 0, 0)[1]
        results.update(beta_max=fmt(bmax), beta_min=fmt(smin))
        certified["tile"] = True
    elif d == 3 or args.certify:
        try:
            tb = certify_special_tile(d, workers=workers)
        except BudgetExceeded as exc:
            raise UsageError(str(exc)) from exc
        bmax, bmin = local_bound_formulas(N, d, R, tb.beta_max, tb.beta_min)
        results.update(beta_star_max=fmt(tb.beta_max), beta_star_min=fmt(tb.beta_min),
                       witness_reference={"L": 3, "special": "1,2"},
                       beta_max=fmt(bmax), beta_min=fmt(bmin),
                       compatible_witnesses={
                           "max": _witness_json(tb.compatible_max[:1]),
                           "min": _witness_json(tb.compatible_min[:1])})
        certified["tile"] = True
    else:
        tb = heuristic_tile_bounds(d, args.random_iters or 100000, args.seed)
        # an explicit strategy at the quantum value pins the local maximum exactly
        strat = saturating_strategy(lattice, expr.special, seed=args.seed)
        if strat is not None:
            results.update(beta_max=fmt(evaluate(expr, strat)), beta_star_max=fmt(4 * d),
                           quantum_bound=fmt(quantum_bound(N, d, R)))
        else:
            bmax = local_bound_formulas(N, d, R, tb.beta_max, tb.beta_min)[0]
            results.update(beta_star_max_lower=fmt(tb.beta_max), beta_max_estimate=fmt(bmax))
        bmin = local_bound_formulas(N, d, R, tb.beta_max, tb.beta_min)[1]
        results.update(beta_star_min_upper=fmt(tb.beta_min), beta_min_estimate=fmt(bmin))
        certified.update(tile=False, local_max_equals_quantum=strat is not None)

    if d == 3 and args.certify:
        report = validate_special_sites(lattice, expr.special)
        if report.ok and lattice.L >= 3:
            vmax = evaluate(expr, assemble_extremal_strategy(lattice, expr.special, "max"))
            vmin = evaluate(expr, assemble_extremal_strategy(lattice, expr.special, "min"))
            tight = abs(vmax - results["beta_max"]) < 1e-9 and abs(vmin - results["beta_min"]) < 1e-9
            results.update(strategy_max=fmt(vmax), strategy_min=fmt(vmin))
            certified["tight"] = tight
            status = 0 if tight else 1
        else:
            certified["tight"] = False
            results["tightness_violations"] = report.violations
    if args.random_iters:
        rs = random_search(expr, args.random_iters, args.seed)
        results.update(random_max=fmt(rs.best_max), random_min=fmt(rs.best_min))
        if rs.best_max > results.get("beta_max", math.inf) + 1e-9:
            status = 1
        if rs.best_min < results.get("beta_min", -math.inf) - 1e-9:
            status = 1
    return RunReport("local-bound", vars(args).copy(), results, certified, args.seed), status


def _witness_json(ws) -> list[dict]:
    return [{f"{s.i},{s.j}:{x}": e for (s, x), e in sorted(w.items()) if e} for w in ws]


def cmd_quantum_bound(args) -> tuple[RunReport, int]:
    expr = _load_expr(args.expr)
    d = expr.d
    if args.sector == "all":
        sectors = [(a, b) for a in range(d) for b in range(d)]
    else:
        try:
            a, b = (int(v) for v in args.sector.split(","))
        except ValueError as exc:
            raise UsageError(f"bad sector {args.sector!r}") from exc
        sectors = [(a % d, b % d)]
    bound = quantum_bound(expr.N, d, expr.R)
    values = {f"{a},{b}": bell_expectation(expr, ground_state_group(expr.lattice, (a, b))) for a, b in sectors}
    worst = max(abs(v - bound) for v in values.values())
    ok = worst < 1e-9
    results = {"bound": fmt(bound), "expectations": {k: fmt(v) for k, v in values.items()},
               "max_deviation_below_1e-9": ok}
    return RunReport("quantum-bound", vars(args).copy(), results, {"saturated": ok}), 0 if ok else 1


def cmd_verify_sos(args) -> tuple[RunReport, int]:
    lattice, special = _load_lattice(args)
    if args.party_dim < 1 or args.trials < 1:
        raise UsageError("party-dim and trials must be positive")
    expr = build_expression(lattice, special)
    rep = verify_sos(expr, args.party_dim, args.trials, args.seed)
    ok = rep.residual < args.tol
    results = {"residual_below_tol": ok, "tol": args.tol, "bound": fmt(rep.bound),
               "residual_order": int(math.floor(math.log10(rep.residual))) if rep.residual > 0 else None}
    return RunReport("verify-sos", vars(args).copy(), results, {"pass": ok}, args.seed), 0 if ok else 1


def cmd_tile_decompose(args) -> tuple[RunReport, int]:
    cells = []
    try:
        for line in Path(args.cells).read_text().splitlines():
            line = line.split("#")[0].strip()
            if line:
                a, b = line.replace(",", " ").split()
                cells.append((int(a), int(b)))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read cells: {exc}") from exc
    poly = Polyomino.of(cells, args.period)
    try:
        tiles = decompose(poly)
    except DecompositionError as exc:
        raise UsageError(str(exc)) from exc
    rep = validate_decomposition(poly, tiles)
    results = {"tiles": [{"shape": t.shape, "cells": [list(c) for c in t.cells]} for t in tiles],
               "valid": rep.ok, "errors": rep.errors}
    return RunReport("tile-decompose", vars(args).copy(), results, {"valid": rep.ok}), 0 if rep.ok else 1


def cmd_ratio(args) -> tuple[RunReport, int]:
    try:
        lo, hi = (int(v) for v in args.R_range.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad --R-range {args.R_range!r}, expected lo:hi") from exc
    if lo < 0 or hi < lo:
        raise UsageError("empty R range")
    if args.d == 3:
        beta_star = BETA_STAR_D3
    elif args.beta_star is not None:
        beta_star = args.beta_star
    else:
        raise UsageError("--beta-star is required for d != 3")
    rows = []
    for R in range(lo, hi + 1):
        try:
            lam = ratio(args.N, args.d, R, beta_star)
        except ValueError:
            break
        closed = ratio_d3(args.N, R) if args.d == 3 else None
        rows.append((R, lam, closed))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R", "Lambda"] + (["Lambda_closed_form"] if args.d == 3 else []))
    for R, lam, closed in rows:
        w.writerow([R, f"{lam:.{SIG}g}"] + ([f"{closed:.{SIG}g}"] if closed is not None else []))
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    increasing = all(b[1] > a[1] for a, b in zip(rows, rows[1:]))
    results = {"rows": len(rows), "strictly_increasing": increasing,
               "tight": args.d == 3}
    return RunReport("ratio", vars(args).copy(), results, {"tight": args.d == 3}), 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bell", description="Toric-code Bell expressions and their bounds")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: $BELL_THREADS or 1)")
    p.add_argument("--report", default=None, help="write the JSON run report here")
    # accept the global flags after the subcommand too; SUPPRESS keeps top-level values
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--report", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    b = sub.add_parser("build", help="write the expanded expression as JSON")
    _lattice_args(b)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_build)

    lb = sub.add_parser("local-bound", help="local bounds of an expression")
    lb.add_argument("--expr", required=True)
    lb.add_argument("--certify", action="store_true", help="exhaustive tile search and strategy assembly")
    lb.add_argument("--random-iters", type=int, default=0)
    lb.add_argument("--seed", type=int, default=0)
    lb.set_defaults(func=cmd_local_bound)

    qb = sub.add_parser("quantum-bound", help="ground-state Bell value in the stabilizer formalism")
    qb.add_argument("--expr", required=True)
    qb.add_argument("--sector", default="0,0", help="'a,b' or 'all'")
    qb.set_defaults(func=cmd_quantum_bound)

    vs = sub.add_parser("verify-sos", help="randomized check of the sum-of-squares identity")
    _lattice_args(vs)
    vs.add_argument("--party-dim", type=int, default=2)
    vs.add_argument("--trials", type=int, default=20)
    vs.add_argument("--seed", type=int, default=0)
    vs.add_argument("--tol", type=float, default=1e-9)
    vs.set_defaults(func=cmd_verify_sos)

    td = sub.add_parser("tile-decompose", help="decompose a polyomino given as 'a b' lines")
    td.add_argument("--cells", required=True)
    td.add_argument("--period", type=int, default=None, help="torus period of the cell grid")
    td.set_defaults(func=cmd_tile_decompose)

    r = sub.add_parser("ratio", help="quantum/local ratio as a function of R")
    r.add_argument("--d", type=int, default=3)
    r.add_argument("--N", type=int, default=200)
    r.add_argument("--R-range", dest="R_range", default="0:10")
    r.add_argument("--beta-star", type=float, default=None)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_ratio)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    t0 = time.perf_counter()
    try:
        report, status = args.func(args)
    except UsageError as exc:
        print(f"bell: error: {exc}", file=sys.stderr)
        return 2
    report.wall_clock_s = round(time.perf_counter() - t0, 3)
    report.inputs.pop("func", None)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text)
    else:
        print(text, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
