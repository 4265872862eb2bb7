"""Command-line front end.

Exit codes: 0 success, 1 bad input (parse or schema error), 2 solver
failure, NOT_FOUND or failed verification, 3 desk-scale cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import bench
from .geometry import OrthoCut, count_quadrants, verify_cut
from .highdim import CapExceeded, HighDimConfig, HighDimStats, solve_A, solve_B
from .io import (
    InstanceError,
    cut_record,
    dumps,
    frame_record,
    generate,
    read_instance,
    resolve_seed,
    svg_plot,
    write_csv,
    write_json_instance,
)
from .oracle import brute_force_solve, median_via_pancake
from .solver import PhaseConfig, SolveStats, SolverError, solve

log = logging.getLogger("pancake")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CAP = 0, 1, 2, 3


def _emit(record, out=None):
    (out or sys.stdout).write(dumps(record) + "\n")


def _planar(inst):
    if inst.points is None or inst.dimension != 2:
        raise InstanceError("expected a single planar point set")
    if len(inst.points) < 4:
        raise InstanceError(f"need at least 4 points, got {len(inst.points)}")
    return inst.points


def cmd_gen(args):
    seed = resolve_seed(args.seed)
    pts = generate(args.n, args.dist, seed, d=args.dim)
    if args.out.lower().endswith(".json"):
        write_json_instance(args.out, pts)
    else:
        write_csv(args.out, pts)
    return EXIT_OK


def cmd_solve2d(args):
    seed = resolve_seed(args.seed)
    pts = _planar(read_instance(args.input, args.format))
    stats = SolveStats()
    try:
        cut = solve(pts, PhaseConfig(rng_seed=seed, tol=args.tol), stats=stats)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        _emit({**cut_record(pts, None, seed=seed, stats=stats), "status": "error", "message": str(exc)})
        return EXIT_SOLVER
    record = cut_record(pts, cut, seed=seed, stats=stats, tol=args.tol)
    _emit(record)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(svg_plot(pts, cut, tol=args.tol))
    return EXIT_OK if record["status"] == "ok" else EXIT_SOLVER


def cmd_oracle2d(args):
    seed = resolve_seed(args.seed)
    pts = _planar(read_instance(args.input, args.format))
    cut = brute_force_solve(pts, args.tol)
    if cut is None:
        log.warning("oracle2d: NOT_FOUND for %d points", len(pts))
    _emit(cut_record(pts, cut, seed=seed, tol=args.tol))
    return EXIT_OK if cut is not None else EXIT_SOLVER


def _load_cut(path):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if isinstance(obj, dict) and "cut" in obj:
        obj = obj["cut"]
    try:
        return OrthoCut.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"cut does not match the result schema: {exc}") from None


def cmd_verify(args):
    pts = _planar(read_instance(args.input, args.format))
    try:
        cut = _load_cut(args.cut)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"cut file: {exc.msg}", exc.lineno) from None
    ok = verify_cut(pts, cut, args.tol)
    counts = count_quadrants(pts, cut, args.tol)
    _emit({"status": "ok" if ok else "fail", "counts": counts.to_json(), "n": len(pts)})
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_median_demo(args):
    seed = resolve_seed(args.seed)
    vals = [float(v) for tok in args.values for v in tok.replace(",", " ").split()]
    try:
        med = median_via_pancake(vals, solver=lambda p: solve(p, PhaseConfig(rng_seed=seed)))
    except ValueError as exc:
        raise InstanceError(str(exc)) from None
    _emit({"status": "ok", "median": med, "cut": None, "counts": None, "n": len(vals), "seed": seed})
    return EXIT_OK


def _hd_cfg(args):
    return HighDimConfig(tol=args.tol, force=args.force)


def cmd_solve_a(args):
    seed = resolve_seed(args.seed)
    inst = read_instance(args.input, args.format)
    if inst.points is None:
        raise InstanceError("solve-a expects a single point set")
    stats = HighDimStats()
    frame = solve_A(inst.points, _hd_cfg(args), stats=stats)
    if frame is None:
        log.warning("solve-a: NOT_FOUND after %d tuples", stats.tuples)
    _emit(frame_record([inst.points], frame, seed=seed, stats=stats, tol=args.tol))
    return EXIT_OK if frame is not None else EXIT_SOLVER


def cmd_solve_b(args):
    seed = resolve_seed(args.seed)
    inst = read_instance(args.input, args.format)
    sets = inst.sets if inst.sets is not None else [inst.points]
    stats = HighDimStats()
    frame = solve_B(sets, _hd_cfg(args), stats=stats)
    if frame is None:
        log.warning("solve-b: NOT_FOUND after %d tuples", stats.tuples)
    _emit(frame_record(sets, frame, seed=seed, stats=stats, tol=args.tol))
    return EXIT_OK if frame is not None else EXIT_SOLVER


def cmd_bench(args):
    seed = resolve_seed(args.seed)
    ns = [int(v) for tok in args.ns for v in tok.replace(",", " ").split()]
    if args.compare:
        report = bench.run_compare(ns, args.trials, seed)
    else:
        report = bench.run_scaling(ns, args.trials, seed, parallel=args.parallel)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    else:
        sys.stdout.write(report.to_csv())
    print(report.summary(), file=sys.stderr if not args.csv else sys.stdout)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="pancake", description="Orthogonal quartering cuts of point sets.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, tol=True):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $PANCAKE_SEED or 0)")
        if tol:
            p.add_argument("--tol", type=float, default=1e-9)

    def infile(p):
        p.add_argument("input")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("n", type=int)
    p.add_argument("out")
    p.add_argument("--dist", choices=("uniform", "gaussian", "grid"), default="gaussian")
    p.add_argument("--dim", type=int, default=2)
    common(p, tol=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve2d", help="prune-and-search cut of a planar set")
    infile(p)
    common(p)
    p.add_argument("--svg", default=None)
    p.add_argument("--json", action="store_true", help="accepted for compatibility; output is always JSON")
    p.set_defaults(func=cmd_solve2d)

    p = sub.add_parser("oracle2d", help="brute-force cut of a planar set")
    infile(p)
    common(p)
    p.set_defaults(func=cmd_oracle2d)

    p = sub.add_parser("verify", help="check a cut against a point set")
    infile(p)
    p.add_argument("cut", help="JSON file holding a result record or a bare cut object")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("median-demo", help="median of an odd list through one quartering cut")
    p.add_argument("values", nargs="+")
    common(p, tol=False)
    p.set_defaults(func=cmd_median_demo)

    for name, fn, helptext in (("solve-a", cmd_solve_a, "d mutually orthogonal quartering hyperplanes"),
                               ("solve-b", cmd_solve_b, "two orthogonal hyperplanes quartering m sets")):
        p = sub.add_parser(name, help=helptext)
        infile(p)
        common(p)
        p.add_argument("--force", action="store_true", help="lift the desk-scale size caps")
        p.set_defaults(func=fn)

    p = sub.add_parser("bench", help="scaling or solver-vs-oracle benchmark")
    p.add_argument("--ns", nargs="+", default=[",".join(str(2**k) for k in range(15, 22))])
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--compare", action="store_true", help="solver vs oracle (n <= 300)")
    p.add_argument("--csv", default=None)
    common(p, tol=False)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc} (--force)", file=sys.stderr)
        return EXIT_CAP
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
