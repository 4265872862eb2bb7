"""Instance files, generators, result records and SVG plots."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .geometry import OrthoCut, as_points, count_quadrants, verify_cut

__all__ = [
    "InstanceError",
    "Instance",
    "read_instance",
    "parse_csv",
    "parse_json",
    "write_csv",
    "write_json_instance",
    "generate",
    "dumps",
    "cut_record",
    "frame_record",
    "svg_plot",
    "resolve_seed",
]

DISTRIBUTIONS = ("uniform", "gaussian", "grid")


class InstanceError(ValueError):
    """Malformed instance file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class Instance:
    """Either a single point array (``points``) or several (``sets``)."""

    points: np.ndarray | None = None
    sets: list | None = None

    @property
    def dimension(self):
        arr = self.points if self.points is not None else self.sets[0]
        return arr.shape[1]


def parse_csv(text):
    rows, lines = [], []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        try:
            vals = [float(v) for v in row]
        except ValueError:
            raise InstanceError(f"non-numeric value in {','.join(row)!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise InstanceError("non-finite coordinate", lineno)
        if rows and len(vals) != len(rows[0]):
            raise InstanceError(f"expected {len(rows[0])} coordinates, got {len(vals)}", lineno)
        rows.append(vals)
        lines.append(lineno)
    if not rows:
        raise InstanceError("no points")
    return Instance(points=np.array(rows, dtype=float))


def _as_matrix(raw, where, dimension=None):
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise InstanceError(f"{where}: points must be equal-length numeric lists") from None
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InstanceError(f"{where}: expected a non-empty list of points")
    if dimension is not None and arr.shape[1] != dimension:
        raise InstanceError(f"{where}: points have {arr.shape[1]} coordinates, dimension is {dimension}")
    if not np.isfinite(arr).all():
        raise InstanceError(f"{where}: non-finite coordinate")
    return arr


def parse_json(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(exc.msg, exc.lineno) from None
    if not isinstance(obj, dict):
        raise InstanceError("top level must be an object")
    dim = obj.get("dimension")
    if "sets" in obj:
        sets = [_as_matrix(s, f"set {i}", dim) for i, s in enumerate(obj["sets"])]
        if not sets:
            raise InstanceError("no sets")
        if len({s.shape[1] for s in sets}) != 1:
            raise InstanceError("sets differ in dimension")
        return Instance(sets=sets)
    if "points" in obj:
        return Instance(points=_as_matrix(obj["points"], "points", dim))
    raise InstanceError('expected a "points" or "sets" key')


def read_instance(path, fmt=None):
    fmt = fmt or ("json" if str(path).lower().endswith(".json") else "csv")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_json(text) if fmt == "json" else parse_csv(text)


def _g(v):
    return format(float(v), ".17g")


def write_csv(path, points):
    pts = np.asarray(points, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for row in pts:
            fh.write(",".join(_g(v) for v in row) + "\n")


def write_json_instance(path, points=None, sets=None):
    if sets is not None:
        sets = [np.asarray(s, dtype=float) for s in sets]
        obj = {"dimension": int(sets[0].shape[1]), "sets": [s.tolist() for s in sets]}
    else:
        pts = np.asarray(points, dtype=float)
        obj = {"dimension": int(pts.shape[1]), "points": pts.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj) + "\n")


def generate(n, dist="gaussian", seed=0, d=2):
    """Deterministic instance of ``n`` points.

    ``grid`` picks distinct lattice points from a small square lattice, so
    the result is full of collinear triples and repeated coordinates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        return rng.uniform(0.0, 1.0, size=(n, d))
    if dist == "gaussian":
        return rng.standard_normal(size=(n, d))
    if dist == "grid":
        side = max(2, math.ceil(n ** (1.0 / d)))
        idx = rng.permutation(side**d)[:n]
        return np.array(np.unravel_index(idx, (side,) * d), dtype=float).T
    raise ValueError(f"unknown distribution {dist!r}; choose from {DISTRIBUTIONS}")


def resolve_seed(flag):
    """--seed wins; otherwise PANCAKE_SEED; otherwise 0."""
    if flag is not None:
        return int(flag)
    env = os.environ.get("PANCAKE_SEED", "").strip()
    return int(env) if env else 0


# -- JSON -----------------------------------------------------------------------


def dumps(obj, indent=2):
    """JSON text with floats written to 17 significant digits."""
    return "".join(_emit(obj, indent, 0))


def _emit(obj, indent, depth):
    pad = " " * (indent * (depth + 1))
    end = " " * (indent * depth)
    if obj is None or isinstance(obj, (bool, str)):
        yield json.dumps(obj)
    elif isinstance(obj, (int, np.integer)):
        yield str(int(obj))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        yield _g(v) if math.isfinite(v) else "null"
    elif isinstance(obj, dict):
        if not obj:
            yield "{}"
            return
        yield "{\n"
        for k, (key, val) in enumerate(obj.items()):
            yield pad + json.dumps(str(key)) + ": "
            yield from _emit(val, indent, depth + 1)
            yield ",\n" if k < len(obj) - 1 else "\n"
        yield end + "}"
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            yield "[]"
        elif all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in items):
            yield "[" + ", ".join("".join(_emit(v, indent, depth + 1)) for v in items) + "]"
        else:
            yield "[\n"
            for k, val in enumerate(items):
                yield pad
                yield from _emit(val, indent, depth + 1)
                yield ",\n" if k < len(items) - 1 else "\n"
            yield end + "]"
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def cut_record(P, cut, *, seed, stats=None, status=None, tol=1e-9):
    """ResultRecord for a planar cut (``cut=None`` means not found)."""
    n = len(as_points(P))
    if cut is None:
        return {"status": status or "not_found", "cut": None, "counts": None, "n": n, "seed": seed,
                "stats": stats.to_json() if stats else None}
    counts = count_quadrants(P, cut, tol)
    ok = verify_cut(P, cut, tol)
    return {
        "status": status or ("ok" if ok else "error"),
        "cut": cut.to_json(),
        "counts": counts.to_json(),
        "n": n,
        "seed": seed,
        "stats": stats.to_json() if stats else None,
    }


def frame_record(sets, frame, *, seed, stats=None, tol=1e-9):
    """ResultRecord for a hyperplane frame; counts are listed per set and per pair."""
    from .highdim import quadrant_counts_pair, verify_frame

    sets = [np.asarray(s, dtype=float) for s in sets]
    n = [len(s) for s in sets]
    st = None
    if stats is not None:
        st = {"tuples": stats.tuples, "degenerate": stats.degenerate, "candidates": stats.candidates}
    if frame is None:
        return {"status": "not_found", "cut": None, "counts": None, "n": n, "seed": seed, "stats": st}
    hs = frame.hyperplanes
    counts = []
    for s, X in enumerate(sets):
        for i in range(len(hs)):
            for j in range(i + 1, len(hs)):
                c = quadrant_counts_pair(X, hs[i], hs[j], tol).to_json()
                counts.append({"set": s, "pair": [i, j], **c})
    ok = verify_frame(sets, frame, tol)
    return {"status": "ok" if ok else "error", "cut": frame.to_json(), "counts": counts, "n": n,
            "seed": seed, "stats": st}


# -- SVG --------------------------------------------------------------------------


def _clip_line(line, box):
    """Endpoints of a cut line inside the box (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = box
    if line.vertical:
        return (line.intercept, y0), (line.intercept, y1)
    s, c = line.slope, line.intercept
    pts = [(x0, s * x0 + c), (x1, s * x1 + c)]
    if s != 0:
        pts += [((y0 - c) / s, y0), ((y1 - c) / s, y1)]
    eps = 1e-12 * (abs(x1 - x0) + abs(y1 - y0))
    inside = sorted({p for p in pts if x0 - eps <= p[0] <= x1 + eps and y0 - eps <= p[1] <= y1 + eps})
    if len(inside) < 2:
        return None
    return inside[0], inside[-1]


def svg_plot(P, cut: OrthoCut, *, size=480, tol=1e-9):
    """Static SVG of the points, both cut lines and the quadrant counts."""
    pts = as_points(P)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - 0.1 * span, hi + 0.1 * span
    box = (lo[0], hi[0], lo[1], hi[1])

    def sx(x):
        return (x - lo[0]) / (hi[0] - lo[0]) * size

    def sy(y):
        return size - (y - lo[1]) / (hi[1] - lo[1]) * size

    t1, t2 = cut.sides(pts, tol)
    colour = {(1, 1): "#1b9e77", (1, -1): "#d95f02", (-1, -1): "#7570b3", (-1, 1): "#e7298a"}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    for line, stroke in ((cut.line1, "#333333"), (cut.line2, "#999999")):
        seg = _clip_line(line, box)
        if seg:
            (ax, ay), (bx, by) = seg
            out.append(f'<line x1="{sx(ax):.3f}" y1="{sy(ay):.3f}" x2="{sx(bx):.3f}" y2="{sy(by):.3f}" '
                       f'stroke="{stroke}" stroke-width="1.5"/>')
    for (x, y), a, b in zip(pts, t1, t2):
        fill = colour.get((int(a), int(b)), "black")
        out.append(f'<circle cx="{sx(x):.3f}" cy="{sy(y):.3f}" r="3" fill="{fill}"/>')
    c = count_quadrants(pts, cut, tol)
    label = f"q1={c.q1} q2={c.q2} q3={c.q3} q4={c.q4} on={c.on1 + c.on2 + c.on_both} n={c.n}"
    out.append(f'<text x="8" y="{size - 8}" font-family="monospace" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
