"""Slow, independent ground truth for tests and demos.

Nothing here calls into the prune-and-search except :func:`median_via_pancake`,
whose whole point is to run the fast solver on a lifted input.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    OrthoCut,
    QuadrantCounts,
    as_points,
    axis_cut,
    cut_at_slope,
    verify_cut,
)

__all__ = [
    "critical_slopes",
    "brute_force_solve",
    "count_crossings_in_strip",
    "count_crossings_bruteforce",
    "median_via_pancake",
    "exact_sides",
    "exact_count_quadrants",
    "exact_verify_cut",
]


def critical_slopes(P):
    """Sorted slopes in (0, inf) where a median line can pass through two points.

    Positive pairwise slopes are taken as they are; a negative pairwise
    slope ``s`` belongs to the second line, so it contributes ``-1/s``.
    """
    pts = as_points(P)
    i, j = np.triu_indices(len(pts), 1)
    dx = pts[i, 0] - pts[j, 0]
    dy = pts[i, 1] - pts[j, 1]
    ok = dx != 0
    s = dy[ok] / dx[ok]
    s = s[np.isfinite(s) & (s != 0)]
    return np.unique(np.concatenate([s[s > 0], -1.0 / s[s < 0]]))


def _scan_order(crit):
    if crit.size == 0:
        return np.array([1.0])
    mids = (crit[1:] + crit[:-1]) / 2.0
    seq = np.empty(2 * crit.size + 1)
    seq[0] = crit[0] / 2.0
    seq[1::2] = crit
    seq[2:-1:2] = mids
    seq[-1] = crit[-1] * 2.0
    return seq


def _batch_valid(pts, slopes, tol):
    """Boolean mask: does the median cut at each slope pass the quartering test?"""
    x, y = pts[:, 0], pts[:, 1]
    n = len(pts)
    ok = np.ones(slopes.size, dtype=bool)
    sides = []
    for s in (slopes, -1.0 / slopes):
        sx = s[:, None] * x
        v = y - sx
        c = np.median(v, axis=1)[:, None]
        r = v - c
        scale = np.abs(y) + np.abs(sx) + np.abs(c)
        t = np.where(np.abs(r) <= tol * scale, 0, np.sign(r))
        ok &= ((t > 0).sum(axis=1) <= n // 2) & ((t < 0).sum(axis=1) <= n // 2)
        sides.append(t)
    t1, t2 = sides
    for a in (1, -1):
        for b in (1, -1):
            ok &= ((t1 == a) & (t2 == b)).sum(axis=1) <= n // 4
    return ok


def brute_force_solve(P, tol=DEFAULT_TOL, *, chunk=2048):
    """First verifying cut over the axis cut, critical slopes and gap midpoints.

    Returns None when no candidate verifies (NOT_FOUND).  Cost is
    O(n^3): O(n^2) candidates, each checked in O(n).
    """
    pts = as_points(P)
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points, got {len(pts)}")
    cut = axis_cut(pts, tol=tol)
    if verify_cut(pts, cut, tol):
        return cut
    seq = _scan_order(critical_slopes(pts))
    for start in range(0, seq.size, chunk):
        part = seq[start:start + chunk]
        for a in part[_batch_valid(pts, part, tol)]:
            cut = cut_at_slope(pts, float(a), tol=tol)
            if verify_cut(pts, cut, tol):
                return cut
    return None


# -- crossings ---------------------------------------------------------------


def _count_inversions(seq):
    """Merge-sort inversion count: pairs i < j with seq[i] > seq[j] (ties excluded)."""
    seq = list(seq)
    n = len(seq)
    if n < 2:
        return 0
    width, inv = 1, 0
    buf = seq[:]
    while width < n:
        for lo in range(0, n, 2 * width):
            mid, hi = min(lo + width, n), min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if seq[j] < seq[i]:
                    buf[k] = seq[j]
                    inv += mid - i
                    j += 1
                else:
                    buf[k] = seq[i]
                    i += 1
                k += 1
            buf[k:hi] = seq[i:mid] + seq[j:hi]
        seq, buf = buf, seq
        width *= 2
    return inv


def count_crossings_in_strip(G, l, r):
    """Pairs of lines of ``G`` crossing strictly inside ``(l, r)``.

    Lines are ordered by value at ``l`` (ties broken by value at ``r``) and
    inversions of the values at ``r`` are counted.
    """
    if not l < r:
        raise ValueError("need l < r")
    vl, vr = G.values(l), G.values(r)
    order = np.lexsort((vr, vl))
    return _count_inversions(vr[order].tolist())


def count_crossings_bruteforce(G, l, r):
    """O(|G|^2) reference for :func:`count_crossings_in_strip`."""
    vl, vr = G.values(l), G.values(r)
    g = len(G)
    total = 0
    for i in range(g):
        for j in range(i + 1, g):
            if (vl[i] - vl[j]) * (vr[i] - vr[j]) < 0:
                total += 1
    return total


# -- median by reduction -------------------------------------------------------------


def median_via_pancake(values, *, solver=None, tol=DEFAULT_TOL):
    """Median of an odd-length array of distinct reals via one quartering cut.

    The values are rescaled to [0, 1] and lifted onto ``(t, exp(t))``.  The
    second cut line (negative slope, or vertical for the axis cut) meets the
    increasing curve once, at the lifted median.
    """
    vals = np.asarray(values, dtype=float).ravel()
    n = vals.size
    if n < 5 or n % 2 == 0:
        raise ValueError(f"need an odd number (>= 5) of values, got {n}")
    if np.unique(vals).size != n:
        raise ValueError("values must be distinct")
    lo, hi = vals.min(), vals.max()
    t = (vals - lo) / (hi - lo)
    pts = np.column_stack([t, np.exp(t)])
    if solver is None:
        from .solver import solve as solver
    cut = solver(pts)
    if len(cut.anchors2) == 1:
        return float(vals[cut.anchors2[0]])
    cut = brute_force_solve(pts, tol)
    if cut is None or len(cut.anchors2) != 1:
        raise RuntimeError("no lifted point identified on the second cut line")
    return float(vals[cut.anchors2[0]])


# -- exact classification --------------------------------------------------------------


def _exact_line(pts, line, anchors, slope_hint=None):
    """(kind, slope, intercept) in Fractions; kind is 'v' for vertical lines."""
    if line.vertical:
        x0 = pts[anchors[0]][0] if anchors else Fraction(line.intercept)
        return "v", None, x0
    if slope_hint is not None:
        s = slope_hint
    elif len(anchors) >= 2:
        (x1, y1), (x2, y2) = pts[anchors[0]], pts[anchors[1]]
        s = (y1 - y2) / (x1 - x2) if x1 != x2 else Fraction(line.slope)
    else:
        s = Fraction(line.slope)
    if anchors:
        x0, y0 = pts[anchors[0]]
        c = y0 - s * x0
    else:
        c = Fraction(line.intercept)
    return "n", s, c


def exact_sides(P, cut):
    """Side labels in {-1, 0, 1} computed in exact rational arithmetic.

    Float inputs are converted exactly.  Lines are rebuilt through their
    anchor points; a line with two anchors fixes the common direction.
    """
    raw = as_points(P)
    pts = [(Fraction(float(x)), Fraction(float(y))) for x, y in raw]
    a1, a2 = list(cut.anchors1), list(cut.anchors2)
    l1, l2 = cut.line1, cut.line2
    hint1 = hint2 = None
    if not (l1.vertical or l2.vertical) and l1.slope != 0 and l2.slope != 0:
        if len(a1) >= 2:
            s1 = _exact_line(pts, l1, a1)[1]
            hint1, hint2 = s1, -1 / s1
        elif len(a2) >= 2:
            s2 = _exact_line(pts, l2, a2)[1]
            hint1, hint2 = -1 / s2, s2
        else:
            s1 = Fraction(l1.slope)
            hint1, hint2 = s1, -1 / s1
    lines = [_exact_line(pts, l1, a1, hint1), _exact_line(pts, l2, a2, hint2)]
    out = []
    for which, (kind, s, c) in zip((1, 2), lines):
        col = []
        for x, y in pts:
            if kind == "v":
                r = (x - c) if which == 2 else (c - x)
            else:
                r = y - s * x - c
            col.append((r > 0) - (r < 0))
        out.append(np.array(col, dtype=int))
    return out[0], out[1]


def exact_count_quadrants(P, cut):
    t1, t2 = exact_sides(P, cut)
    return QuadrantCounts.from_sides(t1, t2)


def exact_verify_cut(P, cut):
    t1, t2 = exact_sides(P, cut)
    n = len(t1)
    for t in (t1, t2):
        if np.count_nonzero(t > 0) > n // 2 or np.count_nonzero(t < 0) > n // 2:
            return False
    return max(QuadrantCounts.from_sides(t1, t2).quadrants) <= n // 4
