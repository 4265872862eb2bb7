"""Primal/dual primitives for orthogonal quartering cuts.

A primal point ``(a, b)`` maps to the dual line ``y = a*x - b``.  A primal
line ``y = s*x + c`` corresponds to the dual point ``(s, -c)``, and a point
lies above a line exactly when the dual point of the line lies above the
dual line of the point.

A cut is described by the slope ``a`` of its first line; the second line has
slope ``-1/a``.  Each line sits at the bisecting ("median") position, i.e. it
passes through the median of the dual values at its slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .selection import kth_smallest, median

__all__ = [
    "HALF_PI",
    "DEFAULT_TOL",
    "PointSet2D",
    "DualLine",
    "Arrangement",
    "CutLine",
    "OrthoCut",
    "QuadrantCounts",
    "as_points",
    "dual_transform",
    "dual_untransform",
    "orthogonal_slope",
    "level_value",
    "bisecting_intercept",
    "cut_at_slope",
    "axis_cut",
    "count_quadrants",
    "n_of",
    "verify_cut",
]

#: Slope marker for the vertical/horizontal limit phi -> pi/2.
HALF_PI = math.inf

DEFAULT_TOL = 1e-9


def as_points(P):
    """Coerce a point container to a float array of shape (n, 2)."""
    if isinstance(P, PointSet2D):
        return P.points
    pts = np.asarray(P, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class PointSet2D:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"expected an (n, 2) array of points, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def has_duplicates(self):
        return len(np.unique(self.points, axis=0)) < len(self.points)


@dataclass(frozen=True)
class DualLine:
    """The line ``y = slope*x - offset``."""

    slope: float
    offset: float

    def evaluate(self, x):
        return self.slope * x - self.offset


def dual_transform(p):
    x, y = p
    return DualLine(float(x), float(y))


def dual_untransform(line):
    return (line.slope, line.offset)


@dataclass(frozen=True)
class Arrangement:
    """A set of dual lines stored column-wise."""

    slopes: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.slopes, dtype=float)
        o = np.asarray(self.offsets, dtype=float)
        if s.shape != o.shape or s.ndim != 1 or s.size < 1:
            raise ValueError("an arrangement needs matching 1-d slope/offset arrays")
        object.__setattr__(self, "slopes", s)
        object.__setattr__(self, "offsets", o)

    @classmethod
    def from_points(cls, P):
        pts = as_points(P)
        return cls(pts[:, 0].copy(), pts[:, 1].copy())

    @classmethod
    def from_lines(cls, lines):
        lines = list(lines)
        return cls([l.slope for l in lines], [l.offset for l in lines])

    def __len__(self):
        return self.slopes.size

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return DualLine(float(self.slopes[idx]), float(self.offsets[idx]))
        return Arrangement(self.slopes[idx], self.offsets[idx])

    def values(self, x):
        return self.slopes * x - self.offsets


def orthogonal_slope(a):
    if a == 0:
        raise ZeroDivisionError("slope 0 has no finite orthogonal slope; use axis_cut")
    return -1.0 / a


def level_value(G, p, x, *, counter=None):
    """p-th smallest value among the lines of ``G`` at abscissa ``x``."""
    if not 1 <= p <= len(G):
        raise IndexError(f"level {p} out of range for {len(G)} lines")
    return kth_smallest(G.values(x), p, counter=counter)


def bisecting_intercept(P, slope, *, counter=None):
    """Intercept of the median line of slope ``slope`` (midpoint rule for even n)."""
    pts = as_points(P)
    return median(pts[:, 1] - slope * pts[:, 0], counter=counter)


@dataclass(frozen=True)
class CutLine:
    """``y = slope*x + intercept``, or the vertical line ``x = intercept`` when slope is None."""

    slope: float | None
    intercept: float

    @property
    def vertical(self):
        return self.slope is None

    def to_json(self):
        if self.slope is None:
            return {"slope": None, "x": self.intercept}
        return {"slope": self.slope, "intercept": self.intercept}

    @classmethod
    def from_json(cls, obj):
        if obj.get("slope") is None:
            return cls(None, float(obj["x"]))
        return cls(float(obj["slope"]), float(obj["intercept"]))


@dataclass(frozen=True)
class OrthoCut:
    """Two orthogonal lines with the "first quadrant" = above both lines.

    For a vertical line the side counted as "above" follows the limit of the
    slanted case: the right side for the second line at ``phi = 0`` and the
    left side for the first line at ``phi = pi/2``.  ``anchors1``/``anchors2``
    list indices of input points the lines were constructed through; the
    exact verifier rebuilds the lines from them.
    """

    phi: float
    line1: CutLine
    line2: CutLine
    anchors1: tuple = field(default=(), compare=False)
    anchors2: tuple = field(default=(), compare=False)
    convention: str = "above-both"

    def __post_init__(self):
        l1, l2 = self.line1, self.line2
        if l1.vertical or l2.vertical:
            if not ((l1.vertical and l2.slope == 0) or (l2.vertical and l1.slope == 0)):
                raise ValueError("a vertical cut line must be paired with a horizontal one")
        elif not math.isclose(l1.slope * l2.slope, -1.0, rel_tol=1e-9):
            raise ValueError(f"slopes {l1.slope} and {l2.slope} are not orthogonal")

    def residuals(self, P):
        """Signed residuals (positive = "above") and their magnitude scales, per line."""
        pts = as_points(P)
        out = []
        for which, line in ((1, self.line1), (2, self.line2)):
            x, y = pts[:, 0], pts[:, 1]
            if line.vertical:
                sign = 1.0 if which == 2 else -1.0
                r = sign * (x - line.intercept)
                scale = np.abs(x) + abs(line.intercept)
            else:
                sx = line.slope * x
                r = y - sx - line.intercept
                scale = np.abs(y) + np.abs(sx) + abs(line.intercept)
            out.append((r, scale))
        return out

    def sides(self, P, tol=DEFAULT_TOL):
        """Per-point side labels in {-1, 0, +1} for each line."""
        (r1, s1), (r2, s2) = self.residuals(P)
        t1 = np.where(np.abs(r1) <= tol * s1, 0, np.sign(r1)).astype(int)
        t2 = np.where(np.abs(r2) <= tol * s2, 0, np.sign(r2)).astype(int)
        return t1, t2

    def to_json(self):
        return {"phi": self.phi, "line1": self.line1.to_json(), "line2": self.line2.to_json()}

    @classmethod
    def from_json(cls, obj):
        return cls(
            float(obj["phi"]),
            CutLine.from_json(obj["line1"]),
            CutLine.from_json(obj["line2"]),
        )


@dataclass(frozen=True)
class QuadrantCounts:
    q1: int
    q2: int
    q3: int
    q4: int
    on1: int
    on2: int
    on_both: int
    n: int

    @property
    def quadrants(self):
        return (self.q1, self.q2, self.q3, self.q4)

    @classmethod
    def from_sides(cls, t1, t2):
        def c(mask):
            return int(np.count_nonzero(mask))

        return cls(
            q1=c((t1 > 0) & (t2 > 0)),
            q2=c((t1 > 0) & (t2 < 0)),
            q3=c((t1 < 0) & (t2 < 0)),
            q4=c((t1 < 0) & (t2 > 0)),
            on1=c((t1 == 0) & (t2 != 0)),
            on2=c((t1 != 0) & (t2 == 0)),
            on_both=c((t1 == 0) & (t2 == 0)),
            n=len(t1),
        )

    def to_json(self):
        return {k: getattr(self, k) for k in ("q1", "q2", "q3", "q4", "on1", "on2", "on_both")}


def _anchors(r, scale, tol):
    return tuple(int(i) for i in np.flatnonzero(np.abs(r) <= tol * scale))


def _with_anchors(cut, pts, tol):
    (r1, s1), (r2, s2) = cut.residuals(pts)
    return OrthoCut(cut.phi, cut.line1, cut.line2, _anchors(r1, s1, tol), _anchors(r2, s2, tol))


def cut_at_slope(P, a, *, tol=DEFAULT_TOL, counter=None):
    """Both median lines for the slope pair ``(a, -1/a)``."""
    pts = as_points(P)
    b = orthogonal_slope(a)
    c1 = bisecting_intercept(pts, a, counter=counter)
    c2 = bisecting_intercept(pts, b, counter=counter)
    cut = OrthoCut(math.atan(a), CutLine(float(a), c1), CutLine(b, c2))
    return _with_anchors(cut, pts, tol)


def axis_cut(P, *, at_half_pi=False, tol=DEFAULT_TOL):
    """Horizontal and vertical median lines.

    With ``at_half_pi`` the vertical line is line 1 (the ``phi -> pi/2``
    labelling); otherwise the horizontal line is line 1 (``phi -> 0``).
    """
    pts = as_points(P)
    horiz = CutLine(0.0, median(pts[:, 1]))
    vert = CutLine(None, median(pts[:, 0]))
    if at_half_pi:
        cut = OrthoCut(math.pi / 2, vert, horiz)
    else:
        cut = OrthoCut(0.0, horiz, vert)
    return _with_anchors(cut, pts, tol)


def count_quadrants(P, cut, tol=DEFAULT_TOL):
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    t1, t2 = cut.sides(P, tol)
    return QuadrantCounts.from_sides(t1, t2)


def n_of(P, a, tol=DEFAULT_TOL):
    """Number of points strictly above both median lines of slope ``a``.

    ``a = HALF_PI`` gives the limit value: points left of the vertical
    median line and above the horizontal one.
    """
    if a == HALF_PI:
        return count_quadrants(P, axis_cut(P, at_half_pi=True), tol).q1
    if not a > 0:
        raise ValueError(f"n_of needs a positive slope, got {a}")
    return count_quadrants(P, cut_at_slope(P, a, tol=tol), tol).q1


def verify_cut(P, cut, tol=DEFAULT_TOL):
    """All open quadrants hold at most floor(n/4) points and both lines bisect."""
    pts = as_points(P)
    n = len(pts)
    t1, t2 = cut.sides(pts, tol)
    half = n // 2
    for t in (t1, t2):
        if np.count_nonzero(t > 0) > half or np.count_nonzero(t < 0) > half:
            return False
    quarter = n // 4
    return max(QuadrantCounts.from_sides(t1, t2).quadrants) <= quarter
