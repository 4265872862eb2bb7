"""Orthogonal quartering cuts: two perpendicular lines splitting a planar
point set into four equal parts, plus brute-force higher-dimensional frames."""

from .geometry import (
    HALF_PI,
    Arrangement,
    CutLine,
    DualLine,
    OrthoCut,
    PointSet2D,
    QuadrantCounts,
    axis_cut,
    count_quadrants,
    cut_at_slope,
    dual_transform,
    n_of,
    verify_cut,
)
from .highdim import Hyperplane, OrthoFrame, PointSetND, delta, solve_A, solve_B
from .oracle import brute_force_solve, exact_verify_cut, median_via_pancake
from .selection import OpCounter, kth_smallest, median
from .solver import PhaseConfig, SolverError, SolveStats, solve

__version__ = "0.1.0"
