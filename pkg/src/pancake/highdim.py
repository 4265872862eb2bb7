"""Brute-force orthogonal hyperplane frames in R^d.

Two searches, both enumerating point tuples in lexicographic order:

* :func:`solve_A`: d mutually orthogonal hyperplanes such that every pair
  quarters one set ``X``.  Hyperplane ``i`` (1-based) is fixed by
  ``d - i + 1`` points together with the normals of the hyperplanes before
  it.
* :func:`solve_B`: two orthogonal hyperplanes quartering each of ``m`` sets
  in dimension ``delta(m)``.  Both are fixed by points of the smallest set.

A point tuple fixes a direction through the affine hull of its points.  Each
direction is tried with two offsets, in this order: the median of the
projections of the reference set (a bisecting position) and the offset
through the tuple itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import DEFAULT_TOL, QuadrantCounts

__all__ = [
    "PointSetND",
    "Hyperplane",
    "OrthoFrame",
    "HighDimConfig",
    "HighDimStats",
    "CapExceeded",
    "delta",
    "hyperplane_through",
    "null_vector",
    "quadrant_counts_pair",
    "pair_ok",
    "verify_frame",
    "exact_verify_frame",
    "candidate_count_A",
    "solve_A",
    "solve_B",
]

OFFSET_MODES = ("median", "anchored")


class CapExceeded(ValueError):
    """Instance exceeds the desk-scale limits; pass ``force=True`` to run anyway."""


@dataclass(frozen=True)
class PointSetND:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"expected an (n, d) array, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)

    @property
    def d(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


def _as_nd(X):
    return X.points if isinstance(X, PointSetND) else np.asarray(X, dtype=float)


@dataclass(frozen=True)
class Hyperplane:
    """``{x : normal . x = offset}`` with a unit normal.

    ``basis`` holds the indices of the points that fixed the direction and
    ``through`` those that fixed the offset (one point, or two whose
    projections were averaged); both index the reference set.
    """

    normal: np.ndarray
    offset: float
    basis: tuple = field(default=(), compare=False)
    through: tuple = field(default=(), compare=False)

    def __post_init__(self):
        nv = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(nv) - 1.0) > 1e-12:
            raise ValueError("hyperplane normal must have unit length")
        object.__setattr__(self, "normal", nv)

    def values(self, X):
        return _as_nd(X) @ self.normal - self.offset

    def flipped(self):
        return Hyperplane(-self.normal, -self.offset, self.basis, self.through)


@dataclass(frozen=True)
class OrthoFrame:
    hyperplanes: tuple
    source_set: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hyperplanes", tuple(self.hyperplanes))
        N = np.array([h.normal for h in self.hyperplanes])
        off = N @ N.T - np.eye(len(N))
        if np.abs(off).max(initial=0.0) > 1e-9:
            raise ValueError("frame normals are not mutually orthogonal")

    @property
    def normals(self):
        return np.array([h.normal for h in self.hyperplanes])

    @property
    def offsets(self):
        return np.array([h.offset for h in self.hyperplanes])

    def orthogonality_residual(self):
        N = self.normals
        return float(np.abs(N @ N.T - np.eye(len(N))).max(initial=0.0))

    def to_json(self):
        # + 0.0 turns -0.0 into 0.0
        return {"normals": (self.normals + 0.0).tolist(), "offsets": (self.offsets + 0.0).tolist()}


@dataclass(frozen=True)
class HighDimConfig:
    tol: float = DEFAULT_TOL
    offsets: tuple = OFFSET_MODES
    force: bool = False
    max_d_A: int = 3
    max_n_A: int = 24
    max_m_B: int = 2
    max_n1_B: int = 8
    prune: bool = True


@dataclass
class HighDimStats:
    tuples: int = 0
    degenerate: int = 0
    candidates: int = 0
    per_level: dict = field(default_factory=dict)

    @property
    def complete(self):
        """Index tuples generated for the last hyperplane, i.e. full frames."""
        return self.per_level[max(self.per_level)] if self.per_level else 0


def delta(m):
    """Dimension ``m + 2**floor(log2 m)`` for m sets."""
    m = int(m)
    if m < 1:
        raise ValueError(f"delta needs m >= 1, got {m}")
    return m + (1 << (m.bit_length() - 1))


# -- null spaces ---------------------------------------------------------------


def null_vector(rows, *, rtol=1e-9):
    """Basis vector of the 1-d null space of a (d-1) x d system, or None.

    Gaussian elimination with partial pivoting.  Works on floats and, with
    ``rtol=0``, on exact rationals.
    """
    A = [list(r) for r in rows]
    if not A:
        raise ValueError("empty system")
    d = len(A[0])
    if len(A) != d - 1:
        raise ValueError(f"need {d - 1} equations in {d} unknowns, got {len(A)}")
    scale = max((abs(v) for r in A for v in r), default=0) or 1
    pivots = []
    row = 0
    for col in range(d):
        if row == len(A):
            break
        best = max(range(row, len(A)), key=lambda k: abs(A[k][col]))
        if abs(A[best][col]) <= rtol * scale:
            continue
        A[row], A[best] = A[best], A[row]
        piv = A[row][col]
        for k in range(row + 1, len(A)):
            factor = A[k][col] / piv
            if factor:
                A[k] = [a - factor * b for a, b in zip(A[k], A[row])]
        pivots.append(col)
        row += 1
    if len(pivots) != d - 1:
        return None
    free = next(c for c in range(d) if c not in pivots)
    x = [0] * d
    x[free] = 1
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        s = sum(A[r][k] * x[k] for k in range(c + 1, d))
        x[c] = -s / A[r][c]
    return x


def _canonical(v):
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def hyperplane_through(points, orthogonal_to=()):
    """Hyperplane through ``points`` whose normal is orthogonal to ``orthogonal_to``.

    Returns None when the constraints do not pin down a single direction.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k, d = pts.shape
    if k + len(orthogonal_to) != d:
        raise ValueError(f"{k} points and {len(orthogonal_to)} normals do not fix a hyperplane in R^{d}")
    rows = [pts[i] - pts[0] for i in range(1, k)] + [np.asarray(u, dtype=float) for u in orthogonal_to]
    if not rows:
        # d = 1: a point on the line
        return Hyperplane(np.ones(1), float(pts[0, 0]))
    v = null_vector([list(r) for r in rows])
    if v is None:
        return None
    v = np.array(v, dtype=float)
    v = _canonical(v / np.linalg.norm(v))
    return Hyperplane(v, float(v @ pts[0]))


def _batch_normals(X, tuples, prev):
    """Unit normals for many point tuples at once; rows with NaN are degenerate."""
    T = np.asarray(tuples)
    d = X.shape[1]
    base = X[T[:, 0]]
    diffs = X[T[:, 1:]] - base[:, None, :]
    if prev:
        P = np.broadcast_to(np.asarray(prev), (len(T), len(prev), d))
        M = np.concatenate([diffs, P], axis=1)
    else:
        M = diffs
    if M.shape[1] == 0:
        return np.ones((len(T), 1))
    _, s, vt = np.linalg.svd(M)
    v = vt[:, -1, :]
    rank_ok = s[:, -1] > 1e-9 * np.maximum(s[:, 0], 1e-300)
    # canonical sign: first clearly nonzero component positive
    idx = np.argmax(np.abs(v) > 1e-12, axis=1)
    sign = np.sign(v[np.arange(len(v)), idx])
    v = v * np.where(sign == 0, 1, sign)[:, None]
    v[~rank_ok] = np.nan
    return v


# -- classification ------------------------------------------------------------------


def _sides(vals, tol, X, h):
    scale = np.abs(_as_nd(X)) @ np.abs(h.normal) + abs(h.offset)
    return np.where(np.abs(vals) <= tol * scale, 0, np.sign(vals)).astype(int)


def quadrant_counts_pair(X, h1, h2, tol=DEFAULT_TOL):
    if abs(float(h1.normal @ h2.normal)) > 1e-9:
        raise ValueError("hyperplanes are not orthogonal")
    pts = _as_nd(X)
    t1 = _sides(h1.values(pts), tol, pts, h1)
    t2 = _sides(h2.values(pts), tol, pts, h2)
    return QuadrantCounts.from_sides(t1, t2)


def _pair_ok_sides(t1, t2):
    n = len(t1)
    half, quarter = n // 2, n // 4
    for t in (t1, t2):
        if np.count_nonzero(t > 0) > half or np.count_nonzero(t < 0) > half:
            return False
    return max(QuadrantCounts.from_sides(t1, t2).quadrants) <= quarter


def pair_ok(X, h1, h2, tol=DEFAULT_TOL):
    """Both hyperplanes bisect X and each open region has at most floor(n/4) points."""
    pts = _as_nd(X)
    return _pair_ok_sides(_sides(h1.values(pts), tol, pts, h1), _sides(h2.values(pts), tol, pts, h2))


def verify_frame(sets, frame, tol=DEFAULT_TOL):
    """Every pair of hyperplanes of ``frame`` quarters every set."""
    sets = [_as_nd(s) for s in sets]
    hs = frame.hyperplanes
    return all(pair_ok(X, hs[i], hs[j], tol) for X in sets for i, j in itertools.combinations(range(len(hs)), 2))


def _exact_frame(ref, frame):
    pts = [[Fraction(float(v)) for v in row] for row in ref]
    planes, normals = [], []
    for h in frame.hyperplanes:
        if h.basis and h.through:
            b = [pts[i] for i in h.basis]
            rows = [[a - c for a, c in zip(p, b[0])] for p in b[1:]] + normals
            v = null_vector(rows, rtol=0) if rows else [Fraction(1)]
            if v is None:
                return None
            # orient like the float normal
            if sum(Fraction(float(a)) * c for a, c in zip(h.normal, v)) < 0:
                v = [-c for c in v]
        else:
            v = [Fraction(float(c)) for c in h.normal]
        if len(h.through) == 1:
            c = sum(a * x for a, x in zip(v, pts[h.through[0]]))
        elif len(h.through) == 2:
            c = sum(a * (x + y) for a, x, y in zip(v, pts[h.through[0]], pts[h.through[1]])) / 2
        else:
            c = Fraction(float(h.offset))
        normals.append(v)
        planes.append((v, c))
    return planes


def exact_verify_frame(sets, frame, ref=None):
    """Re-check :func:`verify_frame` in rational arithmetic.

    Hyperplanes are rebuilt from the reference-set points recorded in
    ``basis``/``through``; ``ref`` defaults to ``sets[frame.source_set]``.
    """
    sets = [_as_nd(s) for s in sets]
    ref = sets[frame.source_set] if ref is None else _as_nd(ref)
    planes = _exact_frame(ref, frame)
    if planes is None:
        return False
    for X in sets:
        rows = [[Fraction(float(v)) for v in row] for row in X]
        side = []
        for v, c in planes:
            col = []
            for row in rows:
                r = sum(a * x for a, x in zip(v, row)) - c
                col.append((r > 0) - (r < 0))
            side.append(np.array(col, dtype=int))
        for i, j in itertools.combinations(range(len(planes)), 2):
            if not _pair_ok_sides(side[i], side[j]):
                return False
    return True


# -- enumeration -------------------------------------------------------------------


def candidate_count_A(n, d):
    """Complete index tuples visited by an unpruned solve_A run with one offset mode."""
    return math.prod(math.comb(n, d - i) for i in range(d))


def _median_offsets(proj):
    """Median of each row with the indices of the point(s) defining it."""
    n = proj.shape[1]
    order = np.argsort(proj, axis=1, kind="stable")
    rows = np.arange(len(proj))
    if n % 2:
        k = order[:, n // 2]
        return proj[rows, k], [(int(i),) for i in k]
    a, b = order[:, n // 2 - 1], order[:, n // 2]
    return (proj[rows, a] + proj[rows, b]) / 2.0, [(int(i), int(j)) for i, j in zip(a, b)]


def _candidates(ref, tuples, prev_normals, modes, stats):
    """Hyperplane candidates for a batch of tuples, in (tuple, mode) order."""
    N = _batch_normals(ref, tuples, prev_normals)
    good = ~np.isnan(N[:, 0])
    level = len(prev_normals)
    stats.per_level[level] = stats.per_level.get(level, 0) + len(tuples)
    stats.tuples += len(tuples)
    stats.degenerate += int(np.count_nonzero(~good))
    N, tuples = N[good], [t for t, g in zip(tuples, good) if g]
    if not tuples:
        return []
    proj = N @ ref.T
    med, med_through = _median_offsets(proj)
    anchored = proj[np.arange(len(N)), [t[0] for t in tuples]]
    out = []
    for k, t in enumerate(tuples):
        for mode in modes:
            if mode == "median":
                out.append(Hyperplane(N[k], float(med[k]), tuple(t), med_through[k]))
            else:
                out.append(Hyperplane(N[k], float(anchored[k]), tuple(t), (t[0],)))
    stats.candidates += len(out)
    return out


def _side_matrix(X, planes, tol):
    return np.array([_sides(h.values(X), tol, X, h) for h in planes])


def _pair_mask(sets, prev, cands, tol):
    """For each candidate: does it pair correctly with every earlier plane on every set?"""
    ok = np.ones(len(cands), dtype=bool)
    for X in sets:
        n = len(X)
        half, quarter = n // 2, n // 4
        C = _side_matrix(X, cands, tol)
        ok &= ((C > 0).sum(axis=1) <= half) & ((C < 0).sum(axis=1) <= half)
        for h in prev:
            t = _sides(h.values(X), tol, X, h)
            for a in (1, -1):
                for b in (1, -1):
                    ok &= ((t == a) & (C == b)).sum(axis=1) <= quarter
    return ok


def _search(ref, sets, d, level, prev, cfg, stats):
    """Depth-first search over hyperplane ``level`` (0-based) given earlier planes."""
    k = d - level
    normals = [h.normal for h in prev]
    for tuples in _chunks(itertools.combinations(range(len(ref)), k), 4096):
        cands = _candidates(ref, tuples, normals, cfg.offsets, stats)
        if not cands:
            continue
        mask = _pair_mask(sets, prev, cands, cfg.tol) if (prev and cfg.prune) else np.ones(len(cands), bool)
        for h, good in zip(cands, mask):
            if not good:
                continue
            chain = prev + [h]
            if level + 1 == d:
                if not cfg.prune or verify_frame(sets, OrthoFrame(chain), cfg.tol):
                    if cfg.prune:
                        return chain
                continue
            found = _search(ref, sets, d, level + 1, chain, cfg, stats)
            if found is not None:
                return found
    return None


def _chunks(it, size):
    chunk = []
    for x in it:
        chunk.append(x)
        if len(chunk) == size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def solve_A(X, cfg=None, *, stats=None, levels=None):
    """Mutually orthogonal hyperplanes every pair of which quarters X.

    ``levels`` (default ``d``) limits the search to the first few
    hyperplanes.  Returns None when the enumeration is exhausted (NOT_FOUND).
    """
    cfg = cfg or HighDimConfig()
    stats = stats if stats is not None else HighDimStats()
    pts = _as_nd(X)
    n, d = pts.shape
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    if d < 2:
        raise ValueError("need dimension >= 2")
    if not cfg.force and (d > cfg.max_d_A or n > cfg.max_n_A):
        raise CapExceeded(f"solve_A capped at d <= {cfg.max_d_A}, n <= {cfg.max_n_A} (got d={d}, n={n}); use force")
    chain = _search(pts, [pts], d, 0, [], cfg, stats)
    return None if chain is None else OrthoFrame(chain)


def _search_B(ref, sets, cfg, stats):
    d = ref.shape[1]
    for tuples in _chunks(itertools.combinations(range(len(ref)), d), 1024):
        for h1 in _candidates(ref, tuples, [], cfg.offsets, stats):
            for t2 in _chunks(itertools.combinations(range(len(ref)), d - 1), 4096):
                cands = _candidates(ref, t2, [h1.normal], cfg.offsets, stats)
                if not cands:
                    continue
                mask = _pair_mask(sets, [h1], cands, cfg.tol)
                for h2, good in zip(cands, mask):
                    if good:
                        return [h1, h2]
    return None


def solve_B(sets, cfg=None, *, stats=None):
    """Two orthogonal hyperplanes quartering every set, built from the smallest set.

    Returns None when the enumeration is exhausted (NOT_FOUND).
    """
    cfg = cfg or HighDimConfig()
    stats = stats if stats is not None else HighDimStats()
    arrs = [_as_nd(s) for s in sets]
    m = len(arrs)
    if m < 1:
        raise ValueError("need at least one set")
    d = delta(m)
    for X in arrs:
        if X.ndim != 2 or X.shape[1] != d:
            raise ValueError(f"{m} sets must live in dimension delta({m}) = {d}")
        if len(X) < 4:
            raise ValueError("every set needs at least 4 points")
    order = sorted(range(m), key=lambda i: len(arrs[i]))
    ref = arrs[order[0]]
    if not cfg.force and (m > cfg.max_m_B or len(ref) > cfg.max_n1_B):
        raise CapExceeded(
            f"solve_B capped at m <= {cfg.max_m_B}, n1 <= {cfg.max_n1_B} (got m={m}, n1={len(ref)}); use force"
        )
    chain = _search_B(ref, arrs, cfg, stats)
    return None if chain is None else OrthoFrame(chain, source_set=order[0])
