"""Linear-time prune-and-search for an orthogonal quartering cut.

The search runs in the dual arrangement ``H = D(P)``.  For a slope ``a`` of
the first cut line the two cut lines correspond to the dual points
``(a, mu(a))`` and ``(f(a), mu(f(a)))`` with ``f(a) = -1/a`` and ``mu`` the
median level.  Each phase

1. splits the current slope interval ``T`` (and its image ``S = f(T)``) into
   strips holding few pairwise crossings,
2. keeps a strip on whose ends the balance function changes sign,
3. encloses the tracked levels in a trapezoid on each strip, and
4. discards every line missing both trapezoids, adjusting level indices and
   the target count.

Balance function
----------------
Let ``w(a)`` count the dual lines above both dual points, where a line
passing through one of the points contributes 1/2 for that point.  Then
``4*w(a) - n`` is antisymmetric under a quarter turn of the cut, it is zero
at a generic slope only for a valid cut, and a strict sign change between
two generic slopes brackets an event slope (a cut line through two points)
that is a valid cut.  The search keeps such a sign change inside ``T``.
Internally the target is stored as the integer ``m`` (initially
``floor(n/4)``) plus the fixed remainder ``n % 4``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    Arrangement,
    OrthoCut,
    as_points,
    axis_cut,
    cut_at_slope,
    verify_cut,
)
from .selection import OpCounter, kth_smallest

__all__ = [
    "PhaseConfig",
    "SearchState",
    "Trapezoid",
    "PruneTally",
    "SolveStats",
    "DegeneratePhase",
    "SolverError",
    "initial_state",
    "adjusted_balance",
    "split_interval",
    "divide_interval",
    "choose_straddling_interval",
    "build_trapezoid",
    "certify_containment",
    "classify_and_prune",
    "phase",
    "base_case",
    "solve",
    "rotate",
]


class DegeneratePhase(RuntimeError):
    """A phase or the base case could not make verified progress."""


class SolverError(RuntimeError):
    """No valid cut after rotation retries and the oracle fallback."""


@dataclass(frozen=True)
class PhaseConfig:
    epsilon: float = 1 / 16
    alpha: float = 1 / 128
    C: int | None = None
    sample_pairs: int = 4096
    base_threshold: int = 64
    max_retries: int = 8
    rotation_retries: int = 4
    rng_seed: int = 0
    tol: float = DEFAULT_TOL
    selection: str = "mom"
    oracle_fallback: bool = True

    @property
    def parts(self):
        """Number of sub-intervals per division; defaults to ceil(2/alpha)."""
        return self.C if self.C is not None else math.ceil(2 / self.alpha)

    def validate(self):
        if not (0 < self.alpha < 1 and self.epsilon > 0):
            raise ValueError("need 0 < alpha < 1 and epsilon > 0")
        # sqrt(alpha/2) <= epsilon, compared without rounding
        if self.alpha > 2 * self.epsilon**2:
            raise ValueError(
                f"sqrt(alpha/2) = {math.sqrt(self.alpha / 2):.6g} exceeds epsilon = {self.epsilon:.6g}"
            )
        if 8 * self.epsilon > 0.5:
            raise ValueError(f"8*epsilon = {8 * self.epsilon:.6g} exceeds 1/2")
        if self.base_threshold < 2 or self.parts < 2:
            raise ValueError("base_threshold and C must be at least 2")
        return self


@dataclass
class SearchState:
    G: Arrangement
    ids: np.ndarray
    T: tuple
    p: int
    q: int
    m: int
    frac: int
    even: bool
    m_removed_above_both: int = 0
    bal_l: int | None = None
    bal_r: int | None = None
    attempts: int = 0

    @property
    def S(self):
        return (_f(self.T[0]), _f(self.T[1]))

    def __len__(self):
        return len(self.G)


@dataclass(frozen=True)
class Trapezoid:
    l: float
    r: float
    y_low_l: float
    y_high_l: float
    y_low_r: float
    y_high_r: float

    def lower(self, x):
        t = (x - self.l) / (self.r - self.l)
        return self.y_low_l + t * (self.y_low_r - self.y_low_l)

    def upper(self, x):
        t = (x - self.l) / (self.r - self.l)
        return self.y_high_l + t * (self.y_high_r - self.y_high_l)

    def contains(self, x, y):
        return (self.l <= x <= self.r) and self.lower(x) <= y <= self.upper(x)

    def position(self, G):
        """Per line: +1 strictly above, -1 strictly below, 0 touching the trapezoid."""
        vl, vr = G.values(self.l), G.values(self.r)
        above = (vl > self.y_high_l) & (vr > self.y_high_r)
        below = (vl < self.y_low_l) & (vr < self.y_low_r)
        return above.astype(int) - below.astype(int)


@dataclass(frozen=True)
class PruneTally:
    k_pp: int = 0
    k_pm: int = 0
    k_mp: int = 0
    k_mm: int = 0
    kept: int = 0


@dataclass
class SolveStats:
    phases: int = 0
    retries: int = 0
    rotations: int = 0
    comparisons: int = 0
    elapsed_ns: int = 0
    fallback: bool = False
    method: str = ""
    trace: list | None = None

    def to_json(self):
        return {
            "phases": self.phases,
            "retries": self.retries,
            "comparisons": self.comparisons,
            "elapsed_ns": self.elapsed_ns,
        }


def _f(a):
    if a == 0:
        return -math.inf
    if math.isinf(a):
        return -0.0
    return -1.0 / a


def rotate(P, theta):
    """Rotate points counterclockwise by ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    pts = as_points(P)
    return pts @ np.array([[c, s], [-s, c]])


def initial_state(H):
    n = len(H)
    if n < 4:
        raise ValueError(f"need at least 4 lines, got {n}")
    p = (n + 1) // 2
    return SearchState(
        G=H,
        ids=np.arange(n),
        T=(0.0, math.inf),
        p=p,
        q=p,
        m=n // 4,
        frac=n % 4,
        even=n % 2 == 0,
    )


# -- balance evaluation -----------------------------------------------------


def _level_point(vals, p, even, counter):
    v = kth_smallest(vals, p, counter=counter)
    if not even:
        return v
    # (p+1)-th smallest: v again if tied, else the smallest value above v
    if counter is not None:
        counter.add(2 * vals.size)
    if np.count_nonzero(vals <= v) >= p + 1:
        return v
    return (v + float(vals[vals > v].min())) / 2.0


def _twice_weight(vals, mu):
    # 2 for strictly above, 1 for through the point, 0 below
    return (vals > mu).astype(np.int64) * 2 + (vals == mu)


def adjusted_balance(st, a, counter=None):
    """``4*(weighted count of lines above both points) - 4*m - (n % 4)`` at slope ``a``.

    Also reports whether the slope is generic for the surviving lines: the
    expected number of lines pass through each dual point and no line
    passes through both.
    """
    b = _f(a)
    v1 = st.G.values(a)
    v2 = st.G.values(b)
    mu1 = _level_point(v1, st.p, st.even, counter)
    mu2 = _level_point(v2, st.q, st.even, counter)
    w1 = _twice_weight(v1, mu1)
    w2 = _twice_weight(v2, mu2)
    if counter is not None:
        counter.add(4 * v1.size)
    bal = int(np.dot(w1, w2)) - (4 * st.m + st.frac)
    on1, on2 = w1 == 1, w2 == 1
    expected = 0 if st.even else 1
    generic = (
        int(np.count_nonzero(on1)) == expected
        and int(np.count_nonzero(on2)) == expected
        and not np.any(on1 & on2)
    )
    return bal, generic


# -- interval division ---------------------------------------------


def _sample_crossings(G, lo, hi, k, rng):
    g = len(G)
    i = rng.integers(g, size=k)
    j = rng.integers(g, size=k)
    ds = G.slopes[i] - G.slopes[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (G.offsets[i] - G.offsets[j]) / ds
    x = x[np.isfinite(x) & (x > lo) & (x < hi)]
    # repeated pairs give repeated crossings; a midpoint of equal values would be an event
    return np.unique(x)


def split_interval(G, lo, hi, cfg, rng):
    """Interior cut points splitting ``(lo, hi)`` into about ``cfg.parts`` strips.

    Cut points are midpoints between consecutive sampled crossing
    abscissae, taken at every ``ceil(K'/C)``-th sampled crossing, where
    ``K'`` is the number of sampled crossings falling inside the interval.
    """
    xs = _sample_crossings(G, lo, hi, cfg.sample_pairs, rng)
    if xs.size < 2:
        return np.empty(0)
    step = max(1, math.ceil(xs.size / cfg.parts))
    idx = np.arange(step - 1, xs.size - 1, step)
    cuts = np.unique((xs[idx] + xs[idx + 1]) / 2.0)
    return cuts[(cuts > lo) & (cuts < hi)]


def divide_interval(st, cfg, rng):
    """Strip pairs ``(T_i, S_i)`` with ``S_i = f(T_i)`` partitioning ``T``."""
    lo, hi = st.T
    bounds = np.concatenate([[lo], split_interval(st.G, lo, hi, cfg, rng), [hi]])
    return [((bounds[i], bounds[i + 1]), (_f(bounds[i]), _f(bounds[i + 1]))) for i in range(bounds.size - 1)]


# -- choose a straddling strip ---------------------------------------


def choose_straddling_interval(parts, evaluate, bal_l, bal_r):
    """Binary search for a strip whose end balances strictly change sign.

    ``parts`` is a list of consecutive ``(T_i, S_i)`` strips and
    ``evaluate(a)`` returns the balance at an interior boundary slope.
    Returns ``(index, hit, bal_lo, bal_hi)``; ``hit`` is a boundary slope
    with zero balance when one is met, in which case ``index`` is None.
    """
    if bal_l * bal_r >= 0:
        raise DegeneratePhase(f"end balances {bal_l}, {bal_r} do not straddle zero")
    lo, hi = 0, len(parts)
    blo, bhi = bal_l, bal_r
    while hi - lo > 1:
        mid = (lo + hi) // 2
        a = parts[mid][0][0]
        b = evaluate(a)
        if b == 0:
            return None, a, None, None
        if (b > 0) == (blo > 0):
            lo, blo = mid, b
        else:
            hi, bhi = mid, b
    return lo, None, blo, bhi


# -- trapezoids -------------------------------------------------------


def _clamp(k, g):
    return min(max(k, 1), g)


def build_trapezoid(G, level, strip, epsilon, *, top_level=None, counter=None):
    """Convex hull of the band levels ``level -/+ ceil(eps*|G|)`` at the strip ends.

    ``top_level`` (default ``level``) is the highest tracked level; the upper
    band edge is measured from it.
    """
    l, r = strip
    if not (math.isfinite(l) and math.isfinite(r) and l < r):
        raise ValueError(f"trapezoid strip must be finite with l < r, got {strip}")
    g = len(G)
    e = math.ceil(epsilon * g)
    top = level if top_level is None else top_level
    lo_k, hi_k = _clamp(level - e, g), _clamp(top + e, g)
    vl, vr = G.values(l), G.values(r)
    return Trapezoid(
        l,
        r,
        kth_smallest(vl, lo_k, counter=counter),
        kth_smallest(vl, hi_k, counter=counter),
        kth_smallest(vr, lo_k, counter=counter),
        kth_smallest(vr, hi_k, counter=counter),
    )


def certify_containment(G, trap, level, top_level=None):
    """Cheap sufficient test that levels ``level..top_level`` stay inside ``trap``.

    A line below the lower edge somewhere on the strip is below it at one of
    the strip ends.  If fewer than ``level`` lines do so, the level cannot
    drop below the edge; symmetrically for the upper edge.
    """
    top = level if top_level is None else top_level
    vl, vr = G.values(trap.l), G.values(trap.r)
    below_somewhere = np.count_nonzero((vl < trap.y_low_l) | (vr < trap.y_low_r))
    above_somewhere = np.count_nonzero((vl > trap.y_high_l) | (vr > trap.y_high_r))
    return below_somewhere <= level - 1 and above_somewhere <= len(G) - top


# -- pruning ------------------------------------------------------------


def classify_and_prune(st, tau, sigma, counter=None):
    """Discard lines strictly above or below both trapezoids."""
    pt = tau.position(st.G)
    ps = sigma.position(st.G)
    if counter is not None:
        counter.add(8 * len(st.G))
    k_pp = int(np.count_nonzero((pt > 0) & (ps > 0)))
    k_pm = int(np.count_nonzero((pt > 0) & (ps < 0)))
    k_mp = int(np.count_nonzero((pt < 0) & (ps > 0)))
    k_mm = int(np.count_nonzero((pt < 0) & (ps < 0)))
    keep = (pt == 0) | (ps == 0)
    kept = int(np.count_nonzero(keep))
    tally = PruneTally(k_pp, k_pm, k_mp, k_mm, kept)
    if kept == len(st.G):
        return replace(st), tally
    new = replace(
        st,
        G=st.G[keep],
        ids=st.ids[keep],
        p=st.p - (k_mp + k_mm),
        q=st.q - (k_mm + k_pm),
        m=st.m - k_pp,
        m_removed_above_both=st.m_removed_above_both + k_pp,
    )
    return new, tally


# -- one phase ------------------------------------------------------------------


def _narrow(st, cfg, rng, counter, try_cut):
    """Steps 1-2: returns (T', bal_l', bal_r') or a verified cut on an exact hit."""

    def evaluate(a):
        return adjusted_balance(st, a, counter)[0]

    def settle(hit):
        cut = try_cut(hit)
        if cut is None:
            raise DegeneratePhase(f"zero balance at slope {hit} but the cut does not verify")
        return cut

    parts = divide_interval(st, cfg, rng)
    i, hit, blo, bhi = choose_straddling_interval(parts, evaluate, st.bal_l, st.bal_r)
    if hit is not None:
        return settle(hit)
    (l, r), (sl, sr) = parts[i]
    # refine on the orthogonal side: divide S_i, map the cut points back by f
    s_cuts = split_interval(st.G, sl, sr, cfg, rng)
    t_cuts = np.array([_f(s) for s in s_cuts])
    t_cuts = t_cuts[(t_cuts > l) & (t_cuts < r)]
    bounds = np.concatenate([[l], np.sort(t_cuts), [r]])
    sub = [((bounds[k], bounds[k + 1]), None) for k in range(bounds.size - 1)]
    j, hit, blo2, bhi2 = choose_straddling_interval(sub, evaluate, blo, bhi)
    if hit is not None:
        return settle(hit)
    return (sub[j][0], blo2, bhi2)


def phase(st, cfg, rng, *, counter=None, try_cut=None, trace=None):
    """One prune-and-search phase with Las Vegas retries.

    Returns the next :class:`SearchState`, or an :class:`OrthoCut` when a
    boundary evaluation lands exactly on a valid cut.
    """
    g = len(st.G)
    top_p = st.p + 1 if st.even else st.p
    top_q = st.q + 1 if st.even else st.q
    for attempt in range(cfg.max_retries + 1):
        try:
            res = _narrow(st, cfg, rng, counter, try_cut)
        except DegeneratePhase:
            continue
        if isinstance(res, OrthoCut):
            return res
        (l, r), bl, br = res
        if not (l < r and _f(l) < _f(r)):
            # strip collapsed in floating point
            continue
        tau =build_trapezoid(st.G, st.p, (l, r), cfg.epsilon, top_level=top_p, counter=counter)
        sigma = build_trapezoid(st.G, st.q, (_f(l), _f(r)), cfg.epsilon, top_level=top_q, counter=counter)
        ok_tau = certify_containment(st.G, tau, st.p, top_p)
        ok_sigma = certify_containment(st.G, sigma, st.q, top_q)
        new, tally = None, None
        if ok_tau and ok_sigma:
            new, tally = classify_and_prune(st, tau, sigma, counter)
            new.T, new.bal_l, new.bal_r = (l, r), bl, br
        success = new is not None and len(new.G) <= math.ceil(g / 2)
        if trace is not None:
            trace.append(
                dict(
                    size=g,
                    new_size=len(new.G) if new is not None else None,
                    attempt=attempt,
                    success=success,
                    T=(l, r),
                    tau=tau,
                    sigma=sigma,
                    contained=(ok_tau, ok_sigma),
                    tally=tally,
                    ids_before=st.ids.copy(),
                    ids_after=None if new is None else new.ids.copy(),
                    p=st.p,
                    q=st.q,
                    new_p=None if new is None else new.p,
                    new_q=None if new is None else new.q,
                    even=st.even,
                )
            )
        if success:
            new.attempts = attempt
            return new
    raise DegeneratePhase(f"no verified progress on {g} lines after {cfg.max_retries + 1} attempts")


# -- base case --------------------------------------------------------------------


def _batch_balance(st, slopes):
    """Balance at many slopes at once (used on the small base-case arrangement)."""
    A = np.asarray(slopes, dtype=float)
    V1 = A[:, None] * st.G.slopes - st.G.offsets
    V2 = (-1.0 / A)[:, None] * st.G.slopes - st.G.offsets

    def level(V, k):
        lo = np.partition(V, k - 1, axis=1)[:, k - 1]
        if not st.even:
            return lo
        hi = np.partition(V, k, axis=1)[:, k]
        return (lo + hi) / 2.0

    mu1 = level(V1, st.p)[:, None]
    mu2 = level(V2, st.q)[:, None]
    w1 = (V1 > mu1) * 2 + (V1 == mu1)
    w2 = (V2 > mu2) * 2 + (V2 == mu2)
    return (w1 * w2).sum(axis=1) - (4 * st.m + st.frac)


def _crossings(G):
    i, j = np.triu_indices(len(G), 1)
    ds = G.slopes[i] - G.slopes[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (G.offsets[i] - G.offsets[j]) / ds
    return x[np.isfinite(x)]


def base_case(st, try_cut, *, counter=None, max_candidates=32):
    """Exhaustive search of the event slopes of the surviving lines inside ``T``.

    Events are crossings of surviving lines inside ``T`` plus preimages
    under ``f`` of crossings inside ``S``.  The balance is evaluated between
    consecutive events; each zero or strict sign change names a candidate
    slope, and the first candidate whose full cut verifies is returned.
    """
    l, r = st.T
    sl, sr = st.S
    x = _crossings(st.G)
    ev = np.concatenate([x[(x > l) & (x < r)], -1.0 / x[(x > sl) & (x < sr)]])
    ev = np.unique(ev[(ev > l) & (ev < r)])
    mids = (ev[1:] + ev[:-1]) / 2.0
    bal = np.concatenate([[st.bal_l], _batch_balance(st, mids) if mids.size else [], [st.bal_r]])
    pts = np.concatenate([[l], mids, [r]])
    if counter is not None:
        counter.add((mids.size + 1) * len(st.G) * 8)
    candidates = []
    for k in range(bal.size):
        if bal[k] == 0 and 0 < k < bal.size - 1:
            candidates.append(pts[k])
        if k + 1 < bal.size and bal[k] * bal[k + 1] < 0 and k < ev.size:
            candidates += [ev[k], pts[k], pts[k + 1]]
    seen = set()
    for a in candidates:
        if a in seen or not (l <= a <= r):
            continue
        seen.add(a)
        cut = try_cut(float(a))
        if cut is not None:
            return cut
        if len(seen) >= max_candidates:
            break
    raise DegeneratePhase(f"base case on {len(st.G)} lines found no verifying cut")


# -- driver ---------------------------------------------------------------------------


def _unrotate_slope(a, theta):
    """Angle in [0, pi/2) of the original-frame first line for rotated slope ``a``."""
    psi = (math.atan(a) - theta) % (math.pi / 2)
    return psi


def _cut_for_angle(P, psi, tol):
    if psi == 0.0 or math.tan(psi) == 0.0:
        return axis_cut(P, tol=tol)
    return cut_at_slope(P, math.tan(psi), tol=tol)


def _anchor_slope(pts, anchors):
    i, j = anchors[:2]
    dx = pts[i, 0] - pts[j, 0]
    if dx == 0:
        return None
    return (pts[i, 1] - pts[j, 1]) / dx


def _map_back(P, P_rot, a, theta, tol):
    """Build the original-frame cut matching rotated-frame slope ``a``."""
    rcut = cut_at_slope(P_rot, a, tol=tol)
    if not verify_cut(P_rot, rcut, tol):
        return None
    cands = [_cut_for_angle(P, _unrotate_slope(a, theta), tol)]
    # a line through two points: recompute its direction from the original coordinates
    for anchors in (rcut.anchors1, rcut.anchors2):
        if len(anchors) >= 2:
            s = _anchor_slope(P, anchors)
            if s is not None and s != 0:
                cands.append(cut_at_slope(P, s if s > 0 else -1.0 / s, tol=tol))
    for cut in cands:
        if verify_cut(P, cut, tol):
            return cut
    return None


def _solve_rotated(P, theta, cfg, rng, counter, stats):
    P_rot = rotate(P, theta)
    H = Arrangement.from_points(P_rot)
    st = initial_state(H)

    def try_cut(a):
        return _map_back(P, P_rot, a, theta, cfg.tol)

    a1, a2 = math.tan(math.pi / 8), math.tan(3 * math.pi / 8)
    b1, _ = adjusted_balance(st, a1, counter)
    b2, _ = adjusted_balance(st, a2, counter)
    for b, a in ((b1, a1), (b2, a2)):
        if b == 0:
            cut = try_cut(a)
            if cut is not None:
                return cut
    # non-generic ends are kept: near-collinear inputs share a median point
    # between both cut lines over whole slope ranges
    if b1 * b2 >= 0:
        return None
    st.T, st.bal_l, st.bal_r = (a1, a2), b1, b2
    trace = stats.trace
    while len(st.G) > cfg.base_threshold:
        res = phase(st, cfg, rng, counter=counter, try_cut=try_cut, trace=trace)
        if isinstance(res, OrthoCut):
            return res
        stats.phases += 1
        stats.retries += res.attempts
        st = res
    return base_case(st, try_cut, counter=counter)


def solve(P, cfg=None, *, stats=None, counter=None):
    """Orthogonal cut of ``P`` with every open quadrant holding at most floor(n/4) points.

    Pipeline: axis-aligned pre-check, seeded random rotation, dual
    prune-and-search, base case, map back and verify.  Failed attempts are
    retried with fresh rotations; after ``rotation_retries`` the brute-force
    oracle is consulted.
    """
    cfg = (cfg or PhaseConfig()).validate()
    pts = as_points(P)
    n = len(pts)
    if n < 4:
        raise ValueError(f"need at least 4 points, got {n}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    stats = stats if stats is not None else SolveStats()
    counter = counter if counter is not None else OpCounter()
    start = counter.comparisons
    t0 = time.perf_counter_ns()
    rng = np.random.default_rng(cfg.rng_seed)
    try:
        cut = axis_cut(pts, tol=cfg.tol)
        if verify_cut(pts, cut, cfg.tol):
            stats.method = "axis"
            return cut
        for attempt in range(cfg.rotation_retries):
            theta = float(rng.uniform(0.0, math.pi / 2))
            for shift in (0.0, -math.pi / 4):
                try:
                    cut = _solve_rotated(pts, theta + shift, cfg, rng, counter, stats)
                except DegeneratePhase:
                    cut = None
                if cut is not None:
                    stats.method = "prune-and-search"
                    return cut
            stats.rotations += 1
        if cfg.oracle_fallback:
            from .oracle import brute_force_solve

            stats.fallback = True
            cut = brute_force_solve(pts, tol=cfg.tol)
            if cut is not None:
                stats.method = "oracle"
                return cut
        raise SolverError(f"no verifying cut for {n} points after {cfg.rotation_retries} rotations")
    finally:
        stats.comparisons = counter.comparisons - start
        stats.elapsed_ns = time.perf_counter_ns() - t0
