import math

import numpy as np

from pancake.geometry import Arrangement
from pancake.selection import kth_smallest
from pancake.solver import (
    DegeneratePhase,
    OrthoCut,
    PhaseConfig,
    _f,
    _map_back,
    adjusted_balance,
    base_case,
    initial_state,
    phase,
    rotate,
)


def level_at(vals, p, even):
    """Median-level point as the solver defines it (midpoint of levels p, p+1 for even sizes)."""
    v = float(np.sort(vals)[p - 1])
    return (v + float(np.sort(vals)[p])) / 2.0 if even else v


def start_state(P, seed):
    """Rotated dual arrangement and a straddling initial state, as the solver builds them."""
    rng = np.random.default_rng(seed)
    theta0 = float(rng.uniform(0.0, math.pi / 2))
    for theta in (theta0, theta0 - math.pi / 4):
        P_rot = rotate(P, theta)
        H = Arrangement.from_points(P_rot)
        st = initial_state(H)
        a1, a2 = math.tan(math.pi / 8), math.tan(3 * math.pi / 8)
        b1, _ = adjusted_balance(st, a1)
        b2, _ = adjusted_balance(st, a2)
        if b1 * b2 < 0:
            st.T, st.bal_l, st.bal_r = (a1, a2), b1, b2
            return H, st, P_rot, theta, rng
    return None


def run_phases(P, seed=0, cfg=None, *, finish=False):
    """Run phases by hand; returns (H, states, entries, result).

    ``states`` lists the state before every phase plus the final one,
    ``entries`` the trace dicts of each phase call.  With ``finish`` the base
    case is run at the end and ``result`` is the cut (or None).
    """
    cfg = cfg or PhaseConfig()
    started = start_state(P, seed)
    if started is None:
        return None
    H, st, P_rot, theta, rng = started

    def try_cut(a):
        return _map_back(P, P_rot, a, theta, cfg.tol)

    states, entries = [st], []
    while len(st.G) > cfg.base_threshold:
        trace = []
        try:
            res = phase(st, cfg, rng, try_cut=try_cut, trace=trace)
        except DegeneratePhase:
            entries.append(trace)
            return H, states, entries, None
        entries.append(trace)
        if isinstance(res, OrthoCut):
            return H, states, entries, res
        st = res
        states.append(st)
    result = None
    if finish:
        try:
            result = base_case(st, try_cut)
        except DegeneratePhase:
            result = None
    return H, states, entries, result


def tracked_levels_ok(H, st0, st, xs, rel=1e-9):
    """L_p(G) = mu_H on T and L_q(G) = mu_H on S at the given abscissae in T."""
    for x in xs:
        for y, p0, p in ((x, st0.p, st.p), (_f(x), st0.q, st.q)):
            want = level_at(H.values(y), p0, st0.even)
            got = level_at(st.G.values(y), p, st.even)
            if abs(got - want) > rel * max(1.0, abs(want)):
                return False
    return True


def kth(vals, k):
    return kth_smallest(vals, k)
