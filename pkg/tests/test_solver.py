import math

import numpy as np
import pytest
from conftest import level_at, run_phases, tracked_levels_ok

from pancake.geometry import Arrangement, axis_cut, count_quadrants, cut_at_slope, verify_cut
from pancake.oracle import brute_force_solve, count_crossings_in_strip, exact_verify_cut
from pancake.selection import OpCounter
from pancake.solver import (
    PhaseConfig,
    SearchState,
    SolveStats,
    SolverError,
    _batch_balance,
    _crossings,
    _f,
    adjusted_balance,
    build_trapezoid,
    certify_containment,
    choose_straddling_interval,
    classify_and_prune,
    divide_interval,
    initial_state,
    Trapezoid,
    rotate,
    solve,
)

SYM = np.array([(1, 2), (-1, -2), (2, -1), (-2, 1)], dtype=float)


def _state(n):
    return initial_state(Arrangement(np.arange(n, dtype=float), np.zeros(n)))


def test_initial_state():
    for n, p, m in ((9, 5, 2), (5, 3, 1), (8, 4, 2)):
        st = _state(n)
        assert (st.p, st.q, st.m) == (p, p, m)
        assert st.T == (0.0, math.inf)
        assert st.S == (-math.inf, -0.0)
    with pytest.raises(ValueError):
        _state(3)


def test_config_validation():
    assert PhaseConfig().validate().parts == 256
    # defaults sit exactly on sqrt(alpha/2) = epsilon
    assert math.sqrt(PhaseConfig().alpha / 2) == PhaseConfig().epsilon
    with pytest.raises(ValueError):
        PhaseConfig(alpha=1 / 64).validate()
    with pytest.raises(ValueError):
        PhaseConfig(epsilon=1 / 8, alpha=1 / 128).validate()
    with pytest.raises(ValueError):
        solve(SYM, PhaseConfig(epsilon=1 / 32))


def test_solve_symmetric():
    cut = solve(SYM)
    assert verify_cut(SYM, cut)


def test_solve_nine_points_matches_oracle_validity():
    P = np.random.default_rng(9).normal(size=(9, 2))
    cut = solve(P)
    assert verify_cut(P, cut)
    assert max(count_quadrants(P, cut).quadrants) <= 2
    assert brute_force_solve(P) is not None


def test_solve_rejects_small_and_nonfinite():
    with pytest.raises(ValueError):
        solve(SYM[:3])
    with pytest.raises(ValueError):
        solve(np.vstack([SYM, [np.nan, 0]]))


def test_solve_random_instances():
    rng = np.random.default_rng(10)
    for k in range(150):
        n = int(rng.integers(4, 400))
        P = rng.normal(size=(n, 2)) if k % 3 else rng.uniform(size=(n, 2))
        cut = solve(P, PhaseConfig(rng_seed=k))
        assert verify_cut(P, cut)
        assert exact_verify_cut(P, cut)


def test_solve_degenerate_inputs():
    rng = np.random.default_rng(11)
    retried = 0
    for k in range(40):
        n = int(rng.integers(4, 200))
        P = rng.integers(0, 6, size=(n, 2)).astype(float)
        stats = SolveStats()
        cut = solve(P, PhaseConfig(rng_seed=k), stats=stats)
        assert verify_cut(P, cut)
        retried += stats.rotations > 0
    # heavy duplication forces the rotation-retry path at least once
    assert retried > 0
    collinear = np.column_stack([np.arange(20.0), 2 * np.arange(20.0)])
    assert verify_cut(collinear, solve(collinear))


def test_no_fallback_reports_failure():
    P = np.random.default_rng(11).normal(size=(40, 2))
    assert not verify_cut(P, axis_cut(P))
    with pytest.raises(SolverError):
        solve(P, PhaseConfig(rotation_retries=0, oracle_fallback=False))
    stats = SolveStats()
    assert verify_cut(P, solve(P, PhaseConfig(rotation_retries=0), stats=stats))
    assert stats.fallback and stats.method == "oracle"


def test_lifted_convex_points_avoid_fallback():
    # points on an increasing convex curve share a median point over wide slope ranges
    rng = np.random.default_rng(12)
    for k in range(30):
        t = np.sort(rng.uniform(size=2 * int(rng.integers(2, 150)) + 1))
        P = np.column_stack([t, np.exp(t)])
        stats = SolveStats()
        assert verify_cut(P, solve(P, PhaseConfig(rng_seed=k), stats=stats))
        assert not stats.fallback


def test_solve_deterministic():
    P = np.random.default_rng(12).normal(size=(3000, 2))
    a, b = SolveStats(), SolveStats()
    ca, cb = solve(P, PhaseConfig(rng_seed=4), stats=a), solve(P, PhaseConfig(rng_seed=4), stats=b)
    assert ca == cb
    assert a.comparisons == b.comparisons


def test_solve_rotation_invariant_validity():
    P = np.random.default_rng(13).normal(size=(500, 2))
    for theta in (0.1, 1.0, 2.5):
        Q = rotate(P, theta)
        assert verify_cut(Q, solve(Q))


def test_rotate_preserves_distances():
    P = np.random.default_rng(14).normal(size=(50, 2))
    Q = rotate(P, 0.7)
    assert np.allclose(np.linalg.norm(P, axis=1), np.linalg.norm(Q, axis=1))
    assert np.allclose(rotate(Q, -0.7), P)


# -- balance -----------------------------------------------------------------


def test_balance_zero_means_valid():
    rng = np.random.default_rng(15)
    for _ in range(30):
        P = rng.normal(size=(int(rng.integers(5, 60)), 2))
        st = initial_state(Arrangement.from_points(P))
        for a in rng.uniform(0.05, 20, size=30):
            bal, generic = adjusted_balance(st, a)
            if generic and bal == 0:
                assert verify_cut(P, cut_at_slope(P, a))


def test_batch_balance_agrees():
    rng = np.random.default_rng(16)
    P = rng.normal(size=(40, 2))
    st = initial_state(Arrangement.from_points(P))
    slopes = rng.uniform(0.1, 10, size=25)
    assert list(_batch_balance(st, slopes)) == [adjusted_balance(st, a)[0] for a in slopes]


# -- division --------------------------------------------------------------------


def test_divide_parallel_lines():
    st = initial_state(Arrangement(np.ones(5), np.arange(5.0)))
    st.T = (0.5, 2.0)
    parts = divide_interval(st, PhaseConfig(), np.random.default_rng(0))
    assert len(parts) == 1 and parts[0][0] == (0.5, 2.0)


def test_divide_four_lines():
    G = Arrangement([0.0, 1.0, 2.0, 3.0], [0.0, 1.5, 2.0, 6.5])
    assert count_crossings_in_strip(G, -100, 100) == 6
    st = initial_state(G)
    st.T = (-100.0, 100.0)
    cfg = PhaseConfig(alpha=0.5)
    parts = divide_interval(st, cfg, np.random.default_rng(1))
    bounds = [p[0] for p in parts]
    assert bounds[0][0] == -100.0 and bounds[-1][1] == 100.0
    assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))
    for (l, r), (sl, sr) in parts:
        assert count_crossings_in_strip(G, l, r) <= 3
        assert (sl, sr) == (_f(l), _f(r))


def test_divide_density_random():
    rng = np.random.default_rng(2)
    cfg = PhaseConfig()
    good = total = 0
    for _ in range(30):
        G = Arrangement(rng.normal(size=256), rng.normal(size=256))
        st = initial_state(G)
        st.T = (math.tan(math.pi / 8), math.tan(3 * math.pi / 8))
        for (l, r), _ in divide_interval(st, cfg, rng):
            total += 1
            good += count_crossings_in_strip(G, l, r) <= cfg.alpha * 256 * 255 / 2
    assert good / total >= 0.99


# -- straddling choice --------------------------------------------------------------


def test_choose_straddling_second():
    # counts (m+2, m+1 | m+1, m-1) as balances 4*(count - m)
    parts = [((1.0, 2.0), None), ((2.0, 3.0), None)]
    idx, hit, lo, hi = choose_straddling_interval(parts, lambda a: 4, 8, -4)
    assert (idx, hit, lo, hi) == (1, None, 4, -4)


def test_choose_straddling_exact_hit():
    parts = [((1.0, 2.0), None), ((2.0, 3.0), None)]
    idx, hit, _, _ = choose_straddling_interval(parts, lambda a: 0, 8, -4)
    assert idx is None and hit == 2.0


def test_choose_straddling_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = int(rng.integers(1, 40))
        vals = np.cumsum(rng.choice([-4, 4], size=k + 1))
        vals = vals - vals[0] + 4
        if vals[-1] >= 0:
            vals[-1] = -4
        vals = np.where(vals == 0, 4, vals)
        parts = [((float(i), float(i + 1)), None) for i in range(k)]
        idx, hit, lo, hi = choose_straddling_interval(parts, lambda a: int(vals[int(a)]), int(vals[0]), int(vals[-1]))
        assert hit is None and lo * hi < 0
        assert (lo, hi) == (vals[idx], vals[idx + 1] if idx + 1 < k else vals[-1])


# -- trapezoids and pruning ---------------------------------------------------------


def test_build_trapezoid_example():
    G = Arrangement([1.0, 0.0, -1.0], [0.0, 0.0, 0.0])
    tau = build_trapezoid(G, 2, (1.0, 2.0), 1 / 3)
    assert (tau.y_low_l, tau.y_high_l, tau.y_low_r, tau.y_high_r) == (-1, 1, -2, 2)
    with pytest.raises(ValueError):
        build_trapezoid(G, 2, (1.0, math.inf), 1 / 3)


def test_trapezoid_clamps():
    G = Arrangement([1.0, 0.0, -1.0], [0.0, 0.0, 0.0])
    tau = build_trapezoid(G, 1, (1.0, 2.0), 1.0)
    assert tau.y_low_l == -1 and tau.y_high_l == 1


def _tiny_state():
    st = initial_state(Arrangement([0.0, 1.0, -1.0, 0.5, 2.0], [0.0, 0.0, 0.0, 0.0, 0.0]))
    st.T = (1.0, 2.0)
    return st


def test_prune_nothing_missed():
    st = _tiny_state()
    wide = Trapezoid(1.0, 2.0, -100, 100, -100, 100)
    new, tally = classify_and_prune(st, wide, wide)
    assert (tally.k_pp, tally.k_pm, tally.k_mp, tally.k_mm, tally.kept) == (0, 0, 0, 0, 5)
    assert (new.p, new.q, new.m) == (st.p, st.q, st.m)


def test_prune_one_below_both():
    st = initial_state(Arrangement([0.0, 0.0, 0.0, 0.0, 0.0], [100.0, 0.0, 0.1, 0.2, 0.3]))
    st.T = (1.0, 2.0)
    band = Trapezoid(1.0, 2.0, -1, 1, -1, 1)
    band_s = Trapezoid(_f(1.0), _f(2.0), -1, 1, -1, 1)
    new, tally = classify_and_prune(st, band, band_s)
    assert tally.k_mm == 1 and tally.kept == 4
    assert (new.p, new.q, new.m) == (st.p - 1, st.q - 1, st.m)


def test_prune_one_above_both():
    st = initial_state(Arrangement([0.0, 0.0, 0.0, 0.0, 0.0], [-100.0, 0.0, 0.1, 0.2, 0.3]))
    st.T = (1.0, 2.0)
    band = Trapezoid(1.0, 2.0, -1, 1, -1, 1)
    band_s = Trapezoid(_f(1.0), _f(2.0), -1, 1, -1, 1)
    new, tally = classify_and_prune(st, band, band_s)
    assert tally.k_pp == 1
    assert (new.p, new.q, new.m) == (st.p, st.q, st.m - 1)
    assert new.m_removed_above_both == 1


def test_tally_sums():
    rng = np.random.default_rng(4)
    for _ in range(50):
        G = Arrangement(rng.normal(size=40), rng.normal(size=40))
        st = initial_state(G)
        st.T = (0.5, 1.5)
        tau = build_trapezoid(G, st.p, st.T, 1 / 16)
        sigma = build_trapezoid(G, st.q, (_f(0.5), _f(1.5)), 1 / 16)
        _, t = classify_and_prune(st, tau, sigma)
        assert t.k_pp + t.k_pm + t.k_mp + t.k_mm + t.kept == 40


# -- instrumented phases -------------------------------------------------------------


def test_phase_129_lines():
    rng = np.random.default_rng(5)
    seen = 0
    for seed in range(20):
        P = rng.normal(size=(129, 2))
        run = run_phases(P, seed)
        if run is None:
            continue
        H, states, entries, _ = run
        if len(states) > 1:
            seen += 1
            assert len(states[1].G) <= 65
    assert seen > 0


def test_phase_contract():
    rng = np.random.default_rng(6)
    xs_rng = np.random.default_rng(7)
    checked = 0
    for seed in range(12):
        P = rng.normal(size=(int(rng.integers(300, 5000)), 2))
        run = run_phases(P, seed)
        if run is None:
            continue
        H, states, entries, _ = run
        for before, after, trace in zip(states, states[1:], entries):
            checked += 1
            assert len(after.G) <= math.ceil(len(before.G) / 2)
            l, r = after.T
            assert before.T[0] <= l < r <= before.T[1]
            assert after.S == (_f(l), _f(r))
            assert 1 <= after.p <= len(after.G) and 1 <= after.q <= len(after.G)
            assert 0 <= after.m <= len(after.G)
            assert tracked_levels_ok(H, states[0], after, xs_rng.uniform(l, r, size=10))
            # every survivor touches a trapezoid
            ok = [e for e in trace if e["success"]][-1]
            G = before.G
            kept = (ok["tau"].position(G) == 0) | (ok["sigma"].position(G) == 0)
            assert np.array_equal(before.ids[kept], after.ids)
            # count coherence: the balance computed on G equals the balance on H
            full = states[0]
            for a in xs_rng.uniform(l, r, size=5):
                assert adjusted_balance(after, a)[0] == adjusted_balance(full, a)[0]
            # straddle invariant
            assert after.bal_l * after.bal_r < 0
    assert checked > 0


def test_trapezoid_bound_and_containment():
    rng = np.random.default_rng(8)
    xs_rng = np.random.default_rng(9)
    cfg = PhaseConfig()
    checked = 0
    for seed in range(12):
        P = rng.normal(size=(int(rng.integers(300, 5000)), 2))
        run = run_phases(P, seed, cfg)
        if run is None:
            continue
        H, states, entries, _ = run
        for before, trace in zip(states, entries):
            G = before.G
            g = len(G)
            for e in trace:
                l, r = e["T"]
                sl, sr = sorted((_f(l), _f(r)))
                bound = cfg.alpha * g * (g - 1) / 2
                if count_crossings_in_strip(G, l, r) > bound or count_crossings_in_strip(G, sl, sr) > bound:
                    continue
                checked += 1
                for trap, (a, b), level in ((e["tau"], (l, r), before.p), (e["sigma"], (sl, sr), before.q)):
                    assert np.count_nonzero(trap.position(G) == 0) <= 4 * cfg.epsilon * g
                    top = level + 1 if before.even else level
                    for x in xs_rng.uniform(a, b, size=20):
                        vals = np.sort(G.values(x))
                        assert trap.lower(x) - 1e-9 <= vals[level - 1]
                        assert vals[top - 1] <= trap.upper(x) + 1e-9
    assert checked > 0


def test_certify_containment_detects_bad_band():
    G = Arrangement(np.linspace(-1, 1, 11), np.zeros(11))
    tight = Trapezoid(1.0, 2.0, 5.0, 6.0, 5.0, 6.0)
    assert not certify_containment(G, tight, 6)
    wide = Trapezoid(1.0, 2.0, -5.0, 5.0, -5.0, 5.0)
    assert certify_containment(G, wide, 6)


def test_base_case_full_size():
    rng = np.random.default_rng(10)
    done = 0
    for seed in range(15):
        P = rng.normal(size=(int(rng.integers(100, 1500)), 2))
        run = run_phases(P, seed, finish=True)
        if run is None:
            continue
        H, states, entries, cut = run
        if cut is not None:
            assert verify_cut(P, cut)
            done += 1
    assert done > 0


def test_base_case_bounded_steps():
    rng = np.random.default_rng(11)
    for seed in range(20):
        P = rng.normal(size=(int(rng.integers(65, 400)), 2))
        run = run_phases(P, seed)
        if run is None:
            continue
        st = run[1][-1]
        if len(st.G) > 64:
            continue
        l, r = st.T
        sl, sr = st.S
        x = _crossings(st.G)
        ev = np.concatenate([x[(x > l) & (x < r)], -1.0 / x[(x > sl) & (x < sr)]])
        ev = np.unique(ev[(ev > l) & (ev < r)])
        if ev.size < 3:
            continue
        bal = _batch_balance(st, (ev[1:] + ev[:-1]) / 2)
        assert np.abs(np.diff(bal)).max() <= 4


def test_comparisons_per_phase_linear():
    rng = np.random.default_rng(12)
    for n in (2_000, 20_000, 200_000):
        P = rng.normal(size=(n, 2))
        c = OpCounter()
        stats = SolveStats()
        solve(P, PhaseConfig(rng_seed=1), stats=stats, counter=c)
        assert stats.comparisons == c.comparisons
        assert c.comparisons <= 1200 * n


def test_trace_records_phases():
    P = np.random.default_rng(13).normal(size=(20_000, 2))
    stats = SolveStats(trace=[])
    solve(P, PhaseConfig(rng_seed=3), stats=stats)
    assert sum(e["success"] for e in stats.trace) == stats.phases
    for e in stats.trace:
        if e["success"]:
            assert e["new_size"] <= math.ceil(e["size"] / 2)


def test_level_helper_matches_solver():
    from pancake.solver import _level_point

    rng = np.random.default_rng(14)
    for n in (5, 6, 31, 32):
        vals = rng.normal(size=n)
        p = (n + 1) // 2
        assert _level_point(vals, p, n % 2 == 0, None) == level_at(vals, p, n % 2 == 0)


def test_search_state_len():
    st = _state(7)
    assert isinstance(st, SearchState) and len(st) == 7
