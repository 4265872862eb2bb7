"""Scaling and solver-vs-oracle benchmarks."""

from __future__ import annotations

import csv
import io
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import verify_cut
from .oracle import brute_force_solve
from .selection import OpCounter
from .solver import PhaseConfig, SolveStats, solve

__all__ = ["BenchRow", "BenchReport", "CompareRow", "CompareReport", "BenchFailure",
           "instance_seed", "make_instance", "loglog_slope", "run_scaling", "run_compare"]


class BenchFailure(RuntimeError):
    pass


def instance_seed(seed, n, trial):
    """Integer seed derived from (seed, n, trial)."""
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1)[0])


def make_instance(n, trial, seed):
    return np.random.default_rng(instance_seed(seed, n, trial)).standard_normal((n, 2))


def loglog_slope(xs, ys):
    """Least-squares slope of log(y) against log(x)."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class BenchRow:
    n: int
    time_s: float
    comparisons: float
    phases: float
    retries: float
    trials: int

    @property
    def per_n(self):
        return self.comparisons / self.n


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    @property
    def ns(self):
        return [r.n for r in self.rows]

    @property
    def time_slope(self):
        return loglog_slope(self.ns, [r.time_s for r in self.rows])

    @property
    def counter_slope(self):
        return loglog_slope(self.ns, [r.comparisons for r in self.rows])

    @property
    def doubling_ratios(self):
        """counter(n') / counter(n) * n / n' * 2 for adjacent rows, i.e. scaled to a doubling."""
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            out.append((b.comparisons / a.comparisons) ** (np.log(2) / np.log(b.n / a.n)))
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "trials", "median_time_s", "median_comparisons", "comparisons_per_n",
                    "median_phases", "median_retries"])
        for r in self.rows:
            w.writerow([r.n, r.trials, f"{r.time_s:.6f}", f"{r.comparisons:.0f}", f"{r.per_n:.2f}",
                        f"{r.phases:g}", f"{r.retries:g}"])
        return buf.getvalue()

    def summary(self):
        lines = [f"{'n':>9} {'time[s]':>9} {'comparisons':>13} {'cmp/n':>8} {'phases':>7}"]
        for r in self.rows:
            lines.append(f"{r.n:>9} {r.time_s:>9.3f} {r.comparisons:>13.0f} {r.per_n:>8.1f} {r.phases:>7g}")
        if len(self.rows) >= 2:
            lines.append(f"counter log-log slope {self.counter_slope:.3f}, time log-log slope {self.time_slope:.3f}")
            lines.append("doubling ratios " + " ".join(f"{q:.3f}" for q in self.doubling_ratios))
        return "\n".join(lines)


def _trial(n, trial, seed):
    pts = make_instance(n, trial, seed)  # outside the timed region
    stats = SolveStats()
    counter = OpCounter()
    cfg = PhaseConfig(rng_seed=instance_seed(seed, n, trial))
    t0 = time.perf_counter()
    cut = solve(pts, cfg, stats=stats, counter=counter)
    elapsed = time.perf_counter() - t0
    if not verify_cut(pts, cut, cfg.tol):
        raise BenchFailure(f"solver cut failed verification (n={n}, trial={trial}, seed={seed})")
    return elapsed, counter.comparisons, stats.phases, stats.retries


def run_scaling(ns, trials=5, seed=0, *, parallel=False, workers=None):
    """Median time and comparison count of ``solve`` per n over seeded trials."""
    ns = [int(n) for n in ns]
    if any(n < 4 for n in ns) or ns != sorted(ns):
        raise ValueError("ns must be ascending with every n >= 4")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    report = BenchReport()
    for n in ns:
        if parallel:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                res = list(pool.map(lambda t: _trial(n, t, seed), range(trials)))
        else:
            res = [_trial(n, t, seed) for t in range(trials)]
        times, comps, phases, retries = zip(*res)
        report.rows.append(BenchRow(n, statistics.median(times), statistics.median(comps),
                                    statistics.median(phases), statistics.median(retries), trials))
    return report


@dataclass
class CompareRow:
    n: int
    solver_s: float
    oracle_s: float
    passed: int
    trials: int

    @property
    def speedup(self):
        return self.oracle_s / self.solver_s if self.solver_s > 0 else float("inf")


@dataclass
class CompareReport:
    rows: list = field(default_factory=list)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "trials", "passed", "median_solver_s", "median_oracle_s", "speedup"])
        for r in self.rows:
            w.writerow([r.n, r.trials, r.passed, f"{r.solver_s:.6f}", f"{r.oracle_s:.6f}", f"{r.speedup:.2f}"])
        return buf.getvalue()

    def summary(self):
        lines = [f"{'n':>6} {'pass':>6} {'solver[s]':>10} {'oracle[s]':>10} {'speedup':>8}"]
        for r in self.rows:
            lines.append(f"{r.n:>6} {r.passed:>3}/{r.trials:<2} {r.solver_s:>10.4f} {r.oracle_s:>10.4f} {r.speedup:>8.1f}")
        return "\n".join(lines)


def run_compare(ns, trials=5, seed=0):
    """Solver and oracle on the same instances; both cuts must verify."""
    report = CompareReport()
    for n in ns:
        if not 4 <= n <= 300:
            raise ValueError(f"oracle sizes are limited to 4..300, got {n}")
        ts, to = [], []
        for t in range(trials):
            pts = make_instance(n, t, seed)
            cfg = PhaseConfig(rng_seed=instance_seed(seed, n, t))
            t0 = time.perf_counter()
            cut = solve(pts, cfg)
            t1 = time.perf_counter()
            ref = brute_force_solve(pts, cfg.tol)
            t2 = time.perf_counter()
            if not verify_cut(pts, cut, cfg.tol) or ref is None or not verify_cut(pts, ref, cfg.tol):
                raise BenchFailure(f"verification failed for n={n}, trial={t}, seed={seed}")
            ts.append(t1 - t0)
            to.append(t2 - t1)
        report.rows.append(CompareRow(n, statistics.median(ts), statistics.median(to), trials, trials))
    return report
