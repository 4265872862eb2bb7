"""Order statistics in worst-case linear time.

The default method is the deterministic median-of-medians pivot rule
(groups of five) with a three-way partition.  Each round is expressed with
whole-array numpy operations, so the work stays linear while the constant
factor stays small enough for multi-million element inputs.

Every routine accepts an optional :class:`OpCounter`.  The counter tallies
element comparisons in the comparison model: the median of a group of five costs 7
comparisons (a min/max network), a three-way partition pass is charged 2
per element, and inputs below the cutoff are charged ``n*ceil(log2 n)`` for
a comparison sort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["OpCounter", "kth_smallest", "median", "SMALL_CUTOFF"]

# Inputs at or below this size are finished by a direct sort.
SMALL_CUTOFF = 256

_METHODS = ("mom", "random")


@dataclass
class OpCounter:
    """Mutable tally of comparisons made by selection and by callers."""

    comparisons: int = 0

    def add(self, k):
        self.comparisons += int(k)


def _charge(counter, k):
    if counter is not None:
        counter.comparisons += int(k)


def _as_buffer(values):
    buf = np.array(values, dtype=float, copy=True).ravel()
    if buf.size == 0:
        raise ValueError("selection on an empty sequence")
    if np.isnan(buf).any():
        raise ValueError("selection input contains NaN")
    return buf


def _sort_cost(n):
    return n * max(1, math.ceil(math.log2(n))) if n > 1 else 0


def _small_select(a, i, counter):
    _charge(counter, _sort_cost(a.size))
    return float(np.partition(a, i)[i])


def _median5(a, b, c, d, e):
    lo = np.maximum(np.minimum(a, b), np.minimum(c, d))
    hi = np.minimum(np.maximum(a, b), np.maximum(c, d))
    return np.maximum(np.minimum(e, lo), np.minimum(np.maximum(e, lo), hi))


def _mom_pivot(a, counter):
    n = a.size
    g = n // 5
    cols = a[: 5 * g].reshape(g, 5).T
    medians = _median5(*cols)
    _charge(counter, 7 * g)
    rest = a[5 * g:]
    if rest.size:
        _charge(counter, _sort_cost(rest.size))
        medians = np.append(medians, np.sort(rest)[(rest.size - 1) // 2])
    return _select(medians, (medians.size - 1) // 2, "mom", counter, None)


def _select(a, i, method, counter, rng):
    while True:
        n = a.size
        if n <= SMALL_CUTOFF:
            return _small_select(a, i, counter)
        if method == "mom":
            pivot = _mom_pivot(a, counter)
        else:
            pivot = a[rng.integers(n)]
        less = a < pivot
        greater = a > pivot
        _charge(counter, 2 * n)
        n_less = int(np.count_nonzero(less))
        if i < n_less:
            a = a[less]
            continue
        n_greater = int(np.count_nonzero(greater))
        n_equal = n - n_less - n_greater
        if i < n_less + n_equal:
            return float(pivot)
        a = a[greater]
        i -= n_less + n_equal


def kth_smallest(values, k, *, method="mom", counter=None, rng=None):
    """Return the k-th smallest element (1-based, multiset semantics).

    ``method="mom"`` is deterministic and worst-case linear;
    ``method="random"`` picks uniform random pivots (expected linear) and
    takes ``rng`` as a seed or ``numpy.random.Generator``.
    """
    if method not in _METHODS:
        raise ValueError(f"unknown selection method {method!r}")
    buf = _as_buffer(values)
    k = int(k)
    if not 1 <= k <= buf.size:
        raise IndexError(f"k={k} out of range for {buf.size} values")
    if method == "random":
        rng = np.random.default_rng(rng)
    return _select(buf, k - 1, method, counter, rng)


def median(values, *, method="mom", counter=None, rng=None):
    """Middle element for odd size, mean of the two middle elements for even size."""
    buf = _as_buffer(values)
    n = buf.size
    kw = dict(method=method, counter=counter, rng=rng)
    if n % 2:
        return kth_smallest(buf, (n + 1) // 2, **kw)
    lo = kth_smallest(buf, n // 2, **kw)
    hi = kth_smallest(buf, n // 2 + 1, **kw)
    return (lo + hi) / 2.0
