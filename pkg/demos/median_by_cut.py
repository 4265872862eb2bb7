"""Read a median off a quartering cut.

Values are lifted onto an increasing convex curve.  The second cut line
crosses the curve once, at the lifted median.
"""

import numpy as np

from pancake import median_via_pancake

rng = np.random.default_rng(7)
for size in (5, 21, 101, 401):
    vals = rng.normal(scale=10, size=size)
    got = median_via_pancake(vals)
    want = np.sort(vals)[size // 2]
    print(f"size {size:4d}: cut median {got:+.6f}, sorted median {want:+.6f}, equal {got == want}")
