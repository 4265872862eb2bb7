"""Mutually orthogonal hyperplanes that pairwise quarter a point set.

The 3-cube recovers its coordinate planes.  Two copies of the 4-cube get
two coordinate hyperplanes quartering both sets.  The search is exhaustive,
so the 16-point sets need force=True.
"""

import itertools

import numpy as np

from pancake import delta, solve_A, solve_B
from pancake.highdim import HighDimConfig, quadrant_counts_pair

cube3 = np.array(list(itertools.product([-1, 1], repeat=3)), dtype=float)
frame = solve_A(cube3)
print("3-cube normals:")
print(np.round(frame.normals, 12))
for i, j in itertools.combinations(range(3), 2):
    q = quadrant_counts_pair(cube3, frame.hyperplanes[i], frame.hyperplanes[j]).quadrants
    print(f"  planes {i},{j}: quadrants {q}")

print("delta(m) for m = 1..8:", [delta(m) for m in range(1, 9)])

cube4 = np.array(list(itertools.product([-1, 1], repeat=4)), dtype=float)
pair = solve_B([cube4, cube4 + 0.0], HighDimConfig(force=True))
print("4-cube pair normals:")
print(np.round(pair.normals, 12))

rng = np.random.default_rng(3)
sets = [rng.normal(size=(8, 4)), rng.normal(size=(8, 4))]
found = solve_B(sets)
print("two random 8-point sets in R^4:", "found" if found is not None else "NOT_FOUND")
