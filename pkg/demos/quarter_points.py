"""Quarter a random planar point set with two perpendicular lines.

Run: python3 demos/quarter_points.py [n] [seed]
Writes quarter_points.svg next to the current directory.
"""

import sys

from pancake import SolveStats, count_quadrants, solve, verify_cut
from pancake.io import generate, svg_plot

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0

P = generate(n, "gaussian", seed)
stats = SolveStats()
cut = solve(P, stats=stats)
c = count_quadrants(P, cut)

print(f"{n} gaussian points, seed {seed}")
print(f"line 1: slope {cut.line1.slope}, intercept {cut.line1.intercept}")
print(f"line 2: slope {cut.line2.slope}, intercept {cut.line2.intercept}")
print(f"open quadrants {c.q1} {c.q2} {c.q3} {c.q4}, on line 1 {c.on1}, on line 2 {c.on2}, bound {n // 4}")
print(f"method {stats.method}, phases {stats.phases}, comparisons {stats.comparisons}")
print("valid:", verify_cut(P, cut))

with open("quarter_points.svg", "w") as fh:
    fh.write(svg_plot(P, cut))
print("wrote quarter_points.svg")
