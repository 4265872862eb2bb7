"""Comparison counts and wall time of the solver as n doubles.

Run: python3 demos/scaling.py [max_exponent]
"""

import sys

from pancake.bench import run_scaling

top = int(sys.argv[1]) if len(sys.argv) > 1 else 18
report = run_scaling([2**k for k in range(12, top + 1)], trials=5, seed=0)
print(report.summary())
