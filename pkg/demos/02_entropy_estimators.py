"""
Four ways to see entropy log 2
==============================

Count refined cells, take the spectral radius of the transition graph,
and build greedy spanning and separated sets in the Bowen metric.  The
explicit dyadic cover is verified on a fine grid at the end.
"""

import math

from gmpy2 import mpq

from pwa_entropy import build_rhombus, entropy_report, dyadic_cover

f = build_rhombus(mpq(1, 2))

report = entropy_report(f, 7, epsilon=mpq(1, 2), mesh=mpq(1, 64),
                        methods=["cells", "transition", "spanning", "separated"])
for name, series in report.series.items():
    counts = [c for _, c in series.counts]
    print(f"{name:10s} counts {counts}")
    print(f"{'':10s} last rate {series.last_rate:.4f}  slope {series.fit.slope:.4f}")
print("log 2 =", math.log(2))

# The greedy grid counts carry transients at small n; their successive
# ratios settle near 2 all the same.

# Two balls per dyadic triangle suffice: 2^(n+2) centers, checked against
# every point of a mesh-1/128 grid.
for n in (2, 4, 6):
    est = dyadic_cover(mpq(1, 2), n)
    print(f"n={n}: {est.count} centers, largest distance to a center {est.max_radius:.4f}")
