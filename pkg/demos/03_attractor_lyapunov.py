"""
Orbits fall onto {A, B}
=======================

For t < 1/2 the map is a strict l1 contraction: every orbit approaches the
two apexes geometrically and the norm of the derivative cocycle shrinks at
rate at least log 2t.
"""

import math

from gmpy2 import mpq

from pwa_entropy import attractor_profile, build_rhombus
from pwa_entropy.orbits import lyapunov_batch

for t in (mpq(1, 4), mpq(3, 8)):
    f = build_rhombus(t)
    prof = attractor_profile(f, 300, 30, seed=1)
    print(f"t={t}: {prof.truncated} of {prof.sample_count} orbits hit the singular web")
    for i, d in prof.max_distance[1:30:5]:
        print(f"  step {i:2d}: max distance {float(d):.3e}  bound (2t)^i = {float((2 * t) ** i):.3e}")

f = build_rhombus(mpq(1, 4))
batch = lyapunov_batch(f, 50, 100, seed=1)
values = [e.value for _, e in batch]
print(f"Lyapunov estimates over {len(batch)} orbits: max {max(values):.6f}, "
      f"bound log(1/2) = {math.log(0.5):.6f}")
