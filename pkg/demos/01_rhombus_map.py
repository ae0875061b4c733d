"""
The rhombus map and its refined partitions
==========================================

Build the piecewise affine map on the rhombus |x| + |y| <= 1, look at its
pieces, follow one orbit exactly and count the cells of the refined
partitions.
"""

from gmpy2 import mpq

from pwa_entropy import build_rhombus, cell_counts, lipschitz_constant, orbit, pt
from pwa_entropy.geometry import Metric, gram_eigenvalues
from pwa_entropy.reporting import partition_svg
from pwa_entropy.symbolic import dyadic_crosscheck, refine_partition

f = build_rhombus(mpq(1, 2))

# Four triangular pieces, each mapped affinely onto a smaller triangle
# hanging from A = (0, 1) or B = (0, -1).
for p in f.pieces:
    print(p.id.label, [[str(v) for v in row] for row in p.map.linear.rows()], p.map.offset)

# In the l1 norm every linear part has norm 2t, so t = 1/2 is the borderline
# non-strict case.  The Euclidean norm of the same matrix is larger than 1.
print("l1 Lipschitz:", lipschitz_constant(f))
print("largest Gram eigenvalue:", gram_eigenvalues(f.pieces[0].map.linear).eigenvalues[0])
print("l2 Lipschitz:", lipschitz_constant(f, Metric.L2))

# Exact orbit of a rational point; it creeps towards A.
res = orbit(f, pt("-1/2", "1/4"), 6)
print(res.status.value, [str(q) for q in res.points])

# Cells of the depth-n refinement double at every step ...
print(cell_counts(f, 8))

# ... and they are exactly the triangles over a dyadic split of CD.
print("dyadic at depth 6:", dyadic_crosscheck(mpq(1, 2), 6))

part = refine_partition(f, 5)
with open("rhombus_depth5.svg", "w") as fh:
    fh.write(partition_svg(f, part, title="depth 5"))
print("wrote rhombus_depth5.svg")
