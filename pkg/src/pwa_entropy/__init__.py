"""Exact toolkit for a piecewise affine contraction of the rhombus with entropy log 2.

The map lives in :mod:`pwa_entropy.pwa`; partitions and the transition
graph in :mod:`pwa_entropy.symbolic`; Bowen-metric estimators in
:mod:`pwa_entropy.entropy`; orbits and Lyapunov bounds in
:mod:`pwa_entropy.orbits`; the conformal comparison in
:mod:`pwa_entropy.conformal`.
"""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    AffineMap2,
    ConvexPolygon,
    Matrix2,
    Metric,
    Point,
    Q,
    affine_from_correspondence,
    distance,
    format_rational,
    gram_eigenvalues,
    operator_norm_l1,
    parse_rational,
    pt,
)
from .pwa import (  # noqa: E402
    SINGULAR,
    OUTSIDE,
    Mapped,
    PiecewiseMap,
    build_rhombus,
    conformality_report,
    evaluate,
    lipschitz_constant,
    load_map,
    locate,
    save_map,
)
from .symbolic import (  # noqa: E402
    cell_counts,
    dyadic_crosscheck,
    itinerary,
    multiplicity_profile,
    refine_partition,
    transition_graph,
)
from .entropy import (  # noqa: E402
    bowen_distance,
    entropy_report,
    greedy_separated_estimate,
    greedy_spanning_estimate,
    dyadic_cover,
)
from .orbits import attractor_profile, lyapunov_estimate, orbit  # noqa: E402
from .conformal import builtin_conformal_map, run_contrast  # noqa: E402

__all__ = [
    "AffineMap2", "ConvexPolygon", "Matrix2", "Metric", "Point", "Q",
    "affine_from_correspondence", "distance", "format_rational", "gram_eigenvalues",
    "operator_norm_l1", "parse_rational", "pt",
    "SINGULAR", "OUTSIDE", "Mapped", "PiecewiseMap", "build_rhombus", "conformality_report",
    "evaluate", "lipschitz_constant", "load_map", "locate", "save_map",
    "cell_counts", "dyadic_crosscheck", "itinerary", "multiplicity_profile",
    "refine_partition", "transition_graph",
    "bowen_distance", "entropy_report", "greedy_separated_estimate",
    "greedy_spanning_estimate", "dyadic_cover",
    "attractor_profile", "lyapunov_estimate", "orbit",
    "builtin_conformal_map", "run_contrast",
]
