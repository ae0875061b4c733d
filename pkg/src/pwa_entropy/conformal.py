"""Conformal piecewise contractions, and a side-by-side contrast with the rhombus map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from gmpy2 import mpq

from . import geometry as geo
from .entropy import DEFAULT_EPSILON, entropy_report
from .errors import ContainmentFailure, InvariantViolation
from .geometry import AffineMap2, ConvexPolygon, Matrix2, Point, Q
from .pwa import Piece, PieceId, PiecewiseMap, build_rhombus, conformality_report, lipschitz_constant

# 3-4-5 rotation scaled by 5/8
CONFORMAL_LINEAR = Matrix2(mpq(3, 8), mpq(-1, 2), mpq(1, 2), mpq(3, 8))
LEFT_OFFSET = (mpq(1, 2), mpq(1, 8))
RIGHT_OFFSET = (mpq(5, 8), mpq(1, 8))
ZERO_RATE_TOLERANCE = 0.05


def conformal_map(left_offset=LEFT_OFFSET, right_offset=RIGHT_OFFSET,
                  linear: Matrix2 = CONFORMAL_LINEAR) -> PiecewiseMap:
    """Unit square cut at x = 1/2, both halves mapped by ``linear`` plus an offset.

    Raises ContainmentFailure if either image leaves the closed square.
    """
    h = mpq(1, 2)
    square = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    left = ConvexPolygon([(0, 0), (h, 0), (h, 1), (0, 1)])
    right = ConvexPolygon([(h, 0), (1, 0), (1, 1), (h, 1)])
    pieces = []
    for i, (cell, off, label) in enumerate(((left, left_offset, "L"), (right, right_offset, "R"))):
        affine = AffineMap2(linear, Point(Q(off[0]), Q(off[1])))
        image = cell.transform(affine)
        if not image.is_subset(square):
            raise ContainmentFailure(f"image of cell {label} is {image}, not inside the unit square")
        pieces.append(Piece(cell, affine, PieceId(i, label)))
    return PiecewiseMap(square, tuple(pieces))


def builtin_conformal_map() -> PiecewiseMap:
    return conformal_map()


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    map: PiecewiseMap
    expected_rate: float
    depth: int
    tolerance: float
    claims_conformal: bool = False

    def certify(self):
        """Re-check conformal contraction from the map data; abort the experiment if it fails."""
        records = conformality_report(self.map)
        if self.claims_conformal and not all(r.contracting for r in records):
            raise InvariantViolation(f"{self.name}: claimed conformal contraction does not hold exactly")
        return records


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    conformal: bool
    scale_sq: tuple  # per piece, exact or None
    lipschitz_l1: object
    rates: dict  # method -> last successive rate
    slopes: dict  # method -> least-squares slope
    counts: dict  # method -> ((n, count), ...)
    expected_rate: float
    tolerance: float
    verdicts: dict  # method -> bool
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ContrastReport:
    depth: int
    experiments: tuple

    def __getitem__(self, name) -> ExperimentResult:
        for e in self.experiments:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(all(e.verdicts.values()) for e in self.experiments)


def default_experiments(depth: int) -> list:
    return [
        ExperimentSpec("conformal", builtin_conformal_map(), 0.0, depth, ZERO_RATE_TOLERANCE, True),
        ExperimentSpec("rhombus", build_rhombus(mpq(1, 2)), math.log(2), depth, ZERO_RATE_TOLERANCE),
    ]


def run_experiment(experiment: ExperimentSpec, estimator_depth: int = 6, mesh=mpq(1, 32),
                   epsilon=DEFAULT_EPSILON) -> ExperimentResult:
    """Run every estimator on one map and judge it against its expected rate.

    The exact routes (cells, transition) go to ``experiment.depth``; the grid
    estimators stop at ``estimator_depth``.  Only the exact routes decide
    the verdict of a positive-entropy experiment.  For a zero-entropy claim
    every method except ``transition`` must stay below the tolerance: the
    subshift of a coarse partition only bounds the entropy from above, and
    for a contraction it can be far from sharp.
    """
    records = experiment.certify()
    exact = entropy_report(experiment.map, experiment.depth, epsilon, mesh, ("cells", "transition"))
    grid = entropy_report(experiment.map, estimator_depth, epsilon, mesh, ("spanning", "separated"))
    series = {**exact.series, **grid.series}
    rates = {k: s.last_rate for k, s in series.items()}
    rates["transition"] = series["transition"].extra["log_spectral_radius"]
    slopes = {k: s.fit.slope for k, s in series.items()}
    if experiment.expected_rate == 0.0:
        verdicts = {k: r <= experiment.tolerance for k, r in rates.items() if k != "transition"}
    else:
        verdicts = {k: abs(rates[k] - experiment.expected_rate) <= experiment.tolerance for k in ("cells", "transition")}
    return ExperimentResult(
        experiment.name,
        all(r.conformal for r in records),
        tuple(r.scale_sq for r in records),
        lipschitz_constant(experiment.map, geo.Metric.L1),
        rates, slopes,
        {k: s.counts for k, s in series.items()},
        experiment.expected_rate, experiment.tolerance, verdicts,
        {"lipschitz_l2": lipschitz_constant(experiment.map, geo.Metric.L2),
         "lipschitz_linf": lipschitz_constant(experiment.map, geo.Metric.LINF)},
    )


def run_contrast(depth: int = 12, estimator_depth: int = 6, mesh=mpq(1, 32)) -> ContrastReport:
    """Zero-entropy conformal map versus the log 2 rhombus map."""
    results = tuple(run_experiment(e, estimator_depth, mesh) for e in default_experiments(depth))
    return ContrastReport(depth, results)
