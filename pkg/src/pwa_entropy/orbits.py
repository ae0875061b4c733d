"""Orbits, convergence to the two-point attractor, and Lyapunov bounds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpq

from . import geometry as geo
from .errors import OrbitTruncated
from .geometry import Location, Matrix2, Point
from .pwa import A, B, OUTSIDE, Outcome, PiecewiseMap, lipschitz_constant, locate
from .symbolic import Itinerary


class OrbitStatus(enum.Enum):
    COMPLETE = "complete"
    HIT_SINGULAR = "hit_singular"
    LEFT_DOMAIN = "left_domain"


@dataclass(frozen=True)
class OrbitResult:
    points: tuple
    symbols: Itinerary
    status: OrbitStatus
    stopped_at: Optional[int] = None


def orbit(m: PiecewiseMap, x0: Point, n: int) -> OrbitResult:
    """Iterate n times from x0, returning x0 .. f^n x0 unless the orbit breaks first."""
    if n < 1:
        raise ValueError("n must be >= 1")
    points, symbols = [x0], []
    x = x0
    for step in range(n):
        where = locate(m, x)
        if isinstance(where, Outcome):
            status = OrbitStatus.LEFT_DOMAIN if where is OUTSIDE else OrbitStatus.HIT_SINGULAR
            return OrbitResult(tuple(points), Itinerary(tuple(symbols), step), status, step)
        symbols.append(where)
        x = m.pieces[where.index].map(x)
        points.append(x)
    return OrbitResult(tuple(points), Itinerary(tuple(symbols)), OrbitStatus.COMPLETE)


def sample_points(m: PiecewiseMap, count: int, seed: int, bits: int = 12) -> list:
    """Seeded points in the domain interior with odd numerators over ``2**bits``.

    Odd numerators keep every coordinate nonzero, so no sample starts on
    an axis.
    """
    rng = np.random.default_rng(seed)
    den = 2 ** bits
    x0, y0, x1, y1 = m.domain.bbox()
    lo_x, hi_x = math.floor(x0 * den), math.ceil(x1 * den)
    lo_y, hi_y = math.floor(y0 * den), math.ceil(y1 * den)
    out = []
    while len(out) < count:
        nx = int(rng.integers(lo_x, hi_x + 1)) | 1
        ny = int(rng.integers(lo_y, hi_y + 1)) | 1
        p = Point(mpq(nx, den), mpq(ny, den))
        if m.domain.locate(p) == Location.INTERIOR:
            out.append(p)
    return out


@dataclass(frozen=True)
class AttractorProfile:
    max_distance: tuple  # (step, exact rational max distance over surviving orbits)
    sample_count: int
    truncated: int
    survivors: tuple  # (step, surviving orbit count)


def attractor_profile(m: PiecewiseMap, samples: int, n: int, seed: int,
                      attractor: Sequence[Point] = (A, B)) -> AttractorProfile:
    """Largest L1 distance from ``f^i x`` to the attractor set, for i = 0..n.

    Orbits that hit the singular set drop out from that step on.
    """
    starts = sample_points(m, samples, seed)
    best = [mpq(0)] * (n + 1)
    alive = [0] * (n + 1)
    truncated = 0
    for x in starts:
        res = orbit(m, x, n)
        for i, p in enumerate(res.points):
            d = min(geo.distance(geo.Metric.L1, p, a) for a in attractor)
            if d > best[i]:
                best[i] = d
            alive[i] += 1
        if res.status is not OrbitStatus.COMPLETE:
            truncated += 1
    return AttractorProfile(tuple(enumerate(best)), samples, truncated, tuple(enumerate(alive)))


@dataclass(frozen=True)
class LyapunovEstimate:
    n: int
    value: float
    bound: float
    norm: object  # exact l1 norm of the matrix product


def _log_rational(r) -> float:
    return math.log(int(r.numerator)) - math.log(int(r.denominator))


def lyapunov_estimate(m: PiecewiseMap, x0: Point, n: int) -> LyapunovEstimate:
    """``(1/n) log ||L_{n-1} ... L_0||_1`` along the exact orbit of x0.

    The bound is ``log`` of the map's l1 Lipschitz constant, which the
    value can never exceed.
    """
    res = orbit(m, x0, n)
    if res.status is not OrbitStatus.COMPLETE:
        raise OrbitTruncated(f"orbit of {x0} stops at step {res.stopped_at} ({res.status.value})")
    prod = Matrix2.identity()
    for sym in res.symbols.symbols:
        prod = m.pieces[sym.index].map.linear @ prod
    norm = geo.operator_norm_l1(prod)
    value = _log_rational(norm) / n if norm > 0 else float("-inf")
    lip = lipschitz_constant(m, geo.Metric.L1)
    return LyapunovEstimate(n, value, _log_rational(lip), norm)


def lyapunov_batch(m: PiecewiseMap, samples: int, n: int, seed: int) -> list:
    """``(sample index, estimate)`` for seeded starts; truncated orbits are skipped."""
    out = []
    for k, x in enumerate(sample_points(m, samples, seed)):
        try:
            out.append((k, lyapunov_estimate(m, x, n)))
        except OrbitTruncated:
            continue
    return out
