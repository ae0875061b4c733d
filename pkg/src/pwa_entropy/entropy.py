"""Bowen distance and (n, eps) spanning / separated set estimators.

The greedy estimators run over a fixed candidate grid.  Every candidate orbit
is computed exactly once; at each step the coordinates are scaled by a
common denominator so that all Bowen-ball tests become integer comparisons
in numpy (int64 when the magnitudes allow, Python ints otherwise).  Nothing
is rounded on the decision path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from gmpy2 import lcm, mpq, mpz

from . import geometry as geo
from .errors import CoverageFailure, EmptyCandidateSet
from .geometry import ConvexPolygon, HalfPlane, Location, Metric, Point, Q
from .pwa import Outcome, PiecewiseMap, build_rhombus, locate
from .symbolic import (
    DEFAULT_DEPTH_CAP,
    _check_depth,
    cell_counts,
    dyadic_triangles,
    transition_graph,
)

DEFAULT_EPSILON = mpq(1, 2)
DEFAULT_MESH = mpq(1, 64)
COVER_MESH = mpq(1, 128)
METHODS = ("cells", "transition", "spanning", "separated")

_INT64_SAFE = 2 ** 61


@dataclass(frozen=True)
class BowenDistance:
    value: object  # exact rational (squared for L2)
    defined_up_to: int
    n: int

    @property
    def complete(self) -> bool:
        return self.defined_up_to == self.n


def bowen_distance(m: PiecewiseMap, x: Point, y: Point, n: int) -> BowenDistance:
    """``max_{i<n} d(f^i x, f^i y)`` over the iterates that exist."""
    if n < 1:
        raise ValueError("n must be >= 1")
    best = mpq(0)
    steps = 0
    for i in range(n):
        best = max(best, geo.distance(m.metric, x, y))
        steps = i + 1
        if i + 1 == n:
            break
        wx, wy = locate(m, x), locate(m, y)
        if isinstance(wx, Outcome) or isinstance(wy, Outcome):
            break
        x, y = m.pieces[wx.index].map(x), m.pieces[wy.index].map(y)
    return BowenDistance(best, steps, n)


def candidate_grid(m: PiecewiseMap, mesh) -> list:
    """Grid points of pitch ``mesh`` offset by ``mesh/2``, inside the domain interior.

    Ordered lexicographically by (x, y).
    """
    mesh = Q(mesh)
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    x0, y0, x1, y1 = m.domain.bbox()
    i0 = math.floor((x0 - mesh / 2) / mesh)
    i1 = math.ceil((x1 - mesh / 2) / mesh)
    j0 = math.floor((y0 - mesh / 2) / mesh)
    j1 = math.ceil((y1 - mesh / 2) / mesh)
    half = mesh / 2
    out = []
    for i in range(i0, i1 + 1):
        x = i * mesh + half
        for j in range(j0, j1 + 1):
            p = Point(x, j * mesh + half)
            if m.domain.locate(p) == Location.INTERIOR:
                out.append(p)
    return out


def orbit_points(m: PiecewiseMap, x: Point, n: int) -> Optional[list]:
    """``[x, f x, ..., f^(n-1) x]`` or None if one of the first n-1 points is undefined."""
    pts = [x]
    for _ in range(n - 1):
        where = locate(m, x)
        if isinstance(where, Outcome):
            return None
        x = m.pieces[where.index].map(x)
        pts.append(x)
    return pts


class OrbitTable:
    """Exact orbits of many points, stored as integer arrays per step."""

    def __init__(self, m: PiecewiseMap, points: Sequence[Point], n: int):
        self.map = m
        self.n = n
        self.metric = m.metric
        orbits, kept, skipped = [], [], 0
        for p in points:
            orb = orbit_points(m, p, n)
            if orb is None:
                skipped += 1
            else:
                orbits.append(orb)
                kept.append(p)
        self.points = kept
        self.skipped = skipped
        self.denominators = []
        self.xs, self.ys = [], []
        for i in range(n):
            den = mpz(1)
            for orb in orbits:
                den = lcm(den, lcm(orb[i].x.denominator, orb[i].y.denominator))
            xs = [int(orb[i].x * den) for orb in orbits]
            ys = [int(orb[i].y * den) for orb in orbits]
            big = max((abs(v) for v in xs + ys), default=0)
            dtype = np.int64 if big < _INT64_SAFE // 16 and den < _INT64_SAFE // 16 else object
            self.denominators.append(int(den))
            self.xs.append(np.array(xs, dtype=dtype))
            self.ys.append(np.array(ys, dtype=dtype))

    def __len__(self):
        return len(self.points)

    def _step_dist(self, i, c, idx):
        xs, ys = self.xs[i], self.ys[i]
        if idx is not None:
            xs, ys = xs[idx], ys[idx]
        dx = np.abs(xs - self.xs[i][c])
        dy = np.abs(ys - self.ys[i][c])
        if self.metric == Metric.L1:
            return dx + dy
        if self.metric == Metric.LINF:
            return np.maximum(dx, dy)
        return dx.astype(object) ** 2 + dy.astype(object) ** 2

    def within(self, c: int, eps, idx=None) -> np.ndarray:
        """Mask of table rows (or of ``idx``) whose Bowen distance to row c is <= eps."""
        eps = Q(eps)
        p, q = int(eps.numerator), int(eps.denominator)
        size = len(self.points) if idx is None else len(idx)
        ok = np.ones(size, dtype=bool)
        for i in range(self.n):
            d = self._step_dist(i, c, idx)
            den = self.denominators[i]
            if self.metric == Metric.L2:
                lhs, rhs = d * (q * q), (p * den) ** 2
            else:
                use_obj = d.dtype == object or p * den >= _INT64_SAFE or q >= 2 ** 20
                lhs = (d.astype(object) if use_obj else d) * q
                rhs = p * den
            ok &= np.asarray(lhs <= rhs, dtype=bool)
        return ok

    def distances(self, c: int, idx=None) -> np.ndarray:
        """Float Bowen distances to row c, for reporting only."""
        best = None
        for i in range(self.n):
            d = self._step_dist(i, c, idx).astype(float)
            if self.metric == Metric.L2:
                d = np.sqrt(d)
            d = d / self.denominators[i]
            best = d if best is None else np.maximum(best, d)
        return best


@dataclass(frozen=True)
class SpanningEstimate:
    n: int
    epsilon: object
    count: int
    centers: tuple
    candidate_count: int
    skipped_singular: int
    max_radius: Optional[float] = None
    verified: bool = True


@dataclass(frozen=True)
class SeparatedEstimate:
    n: int
    epsilon: object
    count: int
    points: tuple
    candidate_count: int
    skipped_singular: int


def _table(m, n, mesh):
    if n < 1:
        raise ValueError("n must be >= 1")
    table = OrbitTable(m, candidate_grid(m, mesh), n)
    if len(table) == 0:
        raise EmptyCandidateSet(f"no usable candidates at mesh {geo.format_rational(Q(mesh))}")
    return table


def _cross_validate(m, table, pairs, eps):
    """Re-decide a few (candidate, center) pairs with the slow exact Bowen distance."""
    for a, b in pairs:
        d = bowen_distance(m, table.points[a], table.points[b], table.n)
        bound = eps * eps if m.metric == Metric.L2 else eps
        if (d.value <= bound) != bool(table.within(b, eps, np.array([a]))[0]):
            raise AssertionError(f"fast and exact Bowen tests disagree on rows {a}, {b}")


def _greedy_cover(table, eps):
    uncovered = np.ones(len(table), dtype=bool)
    centers = []
    while uncovered.any():
        c = int(np.argmax(uncovered))
        centers.append(c)
        uncovered &= ~table.within(c, eps)
    return centers


def greedy_spanning_estimate(m: PiecewiseMap, n: int, epsilon=DEFAULT_EPSILON,
                             mesh=DEFAULT_MESH) -> SpanningEstimate:
    """Greedy (n, eps)-spanning set over the candidate grid.

    Repeatedly promotes the first uncovered candidate (lexicographic order)
    to a center and covers its closed Bowen ball.  The cover is re-verified
    from scratch before returning.
    """
    eps = Q(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    table = _table(m, n, mesh)
    centers = _greedy_cover(table, eps)
    covered = np.zeros(len(table), dtype=bool)
    owner = np.full(len(table), -1)
    for c in centers:
        hit = table.within(c, eps)
        owner[hit & ~covered] = c
        covered |= hit
    if not covered.all():
        raise AssertionError("greedy spanning set failed its own coverage certificate")
    rows = np.linspace(0, len(table) - 1, num=min(16, len(table))).astype(int)
    _cross_validate(m, table, [(int(r), int(owner[r])) for r in rows], eps)
    return SpanningEstimate(n, eps, len(centers), tuple(table.points[c] for c in centers),
                            len(table), table.skipped)


def greedy_separated_estimate(m: PiecewiseMap, n: int, epsilon=mpq(1),
                              mesh=DEFAULT_MESH) -> SeparatedEstimate:
    """Greedy (n, eps)-separated set: accept a candidate iff it is > eps from all accepted."""
    eps = Q(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    table = _table(m, n, mesh)
    blocked = np.zeros(len(table), dtype=bool)
    accepted = []
    for i in range(len(table)):
        if blocked[i]:
            continue
        accepted.append(i)
        blocked |= table.within(i, eps)
    idx = np.array(accepted)
    for k, a in enumerate(accepted):
        close = table.within(a, eps, idx)
        if close.sum() != 1 or not close[k]:
            raise AssertionError(f"accepted point {a} is within epsilon of another accepted point")
    if len(accepted) > 1:
        _cross_validate(m, table, list(zip(accepted[:8], accepted[1:9])), eps)
    return SeparatedEstimate(n, eps, len(accepted), tuple(table.points[a] for a in accepted),
                             len(table), table.skipped)


PLACEMENTS = ("l1", "median")


def _median_centers(apex, z0, z1, k):
    mid = geo.lerp(z0, z1, mpq(1, 2))
    return [geo.lerp(apex, mid, mpq(2 * j - 1, 2 * k)) for j in range(1, k + 1)]


def _l1_centers(apex, z0, z1, k, eps):
    """Centers whose l1 eps-balls tile the closed triangle slab by slab.

    Reflect the triangle so the apex is (0, 1) and the base lies in x <= 0,
    then work in u = x + y, v = y - x where l1 balls are axis-parallel
    squares of side 2 eps.  The u-range is cut into k equal slabs; each
    center takes the slab's mid u and a v that keeps the slab's whole v-range
    inside its square, preferring the open triangle.  When the slab is wider
    than 2 eps no such square exists and the verification will say so.
    """
    sx = -1 if z0.x + z1.x > 0 else 1
    sy = -1 if apex.y < 0 else 1
    flip = lambda p: Point(sx * p.x, sy * p.y)
    tri = ConvexPolygon([flip(apex), flip(z0), flip(z1)])
    us = [v.x + v.y for v in tri.vertices]
    lo, hi = min(us), max(us)
    out = []
    for j in range(k):
        s0, s1 = lo + (hi - lo) * mpq(j, k), lo + (hi - lo) * mpq(j + 1, k)
        uc = (s0 + s1) / 2
        slab = tri.clip(HalfPlane(Point(1, 1), s0))
        slab = slab and slab.clip(HalfPlane(Point(-1, -1), -s1))
        vs = [v.y - v.x for v in slab.vertices] if slab else [uc]
        want_lo, want_hi = max(vs) - eps, min(vs) + eps
        # the chord of the triangle at u = uc
        chord = [v.y - v.x for v in _chord(tri, uc)]
        c_lo, c_hi = min(chord), max(chord)
        a, b = max(want_lo, c_lo), min(want_hi, c_hi)
        if a < b:
            vc = _simplest_dyadic(a, b)
        else:
            vc = a if a == b else min(max((want_lo + want_hi) / 2, c_lo), c_hi)
        out.append(flip(Point((uc - vc) / 2, (uc + vc) / 2)))
    return out


def _simplest_dyadic(a, b):
    """The dyadic rational with the smallest denominator in the open interval (a, b).

    Small denominators keep the orbit table on the int64 path.
    """
    d = 1
    while True:
        k = math.floor(a * d) + 1
        if mpq(k, d) < b:
            return mpq(k, d)
        d *= 2


def _chord(poly, u):
    """Endpoints of the intersection of a convex polygon with the line x + y = u."""
    pts = []
    vs = poly.vertices
    for p, q in zip(vs, vs[1:] + vs[:1]):
        fp, fq = p.x + p.y - u, q.x + q.y - u
        if fp == 0:
            pts.append(p)
        if fp * fq < 0:
            pts.append(geo.lerp(p, q, fp / (fp - fq)))
    return pts


def dyadic_cover_centers(n: int, per_triangle: int = 2, placement: str = "l1",
                        epsilon=DEFAULT_EPSILON) -> list:
    """``per_triangle`` centers in each dyadic triangle A Z_i Z_{i+1}, B Z_i Z_{i+1}.

    ``median`` puts them on the median from the apex to the midpoint of
    Z_i Z_{i+1} at parameters (2j - 1) / (2 * per_triangle).  ``l1`` places
    them so their l1 eps-balls cover the closed triangle (see
    :func:`_l1_centers`); for n >= 2 and two centers they lie inside the
    cell, at n = 1 they sit on its edge, which is harmless since d_1 is the
    plain metric.  Neighbouring triangles then share edge midpoints, so the
    list holds repeats; it always has ``per_triangle * 2**(n+1)`` entries.
    """
    if placement not in PLACEMENTS:
        raise ValueError(f"placement must be one of {PLACEMENTS}")
    eps = Q(epsilon)
    centers = []
    for tri in dyadic_triangles(n):
        apex = next(v for v in tri.vertices if v.x == 0 and v.y != 0)
        z0, z1 = sorted(v for v in tri.vertices if v.y == 0)
        if placement == "median":
            centers += _median_centers(apex, z0, z1, per_triangle)
        else:
            centers += _l1_centers(apex, z0, z1, per_triangle, eps)
    return centers


def dyadic_cover(t, n: int, epsilon=DEFAULT_EPSILON, centers_per_triangle: int = 2,
                mesh=COVER_MESH, depth_cap: int = DEFAULT_DEPTH_CAP,
                metric: Metric = Metric.L1, placement: str = "l1") -> SpanningEstimate:
    """The explicit cover built from dyadic triangles, checked on a candidate grid.

    Raises CoverageFailure (with the worst candidate and its excess over eps)
    if some candidate is not within Bowen distance eps of any center.
    """
    _check_depth(n, depth_cap)
    eps = Q(epsilon)
    m = build_rhombus(t, metric)
    centers = dyadic_cover_centers(n, centers_per_triangle, placement, eps)
    cands = candidate_grid(m, mesh)
    table = OrbitTable(m, cands + centers, n)
    if len(table.points) < len(centers) or table.points[-len(centers):] != centers:
        raise CoverageFailure("some cover center has an undefined orbit")
    k = len(table) - len(centers)
    if k == 0:
        raise EmptyCandidateSet("no usable candidates")
    cand_idx = np.arange(k)
    covered = np.zeros(k, dtype=bool)
    radius = np.full(k, np.inf)
    for c in range(k, len(table)):
        covered |= table.within(c, eps, cand_idx)
        radius = np.minimum(radius, table.distances(c, cand_idx))
    worst = int(np.argmax(radius))
    if not covered.all():
        bad = np.nonzero(~covered)[0]
        w = int(bad[np.argmax(radius[bad])])
        raise CoverageFailure(
            f"{len(bad)} of {k} candidates uncovered at n={n}; worst {table.points[w]} "
            f"exceeds eps by {radius[w] - float(eps):.6g}",
            worst_point=table.points[w], gap=radius[w] - float(eps))
    return SpanningEstimate(n, eps, len(centers), tuple(centers), k, table.skipped,
                            max_radius=float(radius[worst]), verified=True)


# interface name used by older callers
paper_cover = dyadic_cover


# -- rate estimation -------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float  # RMS residual of log(count) about the fitted line


def successive_rates(counts) -> list:
    return [(n1, math.log(c1 / c0)) for (_, c0), (n1, c1) in zip(counts, counts[1:])]


def fit_rate(counts) -> RateFit:
    """Least-squares slope of ``log(count)`` against ``n``."""
    ns = np.array([n for n, _ in counts], dtype=float)
    logs = np.array([math.log(c) for _, c in counts])
    if len(ns) < 2:
        return RateFit(float("nan"), float(logs[0]) if len(logs) else float("nan"), 0.0)
    slope, intercept = np.polyfit(ns, logs, 1)
    resid = logs - (slope * ns + intercept)
    return RateFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))))


@dataclass(frozen=True)
class MethodSeries:
    method: str
    counts: tuple  # (n, count)
    rates: tuple  # (n, successive log-ratio)
    fit: RateFit
    extra: dict = field(default_factory=dict)

    @property
    def last_rate(self) -> float:
        return self.rates[-1][1] if self.rates else float("nan")


@dataclass(frozen=True)
class EntropyReport:
    series: dict  # method -> MethodSeries
    metadata: dict

    def __getitem__(self, method) -> MethodSeries:
        return self.series[method]


def _series(method, counts, extra=None) -> MethodSeries:
    counts = tuple(counts)
    return MethodSeries(method, counts, tuple(successive_rates(counts)), fit_rate(counts), extra or {})


def entropy_report(m: PiecewiseMap, n_max: int, epsilon=DEFAULT_EPSILON, mesh=DEFAULT_MESH,
                   methods: Iterable[str] = ("cells", "transition"), n_min: int = 1,
                   separated_epsilon=None, depth_cap: int = DEFAULT_DEPTH_CAP,
                   threads: int = 1) -> EntropyReport:
    """Counts and growth rates per method over depths ``n_min..n_max``.

    ``separated_epsilon`` defaults to ``2 * epsilon`` so the separated
    series is the lower side of the spanning/separated sandwich.
    """
    methods = list(methods)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
    eps = Q(epsilon)
    sep_eps = Q(separated_epsilon) if separated_epsilon is not None else 2 * eps
    series = {}
    for method in METHODS:
        if method not in methods:
            continue
        if method == "cells":
            counts = [c for c in cell_counts(m, n_max, depth_cap, threads) if c[0] >= n_min]
            series[method] = _series(method, counts)
        elif method == "transition":
            g = transition_graph(m)
            counts = [c for c in g.path_counts(n_max) if c[0] >= n_min]
            rho = g.spectral_radius
            series[method] = _series(method, counts, {
                "spectral_radius": rho,
                "log_spectral_radius": math.log(rho) if rho > 0 else float("-inf"),
                "power_residual": g.residual,
            })
        elif method == "spanning":
            ests = [greedy_spanning_estimate(m, n, eps, mesh) for n in range(n_min, n_max + 1)]
            series[method] = _series(method, [(e.n, e.count) for e in ests],
                                     {"skipped": [e.skipped_singular for e in ests],
                                      "candidates": ests[0].candidate_count})
        else:
            ests = [greedy_separated_estimate(m, n, sep_eps, mesh) for n in range(n_min, n_max + 1)]
            series[method] = _series(method, [(e.n, e.count) for e in ests],
                                     {"skipped": [e.skipped_singular for e in ests],
                                      "epsilon": geo.format_rational(sep_eps)})
    meta = {
        "epsilon": geo.format_rational(eps),
        "separated_epsilon": geo.format_rational(sep_eps),
        "mesh": geo.format_rational(Q(mesh)),
        "metric": m.metric.value,
        "n_min": n_min,
        "n_max": n_max,
        "methods": [k for k in METHODS if k in methods],
    }
    return EntropyReport(series, meta)
