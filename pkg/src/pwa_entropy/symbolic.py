"""Itineraries, refined partitions and the transition subshift.

Depth-n cells are computed forward: every cell carries the composite affine
map ``f^n`` restricted to it, so the next refinement only needs to clip the
cell by the half-planes of each piece pulled back through that composite.
No polygon is ever inverted.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from gmpy2 import mpq

from . import geometry as geo
from .errors import DepthCapExceeded
from .geometry import AffineMap2, ConvexPolygon, Point
from .pwa import Outcome, PiecewiseMap, build_rhombus, locate

DEFAULT_DEPTH_CAP = 14


@dataclass(frozen=True)
class Itinerary:
    symbols: tuple  # of PieceId
    truncated_at: Optional[int] = None

    @property
    def complete(self) -> bool:
        return self.truncated_at is None

    @property
    def indices(self) -> tuple:
        return tuple(s.index for s in self.symbols)

    def __str__(self):
        body = ",".join(s.label for s in self.symbols)
        return body if self.complete else f"{body}|singular@{self.truncated_at}"


def itinerary(m: PiecewiseMap, x: Point, n: int) -> Itinerary:
    """Pieces visited by x, f x, ..., f^(n-1) x; stops at the first undefined point."""
    if n < 1:
        raise ValueError("n must be >= 1")
    symbols = []
    for step in range(n):
        where = locate(m, x)
        if isinstance(where, Outcome):
            return Itinerary(tuple(symbols), step)
        symbols.append(where)
        if step + 1 < n:
            x = m.pieces[where.index].map(x)
    return Itinerary(tuple(symbols))


@dataclass(frozen=True)
class Cell:
    itinerary: tuple  # piece indices, length = depth
    polygon: ConvexPolygon
    forward: AffineMap2  # f^depth restricted to the cell

    def labels(self, m: PiecewiseMap) -> str:
        return ".".join(m.pieces[i].id.label for i in self.itinerary)


@dataclass(frozen=True)
class RefinedPartition:
    depth: int
    cells: tuple

    def __len__(self):
        return len(self.cells)

    def polygons(self):
        return [c.polygon for c in self.cells]

    def polygon_set(self) -> frozenset:
        return frozenset(c.polygon for c in self.cells)

    def total_area(self):
        return sum((c.polygon.area() for c in self.cells), mpq(0))


def _check_depth(n, depth_cap):
    if n < 1:
        raise ValueError("depth must be >= 1")
    if n > depth_cap:
        raise DepthCapExceeded(f"depth {n} exceeds the cap {depth_cap}")


def _initial(m: PiecewiseMap) -> RefinedPartition:
    cells = tuple(Cell((p.id.index,), p.cell, p.map) for p in m.pieces)
    return RefinedPartition(1, cells)


def _children(m: PiecewiseMap, cell: Cell) -> list:
    out = []
    for piece in m.pieces:
        planes = [cell.forward.pull_back(h) for h in m.cell_halfplanes(piece.id.index)]
        poly = geo.clip_many(cell.polygon, planes)
        if poly is not None:
            out.append(Cell(cell.itinerary + (piece.id.index,), poly, piece.map.compose(cell.forward)))
    return out


def _refine_once(m: PiecewiseMap, part: RefinedPartition, threads: int = 1) -> RefinedPartition:
    if threads > 1 and len(part.cells) > 64:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            groups = list(pool.map(lambda c: _children(m, c), part.cells))
    else:
        groups = [_children(m, c) for c in part.cells]
    cells = [c for g in groups for c in g]
    cells.sort(key=lambda c: c.itinerary)
    return RefinedPartition(part.depth + 1, tuple(cells))


def _spot_check(m: PiecewiseMap, part: RefinedPartition, samples: int = 32) -> None:
    cells = part.cells
    stride = max(1, len(cells) // samples)
    for cell in cells[::stride]:
        it = itinerary(m, cell.polygon.centroid(), part.depth)
        if not it.complete or it.indices != cell.itinerary:
            raise AssertionError(f"cell {cell.itinerary} centroid has itinerary {it}")


def iter_partitions(m: PiecewiseMap, n_max: int, depth_cap: int = DEFAULT_DEPTH_CAP,
                    threads: int = 1, verify: bool = True):
    """Yield the refined partitions at depths 1..n_max in turn."""
    _check_depth(n_max, depth_cap)
    part = _initial(m)
    for depth in range(1, n_max + 1):
        if depth > 1:
            part = _refine_once(m, part, threads)
        if verify:
            _spot_check(m, part)
        yield part


def refine_partition(m: PiecewiseMap, n: int, depth_cap: int = DEFAULT_DEPTH_CAP,
                     threads: int = 1, verify: bool = True) -> RefinedPartition:
    """Positive-area cells ``cell(s0) & f^-1 cell(s1) & ... & f^-(n-1) cell(s_{n-1})``.

    Cells come sorted by itinerary.  With ``verify`` a deterministic sample
    of centroids is re-run through :func:`itinerary` as a consistency check.
    """
    part = None
    for part in iter_partitions(m, n, depth_cap, threads, verify):
        pass
    return part


def cell_counts(m: PiecewiseMap, n_max: int, depth_cap: int = DEFAULT_DEPTH_CAP,
                threads: int = 1) -> list:
    return [(p.depth, len(p.cells)) for p in iter_partitions(m, n_max, depth_cap, threads)]


def dyadic_triangles(n: int, intervals: Optional[int] = None) -> list:
    """Triangles A Z_i Z_{i+1} and B Z_i Z_{i+1} over an even split of CD."""
    k = 2 ** n if intervals is None else intervals
    zs = [Point(mpq(-1) + mpq(2 * i, k), mpq(0)) for i in range(k + 1)]
    apexes = (Point(mpq(0), mpq(1)), Point(mpq(0), mpq(-1)))
    return [ConvexPolygon((apex, zs[i], zs[i + 1])) for apex in apexes for i in range(k)]


def dyadic_crosscheck(t, n: int, intervals: Optional[int] = None,
                      depth_cap: int = DEFAULT_DEPTH_CAP) -> bool:
    """Do the depth-n cells of the rhombus map equal the dyadic triangles exactly?

    ``intervals`` overrides the 2^n split of CD (for negative controls).
    """
    _check_depth(n, depth_cap)
    part = refine_partition(build_rhombus(t), n, depth_cap)
    expected = dyadic_triangles(n, intervals)
    return len(expected) == len(part.cells) and frozenset(expected) == part.polygon_set()


@dataclass(frozen=True)
class TransitionGraph:
    adjacency: np.ndarray  # bool, k x k
    spectral_radius: float
    residual: float

    def path_counts(self, n_max: int) -> list:
        """Number of admissible words of length n = 1..n_max (exact integers)."""
        a = [[int(v) for v in row] for row in self.adjacency]
        k = len(a)
        vec = [1] * k
        out = []
        for n in range(1, n_max + 1):
            out.append((n, sum(vec)))
            vec = [sum(a[i][j] * vec[j] for j in range(k)) for i in range(k)]
        return out

    def words(self, n: int) -> set:
        """All admissible index words of length n."""
        k = len(self.adjacency)
        words = [(i,) for i in range(k)]
        for _ in range(n - 1):
            words = [w + (j,) for w in words for j in range(k) if self.adjacency[w[-1], j]]
        return set(words)


def spectral_radius(matrix, tol: float = 1e-10, max_iter: int = 100_000):
    """Perron root of a nonnegative matrix by power iteration.

    Iterates on ``M + I`` so that periodic (imprimitive) matrices still
    converge; returns ``(rho, residual)`` where the residual is
    ``||M v - rho v||_inf`` for the normalized Perron vector estimate.
    When the Collatz-Wielandt bracket ``min (Mv)_i/v_i <= rho <= max (Mv)_i/v_i``
    stays wider than ``tol`` (defective or reducible cases), the dense
    eigenvalue solver decides.
    """
    a = np.asarray(matrix, dtype=float)
    k = a.shape[0]
    shifted = a + np.eye(k)
    v = np.ones(k) / k
    lam = 0.0
    for _ in range(max_iter):
        w = shifted @ v
        lam = np.abs(w).sum()
        w /= lam
        resid = np.abs(a @ w - (lam - 1.0) * w).max()
        v = w
        if resid <= tol:
            break
    rho = lam - 1.0
    av = a @ v
    if (v > 0).all():
        ratios = av / v
        width = ratios.max() - ratios.min()
    else:
        width = np.inf
    if width > tol:
        rho = float(np.abs(np.linalg.eigvals(a)).max()) if k else 0.0
    return float(rho), float(np.abs(av - rho * v).max())


def transition_graph(m: PiecewiseMap) -> TransitionGraph:
    """Piece i -> j whenever f(cell i) meets cell j in positive area."""
    k = len(m.pieces)
    adj = np.zeros((k, k), dtype=bool)
    for i, p in enumerate(m.pieces):
        img = p.cell.transform(p.map)
        for j, q in enumerate(m.pieces):
            adj[i, j] = img.intersect(q.cell) is not None
    rho, resid = spectral_radius(adj.astype(float))
    return TransitionGraph(adj, float(rho), resid)


@dataclass(frozen=True)
class MultiplicityRecord:
    depth: int
    max_multiplicity: int
    witness: Point


def _float_containment_candidates(verts, polys, tol=1e-9):
    """Pairs (vertex, cell) that may be in closed containment, found in floats."""
    kmax = max(len(p.vertices) for p in polys)
    a = np.empty((len(polys), kmax, 2))
    for i, p in enumerate(polys):
        vs = [(float(q.x), float(q.y)) for q in p.vertices]
        vs += [vs[-1]] * (kmax - len(vs))
        a[i] = vs
    b = np.roll(a, -1, axis=1)
    # padded vertices repeat the last one; its closing edge must return to vertex 0
    for i, p in enumerate(polys):
        b[i, len(p.vertices) - 1:] = a[i, 0]
    edge = b - a
    pts = np.array([(float(v.x), float(v.y)) for v in verts])
    chunk = max(1, 2_000_000 // (len(polys) * kmax))
    for start in range(0, len(pts), chunk):
        q = pts[start:start + chunk, None, None, :]
        rel = q - a[None]
        cr = edge[None, ..., 0] * rel[..., 1] - edge[None, ..., 1] * rel[..., 0]
        ok = (cr >= -tol).all(axis=2)
        for vi, ci in zip(*np.nonzero(ok)):
            yield start + vi, ci


def multiplicity(part: RefinedPartition):
    """``(count, witness)``: the most closed cells sharing one cell vertex.

    Ties go to the vertex with the largest l1 norm, then the lexicographically
    smallest one.
    """
    polys = part.polygons()
    verts = sorted({v for p in polys for v in p.vertices})
    counts = [0] * len(verts)
    for vi, ci in _float_containment_candidates(verts, polys):
        if polys[ci].contains(verts[vi]):
            counts[vi] += 1
    best = min(range(len(verts)), key=lambda i: (-counts[i], -(abs(verts[i].x) + abs(verts[i].y)), i))
    return counts[best], verts[best]


def multiplicity_profile(m: PiecewiseMap, n_max: int, depth_cap: int = DEFAULT_DEPTH_CAP) -> list:
    out = []
    for part in iter_partitions(m, n_max, depth_cap):
        count, witness = multiplicity(part)
        out.append(MultiplicityRecord(part.depth, count, witness))
    return out


def growth_rate(counts) -> list:
    """Successive log ratios ``(n, log(c_n / c_{n-1}))``."""
    return [(n1, math.log(c1 / c0)) for (_, c0), (n1, c1) in zip(counts, counts[1:])]
