"""Exact rational plane geometry.

Everything here works on ``gmpy2.mpq`` rationals and never rounds.  Floats
only show up in :func:`gram_eigenvalues`, which is a reporting helper.

Half-planes use an inward normal: ``HalfPlane(normal, offset)`` is the set
``{p : normal . p >= offset}``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from gmpy2 import mpq

from .errors import DegeneratePolygon, DegenerateSource, SingularMatrix

Rational = type(mpq(0))

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def Q(value, den=None) -> Rational:
    """Coerce ints, Fractions, mpq or ``"p/q"`` strings to an exact rational.

    Floats are refused: they would silently carry binary rounding into the
    exact layer.
    """
    if den is not None:
        return mpq(value, den)
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a 'p/q' string or an int")
    if isinstance(value, str):
        return parse_rational(value)
    return mpq(value)


def parse_rational(text: str) -> Rational:
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational of the form 'p/q' or 'p': {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return mpq(int(num), int(den) if den else 1)


def format_rational(r) -> str:
    r = mpq(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


class Point(NamedTuple):
    x: Rational
    y: Rational

    def __str__(self):
        return f"({format_rational(self.x)}, {format_rational(self.y)})"


def pt(x, y) -> Point:
    return Point(Q(x), Q(y))


def sub(p: Point, q: Point) -> Point:
    return Point(p.x - q.x, p.y - q.y)


def add(p: Point, q: Point) -> Point:
    return Point(p.x + q.x, p.y + q.y)


def scale(s, p: Point) -> Point:
    return Point(s * p.x, s * p.y)


def dot(p: Point, q: Point):
    return p.x * q.x + p.y * q.y


def cross(p: Point, q: Point):
    return p.x * q.y - p.y * q.x


def orient(a: Point, b: Point, c: Point):
    """Twice the signed area of triangle abc (positive when counterclockwise)."""
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def lerp(p: Point, q: Point, s) -> Point:
    """The point ``(1 - s) p + s q``."""
    return Point(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y))


class Metric(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


def distance(metric: Metric, p: Point, q: Point) -> Rational:
    """Exact distance; for L2 this is the *squared* Euclidean distance."""
    dx = abs(p.x - q.x)
    dy = abs(p.y - q.y)
    if metric == Metric.L1:
        return dx + dy
    if metric == Metric.LINF:
        return max(dx, dy)
    return dx * dx + dy * dy


def within(metric: Metric, p: Point, q: Point, eps) -> bool:
    """``d(p, q) <= eps`` decided exactly for every metric."""
    d = distance(metric, p, q)
    if metric == Metric.L2:
        return d <= eps * eps
    return d <= eps


def distance_value(metric: Metric, d) -> float:
    """Turn the output of :func:`distance` into a plain float distance."""
    return math.sqrt(d) if metric == Metric.L2 else float(d)


class Matrix2(NamedTuple):
    """Row-major 2x2 matrix ``[[a, b], [c, d]]``."""

    a: Rational
    b: Rational
    c: Rational
    d: Rational

    @classmethod
    def of(cls, rows) -> "Matrix2":
        (a, b), (c, d) = rows
        return cls(Q(a), Q(b), Q(c), Q(d))

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(mpq(1), mpq(0), mpq(0), mpq(1))

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    def det(self):
        return self.a * self.d - self.b * self.c

    def transpose(self) -> "Matrix2":
        return Matrix2(self.a, self.c, self.b, self.d)

    def apply(self, v: Point) -> Point:
        return Point(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Matrix2":
        det = self.det()
        if det == 0:
            raise SingularMatrix(f"matrix {self.rows()} has zero determinant")
        return Matrix2(self.d / det, -self.b / det, -self.c / det, self.a / det)


@dataclass(frozen=True)
class AffineMap2:
    """``x -> linear . x + offset``."""

    linear: Matrix2
    offset: Point

    @classmethod
    def identity(cls) -> "AffineMap2":
        return cls(Matrix2.identity(), Point(mpq(0), mpq(0)))

    def __call__(self, p: Point) -> Point:
        m = self.linear
        return Point(m.a * p.x + m.b * p.y + self.offset.x, m.c * p.x + m.d * p.y + self.offset.y)

    apply = __call__

    def compose(self, inner: "AffineMap2") -> "AffineMap2":
        """``self o inner``: apply ``inner`` first."""
        return AffineMap2(self.linear @ inner.linear, self(inner.offset))

    def inverse(self) -> "AffineMap2":
        inv = self.linear.inverse()
        off = inv.apply(self.offset)
        return AffineMap2(inv, Point(-off.x, -off.y))

    def pull_back(self, h: "HalfPlane") -> "HalfPlane":
        """The half-plane ``{x : self(x) in h}``."""
        n = self.linear.transpose().apply(h.normal)
        return HalfPlane(n, h.offset - dot(h.normal, self.offset))


def apply(m: AffineMap2, p: Point) -> Point:
    return m(p)


def compose(outer: AffineMap2, inner: AffineMap2) -> AffineMap2:
    return outer.compose(inner)


def invert(m: AffineMap2) -> AffineMap2:
    return m.inverse()


def affine_from_correspondence(src: Sequence[Point], dst: Sequence[Point]) -> AffineMap2:
    """The unique affine map sending ``src[i]`` to ``dst[i]`` for i = 0, 1, 2."""
    s0, s1, s2 = src
    d0, d1, d2 = dst
    u1, u2 = sub(s1, s0), sub(s2, s0)
    det = cross(u1, u2)
    if det == 0:
        raise DegenerateSource(f"source points {s0}, {s1}, {s2} are collinear")
    src_basis = Matrix2(u1.x, u2.x, u1.y, u2.y)
    w1, w2 = sub(d1, d0), sub(d2, d0)
    dst_basis = Matrix2(w1.x, w2.x, w1.y, w2.y)
    linear = dst_basis @ src_basis.inverse()
    return AffineMap2(linear, sub(d0, linear.apply(s0)))


def operator_norm_l1(m: Matrix2) -> Rational:
    """Induced l1 norm: the largest absolute column sum."""
    return max(abs(m.a) + abs(m.c), abs(m.b) + abs(m.d))


def operator_norm_linf(m: Matrix2) -> Rational:
    """Induced l-infinity norm: the largest absolute row sum."""
    return max(abs(m.a) + abs(m.b), abs(m.c) + abs(m.d))


@dataclass(frozen=True)
class GramSpectrum:
    trace: Rational
    det: Rational
    eigenvalues: tuple  # floats, largest first

    @property
    def singular_values(self):
        return tuple(math.sqrt(max(lam, 0.0)) for lam in self.eigenvalues)


def gram_eigenvalues(m: Matrix2) -> GramSpectrum:
    """Characteristic data of ``m^T m``: exact trace and determinant, float roots."""
    g = m.transpose() @ m
    tr, det = g.a + g.d, g.det()
    trf, detf = float(tr), float(det)
    disc = max(trf * trf - 4.0 * detf, 0.0)
    big = (trf + math.sqrt(disc)) / 2.0
    # the small root via Vieta avoids cancellation
    small = detf / big if big != 0.0 else 0.0
    return GramSpectrum(tr, det, (big, small))


class HalfPlane(NamedTuple):
    """``{p : normal . p >= offset}``."""

    normal: Point
    offset: Rational

    def value(self, p: Point):
        return dot(self.normal, p) - self.offset


class Location(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def _normalize(vertices: Iterable[Point]) -> tuple:
    pts = [Point(mpq(p[0]), mpq(p[1])) for p in vertices]
    # drop consecutive duplicates, including the wrap-around pair
    dedup = []
    for p in pts:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    while len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    area2 = sum(cross(dedup[i], dedup[(i + 1) % len(dedup)]) for i in range(len(dedup))) if dedup else 0
    if area2 < 0:
        dedup.reverse()
    changed = True
    while changed and len(dedup) >= 3:
        changed = False
        for i in range(len(dedup)):
            a, b, c = dedup[i - 1], dedup[i], dedup[(i + 1) % len(dedup)]
            if orient(a, b, c) == 0:
                del dedup[i]
                changed = True
                break
    if len(dedup) < 3:
        return ()
    if any(orient(dedup[i - 1], dedup[i], dedup[(i + 1) % len(dedup)]) < 0 for i in range(len(dedup))):
        raise ValueError("vertices do not describe a convex polygon")
    start = min(range(len(dedup)), key=lambda i: (dedup[i].x, dedup[i].y))
    return tuple(dedup[start:] + dedup[:start])


class ConvexPolygon:
    """Strictly convex polygon with counterclockwise vertices.

    The constructor normalizes: duplicate and collinear vertices are dropped,
    orientation is made counterclockwise, and the vertex list is rotated to
    start at the lexicographically smallest vertex.  Two polygons describing
    the same point set therefore compare equal with ``==``.
    """

    __slots__ = ("vertices", "_hash")

    def __init__(self, vertices: Iterable):
        verts = _normalize(vertices)
        if not verts:
            raise DegeneratePolygon("polygon has zero area after normalization")
        self.vertices = verts
        self._hash = None

    @classmethod
    def try_new(cls, vertices) -> Optional["ConvexPolygon"]:
        try:
            return cls(vertices)
        except DegeneratePolygon:
            return None

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and self.vertices == other.vertices

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple((int(p.x.numerator), int(p.x.denominator),
                                     int(p.y.numerator), int(p.y.denominator)) for p in self.vertices))
        return self._hash

    def __repr__(self):
        return "ConvexPolygon([" + ", ".join(str(p) for p in self.vertices) + "])"

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def halfplanes(self) -> list:
        """Inward half-planes whose intersection is this polygon."""
        out = []
        for a, b in self.edges():
            n = Point(a.y - b.y, b.x - a.x)
            out.append(HalfPlane(n, dot(n, a)))
        return out

    def area(self) -> Rational:
        v = self.vertices
        return sum(cross(v[i], v[(i + 1) % len(v)]) for i in range(len(v))) / 2

    def centroid(self) -> Point:
        """Vertex average; lies strictly inside a strictly convex polygon."""
        k = len(self.vertices)
        return Point(sum(p.x for p in self.vertices) / k, sum(p.y for p in self.vertices) / k)

    def locate(self, p: Point) -> Location:
        on_edge = False
        for a, b in self.edges():
            s = orient(a, b, p)
            if s < 0:
                return Location.OUTSIDE
            if s == 0:
                on_edge = True
        return Location.BOUNDARY if on_edge else Location.INTERIOR

    def contains(self, p: Point) -> bool:
        """Closed containment."""
        return self.locate(p) != Location.OUTSIDE

    def bbox(self):
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def transform(self, m: AffineMap2) -> "ConvexPolygon":
        return ConvexPolygon(m(p) for p in self.vertices)

    def clip(self, h: HalfPlane) -> Optional["ConvexPolygon"]:
        return polygon_clip(self, h)

    def intersect(self, other: "ConvexPolygon") -> Optional["ConvexPolygon"]:
        return polygon_intersect(self, other)

    def is_subset(self, other: "ConvexPolygon") -> bool:
        return all(other.contains(p) for p in self.vertices)


def _clip_vertices(verts, h: HalfPlane):
    out = []
    n = len(verts)
    vals = [h.value(p) for p in verts]
    if all(v >= 0 for v in vals):
        return verts
    if all(v <= 0 for v in vals):
        return []
    for i in range(n):
        p, q = verts[i], verts[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp >= 0:
            out.append(p)
        if (vp > 0 and vq < 0) or (vp < 0 and vq > 0):
            s = vp / (vp - vq)
            out.append(lerp(p, q, s))
    return out


def polygon_clip(subject: ConvexPolygon, h: HalfPlane) -> Optional[ConvexPolygon]:
    """Exact intersection with a closed half-plane; ``None`` when the area is zero."""
    verts = _clip_vertices(subject.vertices, h)
    if verts is subject.vertices:
        return subject
    return ConvexPolygon.try_new(verts) if len(verts) >= 3 else None


def clip_many(subject: ConvexPolygon, planes: Iterable[HalfPlane]) -> Optional[ConvexPolygon]:
    verts = subject.vertices
    touched = False
    for h in planes:
        new = _clip_vertices(verts, h)
        if new is not verts:
            touched = True
            verts = new
        if len(verts) < 3:
            return None
    if not touched:
        return subject
    return ConvexPolygon.try_new(verts)


def polygon_intersect(p: ConvexPolygon, q: ConvexPolygon) -> Optional[ConvexPolygon]:
    return clip_many(p, q.halfplanes())


def polygon_area(p: ConvexPolygon) -> Rational:
    return p.area()


def polygon_locate(p: ConvexPolygon, point: Point) -> Location:
    return p.locate(point)


def polygon_equal(p: ConvexPolygon, q: ConvexPolygon) -> bool:
    return p == q
