"""Piecewise affine maps on convex polygonal cells.

A :class:`PiecewiseMap` is undefined on cell boundaries.  Points there
evaluate to :data:`SINGULAR` rather than being assigned to a branch.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Optional, Union

from gmpy2 import mpq

from . import geometry as geo
from .errors import InvariantViolation, ParameterOutOfRange, SchemaError
from .geometry import (
    AffineMap2,
    ConvexPolygon,
    Location,
    Matrix2,
    Metric,
    Point,
    Q,
    affine_from_correspondence,
    format_rational,
    parse_rational,
)

A = Point(mpq(0), mpq(1))
B = Point(mpq(0), mpq(-1))
C = Point(mpq(-1), mpq(0))
D = Point(mpq(1), mpq(0))
O = Point(mpq(0), mpq(0))

RHOMBUS_LABELS = ("ACO", "ADO", "BCO", "BDO")


class PieceId(NamedTuple):
    index: int
    label: str

    def __str__(self):
        return self.label


class Outcome(enum.Enum):
    SINGULAR = "singular"
    OUTSIDE = "outside"


SINGULAR = Outcome.SINGULAR
OUTSIDE = Outcome.OUTSIDE


class Mapped(NamedTuple):
    point: Point
    piece: PieceId


EvalOutcome = Union[Mapped, Outcome]


@dataclass(frozen=True)
class Piece:
    cell: ConvexPolygon
    map: AffineMap2
    id: PieceId


@dataclass(frozen=True, eq=False)
class PiecewiseMap:
    domain: ConvexPolygon
    pieces: tuple
    metric: Metric = Metric.L1
    _halfplanes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "_halfplanes", tuple(tuple(p.cell.halfplanes()) for p in self.pieces))
        validate(self)

    def __len__(self):
        return len(self.pieces)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseMap):
            return NotImplemented
        return (self.domain == other.domain and self.metric == other.metric
                and self.pieces == other.pieces)

    def __hash__(self):
        return hash((self.domain, self.pieces, self.metric))

    @property
    def labels(self):
        return [p.id.label for p in self.pieces]

    def cell_halfplanes(self, index: int) -> tuple:
        return self._halfplanes[index]

    def locate(self, p: Point) -> Union[PieceId, Outcome]:
        return locate(self, p)

    def evaluate(self, p: Point) -> EvalOutcome:
        return evaluate(self, p)


def validate(m: PiecewiseMap) -> None:
    """Raise InvariantViolation unless the cells tile the domain with invertible pieces."""
    labels = [p.id.label for p in m.pieces]
    if len(set(labels)) != len(labels):
        raise InvariantViolation(f"duplicate piece labels {labels}")
    if [p.id.index for p in m.pieces] != list(range(len(m.pieces))):
        raise InvariantViolation("piece indices must be 0..k-1 in order")
    for p in m.pieces:
        if p.map.linear.det() == 0:
            raise InvariantViolation(f"piece {p.id.label} has a singular linear part")
        if not p.cell.is_subset(m.domain):
            raise InvariantViolation(f"cell {p.id.label} is not contained in the domain")
    for p, q in combinations(m.pieces, 2):
        if p.cell.intersect(q.cell) is not None:
            raise InvariantViolation(f"cells {p.id.label} and {q.id.label} overlap")
    if sum(p.cell.area() for p in m.pieces) != m.domain.area():
        raise InvariantViolation("cell areas do not sum to the domain area")


def locate(m: PiecewiseMap, p: Point) -> Union[PieceId, Outcome]:
    if m.domain.locate(p) == Location.OUTSIDE:
        return OUTSIDE
    for piece in m.pieces:
        if piece.cell.locate(p) == Location.INTERIOR:
            return piece.id
    return SINGULAR


def evaluate(m: PiecewiseMap, p: Point) -> EvalOutcome:
    where = locate(m, p)
    if isinstance(where, Outcome):
        return where
    return Mapped(m.pieces[where.index].map(p), where)


def rhombus_points(t) -> dict:
    """Named points of the rhombus family at side parameter ``t``."""
    t = Q(t)
    return {
        "A": A, "B": B, "C": C, "D": D, "O": O,
        "P": geo.lerp(A, C, t),
        "Q": geo.lerp(A, D, t),
        "R": geo.lerp(B, C, t),
        "S": geo.lerp(B, D, t),
    }


def build_rhombus(t, metric: Metric = Metric.L1) -> PiecewiseMap:
    """The four-piece rhombus map with P, Q, R, S at parameter ``t`` from A or B.

    Correspondences are read vertex by vertex: ACO -> APQ, ADO -> BRS,
    BCO -> AQP, BDO -> BSR.  ``t = 1/2`` puts P, Q, R, S at the midpoints
    (non-strict contraction); ``t < 1/2`` gives a strict contraction in l1.
    """
    t = Q(t)
    if not 0 < t < 1:
        raise ParameterOutOfRange(f"t must lie in (0, 1), got {format_rational(t)}")
    pts = rhombus_points(t)
    P, Qp, R, S = pts["P"], pts["Q"], pts["R"], pts["S"]
    table = [
        ((A, C, O), (A, P, Qp)),
        ((A, D, O), (B, R, S)),
        ((B, C, O), (A, Qp, P)),
        ((B, D, O), (B, S, R)),
    ]
    pieces = []
    for i, (src, dst) in enumerate(table):
        pieces.append(Piece(ConvexPolygon(src), affine_from_correspondence(src, dst),
                            PieceId(i, RHOMBUS_LABELS[i])))
    return PiecewiseMap(ConvexPolygon((A, D, B, C)), tuple(pieces), metric)


def single_piece_map(cell: ConvexPolygon, affine: AffineMap2, label="X", metric=Metric.L1) -> PiecewiseMap:
    return PiecewiseMap(cell, (Piece(cell, affine, PieceId(0, label)),), metric)


def lipschitz_constant(m: PiecewiseMap, metric: Optional[Metric] = None):
    """Largest induced operator norm over the pieces' linear parts.

    Exact rational for L1 and LINF; for L2 a float (largest singular value).
    """
    metric = Metric(metric or m.metric)
    if metric == Metric.L1:
        return max(geo.operator_norm_l1(p.map.linear) for p in m.pieces)
    if metric == Metric.LINF:
        return max(geo.operator_norm_linf(p.map.linear) for p in m.pieces)
    return max(geo.gram_eigenvalues(p.map.linear).singular_values[0] for p in m.pieces)


@dataclass(frozen=True)
class ConformalityRecord:
    piece: PieceId
    conformal: bool
    scale_sq: Optional[object]  # exact rational when conformal

    @property
    def contracting(self) -> bool:
        return self.conformal and self.scale_sq <= 1


def conformality_report(m: PiecewiseMap) -> list:
    """A piece is conformal when ``L^T L = s^2 I`` exactly."""
    out = []
    for p in m.pieces:
        g = p.map.linear.transpose() @ p.map.linear
        conformal = g.b == 0 and g.c == 0 and g.a == g.d
        out.append(ConformalityRecord(p.id, conformal, g.a if conformal else None))
    return out


# -- JSON map schema -------------------------------------------------------

def _points_json(points):
    return [[format_rational(p.x), format_rational(p.y)] for p in points]


def map_to_dict(m: PiecewiseMap) -> dict:
    return {
        "metric": m.metric.value,
        "domain": _points_json(m.domain.vertices),
        "pieces": [
            {
                "label": p.id.label,
                "cell": _points_json(p.cell.vertices),
                "linear": [[format_rational(v) for v in row] for row in p.map.linear.rows()],
                "offset": [format_rational(p.map.offset.x), format_rational(p.map.offset.y)],
            }
            for p in m.pieces
        ],
    }


def save_map(m: PiecewiseMap) -> str:
    return json.dumps(map_to_dict(m), indent=2) + "\n"


def _rat(value, where):
    if not isinstance(value, str):
        raise SchemaError(f"{where}: expected a rational string, got {value!r}")
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _point_list(value, where):
    if not isinstance(value, list) or len(value) < 3:
        raise SchemaError(f"{where}: expected a list of at least 3 points")
    pts = []
    for i, item in enumerate(value):
        if not isinstance(item, list) or len(item) != 2:
            raise SchemaError(f"{where}[{i}]: expected [x, y]")
        pts.append(Point(_rat(item[0], f"{where}[{i}]"), _rat(item[1], f"{where}[{i}]")))
    return pts


def _polygon(value, where):
    pts = _point_list(value, where)
    try:
        return ConvexPolygon(pts)
    except (ValueError, geo.DegeneratePolygon) as exc:
        raise InvariantViolation(f"{where}: {exc}") from None


def map_from_dict(doc) -> PiecewiseMap:
    if not isinstance(doc, dict):
        raise SchemaError("map document must be a JSON object")
    missing = {"metric", "domain", "pieces"} - set(doc)
    if missing:
        raise SchemaError(f"missing keys: {sorted(missing)}")
    try:
        metric = Metric(doc["metric"])
    except ValueError:
        raise SchemaError(f"unknown metric {doc['metric']!r}") from None
    domain = _polygon(doc["domain"], "domain")
    if not isinstance(doc["pieces"], list) or not doc["pieces"]:
        raise SchemaError("pieces must be a non-empty list")
    pieces = []
    for i, item in enumerate(doc["pieces"]):
        where = f"pieces[{i}]"
        if not isinstance(item, dict) or {"label", "cell", "linear", "offset"} - set(item):
            raise SchemaError(f"{where}: needs label, cell, linear, offset")
        if not isinstance(item["label"], str):
            raise SchemaError(f"{where}.label must be a string")
        lin = item["linear"]
        if not (isinstance(lin, list) and len(lin) == 2 and all(isinstance(r, list) and len(r) == 2 for r in lin)):
            raise SchemaError(f"{where}.linear must be a 2x2 array")
        linear = Matrix2(*(_rat(v, f"{where}.linear") for row in lin for v in row))
        off = item["offset"]
        if not (isinstance(off, list) and len(off) == 2):
            raise SchemaError(f"{where}.offset must be [e, f]")
        offset = Point(_rat(off[0], f"{where}.offset"), _rat(off[1], f"{where}.offset"))
        pieces.append(Piece(_polygon(item["cell"], f"{where}.cell"), AffineMap2(linear, offset),
                            PieceId(i, item["label"])))
    return PiecewiseMap(domain, tuple(pieces), metric)


def load_map(text: str) -> PiecewiseMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return map_from_dict(doc)


def piece_images(m: PiecewiseMap) -> list:
    """Image polygon of each closed cell."""
    return [p.cell.transform(p.map) for p in m.pieces]


def image_within_domain(m: PiecewiseMap) -> bool:
    return all(img.is_subset(m.domain) for img in piece_images(m))


def describe(m: PiecewiseMap) -> dict:
    """Norms, singular values and conformality of every piece, JSON-ready."""
    conf = {r.piece.index: r for r in conformality_report(m)}
    pieces = []
    for p in m.pieces:
        gram = geo.gram_eigenvalues(p.map.linear)
        r = conf[p.id.index]
        pieces.append({
            "label": p.id.label,
            "cell": _points_json(p.cell.vertices),
            "linear": [[format_rational(v) for v in row] for row in p.map.linear.rows()],
            "offset": [format_rational(p.map.offset.x), format_rational(p.map.offset.y)],
            "norm_l1": format_rational(geo.operator_norm_l1(p.map.linear)),
            "norm_linf": format_rational(geo.operator_norm_linf(p.map.linear)),
            "singular_values_l2": [round(s, 12) for s in gram.singular_values],
            "conformal": r.conformal,
            "scale_sq": format_rational(r.scale_sq) if r.conformal else None,
        })
    lip = lipschitz_constant(m)
    lip_value = format_rational(lip) if m.metric != Metric.L2 else round(lip, 12)
    return {
        "metric": m.metric.value,
        "pieces": pieces,
        "lipschitz": lip_value,
        "verdict": "strict" if lip < 1 else ("non-strict" if lip == 1 else "expanding"),
    }
