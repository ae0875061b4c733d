import json
import math
from itertools import combinations

import pytest
from gmpy2 import mpq
from hypothesis import assume, given
from hypothesis import strategies as st

from pwa_entropy.errors import InvariantViolation, ParameterOutOfRange, SchemaError
from pwa_entropy.geometry import AffineMap2, ConvexPolygon, Matrix2, Metric, Point, pt
from pwa_entropy.pwa import (
    OUTSIDE,
    SINGULAR,
    A,
    B,
    C,
    D,
    O,
    Mapped,
    build_rhombus,
    conformality_report,
    evaluate,
    image_within_domain,
    lipschitz_constant,
    load_map,
    locate,
    map_to_dict,
    piece_images,
    rhombus_points,
    save_map,
    single_piece_map,
)

from conftest import rationals

T_VALUES = [mpq(1, 4), mpq(1, 2), mpq(3, 4)]
open_t = st.fractions(min_value=0, max_value=1, max_denominator=64).filter(lambda f: 0 < f < 1).map(
    lambda f: mpq(f.numerator, f.denominator))


@pytest.fixture(scope="module")
def f_half():
    return build_rhombus(mpq(1, 2))


def test_rhombus_points_interpolate():
    t = mpq(1, 3)
    pts = rhombus_points(t)
    assert pts["P"] == Point((1 - t) * A.x + t * C.x, (1 - t) * A.y + t * C.y)
    assert pts["S"] == Point((1 - t) * B.x + t * D.x, (1 - t) * B.y + t * D.y)
    assert pts["P"] == pt(-t, 1 - t)


def test_build_half(f_half):
    aco, ado = f_half.pieces[0].map, f_half.pieces[1].map
    assert aco.linear == Matrix2.of([[1, "-1/2"], [0, "1/2"]])
    assert aco.offset == pt("1/2", "1/2")
    assert ado.linear == Matrix2.of([[-1, "-1/2"], [0, "-1/2"]])
    assert ado.offset == pt("1/2", "-1/2")
    pts = rhombus_points(mpq(1, 2))
    assert aco(A) == A and aco(C) == pts["P"]
    assert ado(A) == B and ado(D) == pts["R"]
    assert f_half.labels == ["ACO", "ADO", "BCO", "BDO"]


@pytest.mark.parametrize("t", [0, 1, mpq(-1, 2), mpq(3, 2)])
def test_parameter_range(t):
    with pytest.raises(ParameterOutOfRange):
        build_rhombus(t)


@given(open_t)
def test_norm_is_two_t(t):
    f = build_rhombus(t)
    for p in f.pieces:
        # linear parts are [[+-2t, -t], [0, +-t]]: column sums 2t and 2t
        assert abs(p.map.linear.a) == 2 * t and p.map.linear.b == -t and abs(p.map.linear.d) == t
    assert lipschitz_constant(f) == 2 * t


def test_locate_examples(f_half):
    assert locate(f_half, pt("-1/2", "1/4")).label == "ACO"
    assert locate(f_half, pt(0, "1/2")) is SINGULAR
    assert locate(f_half, pt("1/2", "1/2")) is SINGULAR  # outer edge AD
    assert locate(f_half, pt(2, 0)) is OUTSIDE


def test_evaluate_examples(f_half):
    out = evaluate(f_half, pt("-1/2", "1/4"))
    assert out == Mapped(pt("-1/8", "5/8"), f_half.pieces[0].id)
    # [[1,-1/2],[0,1/2]] (1/2,-1/4) + (-1/2,-1/2) = (5/8 - 1/2, -1/8 - 1/2)
    out = evaluate(f_half, pt("1/2", "-1/4"))
    assert out == Mapped(pt("1/8", "-5/8"), f_half.pieces[3].id)
    assert evaluate(f_half, O) is SINGULAR
    assert evaluate(f_half, A) is SINGULAR


def test_lipschitz_examples(f_half):
    assert lipschitz_constant(build_rhombus(mpq(1, 4))) == mpq(1, 2)
    assert lipschitz_constant(f_half) == 1
    l2 = lipschitz_constant(f_half, Metric.L2)
    assert l2 == pytest.approx(math.sqrt((3 + math.sqrt(5)) / 4), rel=1e-12)
    assert l2 == pytest.approx(1.1441, abs=1e-4)


def test_conformality_examples(f_half):
    assert not any(r.conformal for r in conformality_report(f_half))
    sq = ConvexPolygon([pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)])
    rot = single_piece_map(sq, AffineMap2(Matrix2.of([["3/8", "-1/2"], ["1/2", "3/8"]]), pt("1/2", "1/8")))
    (r,) = conformality_report(rot)
    assert r.conformal and r.scale_sq == mpq(25, 64) and r.contracting
    (r,) = conformality_report(single_piece_map(sq, AffineMap2.identity()))
    assert r.conformal and r.scale_sq == 1


@given(open_t)
def test_rhombus_pieces_never_conformal(t):
    for p in build_rhombus(t).pieces:
        g = p.map.linear.transpose() @ p.map.linear
        assert abs(g.b) == 2 * t * t  # -2t^2 for ACO/BDO, +2t^2 for ADO/BCO
    assert not any(r.conformal for r in conformality_report(build_rhombus(t)))


@pytest.mark.parametrize("t", T_VALUES)
def test_tiling_and_image_containment(t):
    f = build_rhombus(t)
    assert sum(p.cell.area() for p in f.pieces) == f.domain.area() == 2
    for p, q in combinations(f.pieces, 2):
        assert p.cell.intersect(q.cell) is None
    assert image_within_domain(f)
    for img in piece_images(f):
        assert img.intersect(f.domain) == img


@given(open_t)
def test_vertex_correspondence(t):
    f = build_rhombus(t)
    aco, ado, bco, bdo = (p.map for p in f.pieces)
    assert (aco(A), ado(A), bco(B), bdo(B)) == (A, B, A, B)


@given(st.sampled_from([mpq(1, 4), mpq(3, 8), mpq(1, 2)]), st.integers(0, 3),
       rationals(0, 1, 64), rationals(0, 1, 64), rationals(0, 1, 64), rationals(0, 1, 64))
def test_piecewise_l1_contraction(t, k, s1, u1, s2, u2):
    f = build_rhombus(t)
    piece = f.pieces[k]
    a, b, c = piece.cell.vertices

    def inside(s, u):
        # barycentric point of the closed cell
        assume(s + u <= 1)
        return Point(a.x + s * (b.x - a.x) + u * (c.x - a.x), a.y + s * (b.y - a.y) + u * (c.y - a.y))

    p, q = inside(s1, u1), inside(s2, u2)
    d = lambda x, y: abs(x.x - y.x) + abs(x.y - y.y)
    assert d(piece.map(p), piece.map(q)) <= 2 * t * d(p, q)


def test_contraction_equality_at_half(f_half):
    piece = f_half.pieces[0]
    p, q = pt("-1/2", "1/4"), pt("-1/4", "1/4")
    d = lambda x, y: abs(x.x - y.x) + abs(x.y - y.y)
    assert d(piece.map(p), piece.map(q)) == d(p, q)


class TestJson:
    def test_round_trip(self, f_half):
        text = save_map(f_half)
        again = load_map(text)
        assert again == f_half
        assert save_map(again) == text

    def test_linear_parser(self, f_half):
        doc = map_to_dict(f_half)
        assert doc["pieces"][0]["linear"] == [["1", "-1/2"], ["0", "1/2"]]
        assert load_map(json.dumps(doc)).pieces[0].map.linear == Matrix2.of([[1, "-1/2"], [0, "1/2"]])

    def test_overlapping_cells(self, f_half):
        doc = map_to_dict(f_half)
        doc["pieces"][1]["cell"] = doc["pieces"][0]["cell"]
        with pytest.raises(InvariantViolation):
            load_map(json.dumps(doc))

    def test_not_tiling(self, f_half):
        doc = map_to_dict(f_half)
        del doc["pieces"][3]
        with pytest.raises(InvariantViolation):
            load_map(json.dumps(doc))

    def test_singular_piece(self, f_half):
        doc = map_to_dict(f_half)
        doc["pieces"][0]["linear"] = [["1", "2"], ["2", "4"]]
        with pytest.raises(InvariantViolation):
            load_map(json.dumps(doc))

    @pytest.mark.parametrize("mutate", [
        lambda d: d.pop("metric"),
        lambda d: d.update(metric="l3"),
        lambda d: d["pieces"][0].update(offset=[0.5, 0.5]),
        lambda d: d["pieces"][0].update(linear=[["1", "0"]]),
        lambda d: d["pieces"][0]["cell"].pop(),
        lambda d: d.update(pieces=[]),
    ])
    def test_schema_errors(self, f_half, mutate):
        doc = map_to_dict(f_half)
        mutate(doc)
        with pytest.raises(SchemaError):
            load_map(json.dumps(doc))

    def test_bad_json(self):
        with pytest.raises(SchemaError):
            load_map("{not json")
