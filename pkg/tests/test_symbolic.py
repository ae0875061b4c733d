
import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import assume, given
from hypothesis import strategies as st

from pwa_entropy.errors import DepthCapExceeded
from pwa_entropy.geometry import AffineMap2, ConvexPolygon, Location, Matrix2, pt
from pwa_entropy.pwa import A, B, O, build_rhombus, single_piece_map
from pwa_entropy.symbolic import (
    cell_counts,
    dyadic_crosscheck,
    dyadic_triangles,
    itinerary,
    iter_partitions,
    multiplicity_profile,
    refine_partition,
    spectral_radius,
    transition_graph,
)

from conftest import rhombus_interior

HALF, QUARTER = mpq(1, 2), mpq(1, 4)


@pytest.fixture(scope="module")
def f_half():
    return build_rhombus(HALF)


@pytest.fixture(scope="module")
def parts_half(f_half):
    return list(iter_partitions(f_half, 8))


def grid_itineraries(m, n, den=256):
    """Oracle: distinct complete itineraries over an odd-numerator grid."""
    seen = set()
    for i in range(-den + 1, den, 2):
        for j in range(-den + 1, den, 2):
            p = pt(mpq(i, den), mpq(j, den))
            if m.domain.locate(p) != Location.INTERIOR:
                continue
            it = itinerary(m, p, n)
            if it.complete:
                seen.add(it.indices)
    return seen


class TestItinerary:
    def test_example(self, f_half):
        it = itinerary(f_half, pt("-1/2", "1/4"), 3)
        assert [s.label for s in it.symbols] == ["ACO", "ACO", "ADO"]
        assert it.complete

    def test_origin_truncates(self, f_half):
        it = itinerary(f_half, O, 5)
        assert it.truncated_at == 0 and it.symbols == ()

    def test_length_one(self, f_half):
        it = itinerary(f_half, pt("1/3", "-1/5"), 1)
        assert [s.label for s in it.symbols] == ["BDO"]


class TestRefinement:
    def test_small_depth_counts(self, f_half, parts_half):
        assert [len(p) for p in parts_half[:3]] == [4, 8, 16]
        assert parts_half[0].polygons() == [p.cell for p in f_half.pieces]

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_counts_match_brute_force(self, f_half, parts_half, n):
        cells = {c.itinerary for c in parts_half[n - 1].cells}
        assert grid_itineraries(f_half, n) == cells

    def test_lexicographic_order(self, parts_half):
        for part in parts_half:
            its = [c.itinerary for c in part.cells]
            assert its == sorted(its)

    def test_area_and_disjointness(self, parts_half):
        for part in parts_half[:6]:
            assert part.total_area() == 2
            polys = part.polygons()
            for i in range(len(polys)):
                for j in range(i + 1, len(polys)):
                    assert polys[i].intersect(polys[j]) is None

    def test_centroid_consistency(self, f_half, parts_half):
        for part in parts_half[:7]:
            for cell in part.cells:
                it = itinerary(f_half, cell.polygon.centroid(), part.depth)
                assert it.complete and it.indices == cell.itinerary

    def test_nesting(self, parts_half):
        for coarse, fine in zip(parts_half, parts_half[1:]):
            for cell in fine.cells:
                parents = [c for c in coarse.cells if cell.polygon.is_subset(c.polygon)]
                assert len(parents) == 1
                assert parents[0].itinerary == cell.itinerary[:-1]

    @given(rhombus_interior(128), st.integers(1, 6))
    def test_point_lies_in_its_itinerary_cell(self, f_half, parts_half, p, n):
        it = itinerary(f_half, p, n)
        assume(it.complete)
        (cell,) = [c for c in parts_half[n - 1].cells if c.itinerary == it.indices]
        assert cell.polygon.locate(p) == Location.INTERIOR

    def test_depth_cap(self, f_half):
        with pytest.raises(DepthCapExceeded):
            refine_partition(f_half, 15)
        with pytest.raises(DepthCapExceeded):
            cell_counts(f_half, 6, depth_cap=5)

    def test_threads_do_not_change_result(self, f_half):
        a = refine_partition(f_half, 7)
        b = refine_partition(f_half, 7, threads=4)
        assert [(c.itinerary, c.polygon) for c in a.cells] == [(c.itinerary, c.polygon) for c in b.cells]


class TestCounts:
    @pytest.mark.parametrize("t", [HALF, QUARTER])
    def test_count_law(self, t):
        assert cell_counts(build_rhombus(t), 9) == [(n, 2 ** (n + 1)) for n in range(1, 10)]

    def test_single_piece(self):
        sq = ConvexPolygon([pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)])
        m = single_piece_map(sq, AffineMap2(Matrix2.of([["1/2", 0], [0, "1/2"]]), pt("1/4", "1/4")))
        assert cell_counts(m, 5) == [(n, 1) for n in range(1, 6)]

    def test_t_independence(self, parts_half):
        quarter = list(iter_partitions(build_rhombus(QUARTER), 8))
        for a, b in zip(parts_half, quarter):
            assert a.polygon_set() == b.polygon_set()


class TestDyadic:
    def test_depth_one(self):
        tris = dyadic_triangles(1)
        assert ConvexPolygon([A, pt(-1, 0), O]) in tris
        assert dyadic_crosscheck(HALF, 1)

    @pytest.mark.parametrize("t,n", [(QUARTER, 3), (HALF, 5), (mpq(3, 8), 4)])
    def test_true_cases(self, t, n):
        assert dyadic_crosscheck(t, n)

    def test_depth_two_splitting_line(self):
        # the cell boundary through A and (-1/2, 0) is 2x - y + 1 = 0 for every t
        for t in (QUARTER, HALF):
            part = refine_partition(build_rhombus(t), 2)
            assert any(pt("-1/2", 0) in c.polygon.vertices and A in c.polygon.vertices for c in part.cells)

    def test_wrong_grid(self):
        assert not dyadic_crosscheck(HALF, 3, intervals=2 ** 4)


class TestTransition:
    def test_rhombus_graph(self, f_half):
        g = transition_graph(f_half)
        assert g.adjacency.astype(int).tolist() == [[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 1, 1]]
        # T (1,1,1,1)^T = 2 (1,1,1,1)^T
        assert (g.adjacency.astype(int) @ np.ones(4) == 2 * np.ones(4)).all()
        assert abs(g.spectral_radius - 2) <= 1e-9
        assert g.residual <= 1e-10

    @pytest.mark.parametrize("t", [QUARTER, mpq(3, 4)])
    def test_same_graph_for_other_t(self, t):
        assert transition_graph(build_rhombus(t)).adjacency.astype(int).tolist() == \
            transition_graph(build_rhombus(HALF)).adjacency.astype(int).tolist()

    def test_identity_map(self):
        sq = ConvexPolygon([pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)])
        g = transition_graph(single_piece_map(sq, AffineMap2.identity()))
        assert g.adjacency.tolist() == [[True]] and g.spectral_radius == pytest.approx(1, abs=1e-10)

    def test_spectral_radius_against_numpy(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = (rng.random((5, 5)) < 0.4).astype(float)
            rho, _ = spectral_radius(a)
            assert rho == pytest.approx(max(abs(np.linalg.eigvals(a))), abs=1e-8)
        perm = np.array([[0, 1], [1, 0]], dtype=float)
        assert spectral_radius(perm)[0] == pytest.approx(1, abs=1e-10)

    def test_words_match_cells(self, f_half, parts_half):
        g = transition_graph(f_half)
        for part in parts_half:
            assert g.words(part.depth) == {c.itinerary for c in part.cells}
            assert g.path_counts(part.depth)[-1][1] == len(part)


class TestMultiplicity:
    def test_profile(self, f_half):
        prof = multiplicity_profile(f_half, 6)
        assert (prof[0].max_multiplicity, prof[0].witness) == (4, O)
        for r in prof[1:]:
            assert r.max_multiplicity == 2 ** r.depth
            assert r.witness in (A, B)
        assert prof[2].max_multiplicity == 8

    def test_witness_is_exact(self, f_half, parts_half):
        for r in multiplicity_profile(f_half, 5):
            n_cells = sum(1 for p in parts_half[r.depth - 1].polygons() if p.contains(r.witness))
            assert n_cells == r.max_multiplicity

    def test_single_piece(self):
        sq = ConvexPolygon([pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)])
        m = single_piece_map(sq, AffineMap2(Matrix2.of([["1/2", 0], [0, "1/2"]]), pt(0, 0)))
        assert [r.max_multiplicity for r in multiplicity_profile(m, 3)] == [1, 1, 1]
