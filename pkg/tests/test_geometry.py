import math

import numpy as np
import pytest

from floodopt import (
    ALL_PLANE,
    AssetPolygon,
    Region,
    SamplingError,
    Triangle,
    alpha_shape,
    delaunay,
    region_contains,
    region_distance,
    region_subtract_assets,
    region_union,
)
from tests.conftest import rect_ring


def circumcircle(a, b, c):
    """Center and radius of the circle through three points (None if collinear)."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    return (ux, uy), math.hypot(ax - ux, ay - uy)


UNIT_SQUARE = Region(
    [
        Triangle((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)),
        Triangle((0.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
    ]
)


class TestDelaunay:
    def test_three_points_single_triangle(self):
        tris = delaunay([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
        assert len(tris) == 1
        assert {tris[0].a, tris[0].b, tris[0].c} == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}

    def test_unit_square_two_triangles(self):
        tris = delaunay([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
        assert len(tris) == 2
        assert sum(t.area() for t in tris) == pytest.approx(1.0)

    def test_empty_circumcircle_property(self):
        rng = np.random.default_rng(7)
        points = [tuple(p) for p in rng.uniform(0, 10, size=(50, 2))]
        for tri in delaunay(points):
            result = circumcircle(tri.a, tri.b, tri.c)
            assert result is not None
            center, radius = result
            for p in points:
                assert math.dist(center, p) >= radius - 1e-9

    def test_collinear_points_give_empty_triangulation(self):
        assert delaunay([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]) == []

    def test_too_few_points_is_an_error(self):
        with pytest.raises(ValueError):
            delaunay([(0.0, 0.0), (1.0, 0.0)])


class TestAlphaShape:
    def test_equilateral_triangle_circumradius_threshold(self):
        # side 1 has circumradius 1/sqrt(3) = 0.5774
        pts = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
        assert 1 / math.sqrt(3) == pytest.approx(0.57735, abs=1e-5)
        assert len(alpha_shape(pts, 1.0).triangles) == 1
        assert alpha_shape(pts, 0.5).is_empty

    def test_collinear_triples_never_included(self):
        pts = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 5.0)]
        shape = alpha_shape(pts, 1e12)
        for t in shape.triangles:
            assert t.area() > 0.0

    def test_huge_alpha_keeps_the_full_triangulation(self):
        rng = np.random.default_rng(13)
        pts = [tuple(p) for p in rng.uniform(0, 5, size=(30, 2))]
        full = delaunay(pts)
        shape = alpha_shape(pts, 1e12)
        assert len(shape.triangles) == len(full)

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(29)
        pts = [tuple(p) for p in rng.uniform(0, 8, size=(40, 2))]
        small = {(t.a, t.b, t.c) for t in alpha_shape(pts, 1.0).triangles}
        large = {(t.a, t.b, t.c) for t in alpha_shape(pts, 3.0).triangles}
        assert small <= large

    def test_fewer_than_three_points_empty(self):
        assert alpha_shape([(0.0, 0.0), (1.0, 0.0)], 1.0).is_empty

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            alpha_shape([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], 0.0)


class TestRegionMembership:
    def test_all_plane_contains_everything(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x, y = rng.uniform(-1e6, 1e6, 2)
            assert ALL_PLANE.contains(x, y)
            assert ALL_PLANE.distance(x, y) == 0.0

    def test_unit_square(self):
        assert region_contains(UNIT_SQUARE, (0.5, 0.5))
        assert not region_contains(UNIT_SQUARE, (1.5, 0.5))

    def test_boundary_points_count_as_inside(self):
        assert UNIT_SQUARE.contains(0.0, 0.5)
        assert UNIT_SQUARE.contains(1.0, 1.0)

    def test_hole_excludes_strict_interior_only(self):
        hole = AssetPolygon(((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        assert not region.contains(0.5, 0.5)
        assert region.contains(0.1, 0.1)
        assert region.contains(0.25, 0.5)  # hole boundary stays in

    def test_membership_matches_polygon_oracle_on_grid(self):
        hole = AssetPolygon(((0.2, 0.2), (0.6, 0.2), (0.6, 0.6), (0.2, 0.6)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        for x in np.linspace(-0.3, 1.3, 33):
            for y in np.linspace(-0.3, 1.3, 33):
                inside_square = 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0
                inside_hole = 0.2 < x < 0.6 and 0.2 < y < 0.6
                assert region.contains(x, y) == (inside_square and not inside_hole), (x, y)


class TestRegionDistance:
    def test_contained_point_distance_zero(self):
        assert region_distance(UNIT_SQUARE, (0.5, 0.5)) == 0.0

    def test_perpendicular_to_edge(self):
        assert region_distance(UNIT_SQUARE, (2.0, 0.5)) == pytest.approx(1.0)

    def test_nearest_vertex(self):
        assert region_distance(UNIT_SQUARE, (2.0, 2.0)) == pytest.approx(math.sqrt(2.0))

    def test_empty_region_signals_infinity(self):
        assert Region().distance(0.0, 0.0) == math.inf

    def test_point_in_hole_measures_escape_distance(self):
        hole = AssetPolygon(((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        assert region.distance(0.5, 0.5) == pytest.approx(0.25)

    def test_zero_distance_iff_contained(self):
        hole = AssetPolygon(((0.3, 0.3), (0.7, 0.3), (0.7, 0.7), (0.3, 0.7)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        rng = np.random.default_rng(5)
        for _ in range(400):
            x, y = rng.uniform(-0.5, 1.5, 2)
            assert (region.distance(x, y) == 0.0) == region.contains(x, y)

    def test_distance_matches_segment_oracle(self):
        rng = np.random.default_rng(17)
        tris = UNIT_SQUARE.triangles
        for _ in range(200):
            x, y = rng.uniform(-2.0, 3.0, 2)
            if UNIT_SQUARE.contains(x, y):
                continue
            best = math.inf
            for t in tris:
                for p, q in ((t.a, t.b), (t.b, t.c), (t.c, t.a)):
                    px, py = p
                    qx, qy = q
                    seg2 = (qx - px) ** 2 + (qy - py) ** 2
                    tt = max(0.0, min(1.0, ((x - px) * (qx - px) + (y - py) * (qy - py)) / seg2))
                    best = min(best, math.hypot(x - (px + tt * (qx - px)), y - (py + tt * (qy - py))))
            assert UNIT_SQUARE.distance(x, y) == pytest.approx(best, abs=1e-9)


class TestRegionUnionSubtract:
    def test_union_with_empty_region_keeps_membership(self):
        merged = region_union(UNIT_SQUARE, Region())
        rng = np.random.default_rng(23)
        for _ in range(1000):
            x, y = rng.uniform(-0.5, 1.5, 2)
            assert merged.contains(x, y) == UNIT_SQUARE.contains(x, y)

    def test_union_of_disjoint_squares(self):
        other = Region(
            [
                Triangle((2.0, 0.0), (3.0, 0.0), (3.0, 1.0)),
                Triangle((2.0, 0.0), (3.0, 1.0), (2.0, 1.0)),
            ]
        )
        merged = region_union(UNIT_SQUARE, other)
        assert merged.contains(0.5, 0.5)
        assert merged.contains(2.5, 0.5)
        assert not merged.contains(1.5, 0.5)

    def test_union_with_all_plane(self):
        assert region_union(UNIT_SQUARE, ALL_PLANE) is ALL_PLANE

    def test_repeated_union_idempotent_for_membership(self):
        once = region_union(UNIT_SQUARE, UNIT_SQUARE)
        rng = np.random.default_rng(31)
        for _ in range(300):
            x, y = rng.uniform(-0.5, 1.5, 2)
            assert once.contains(x, y) == UNIT_SQUARE.contains(x, y)

    def test_subtract_matches_sampling_oracle(self):
        hole = AssetPolygon(((0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (0.0, 1.0)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        rng = np.random.default_rng(37)
        for _ in range(500):
            x, y = rng.uniform(-0.2, 1.2, 2)
            inside = (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0) and not (0.0 < x < 0.5 and 0.0 < y < 1.0)
            assert region.contains(x, y) == inside


class TestSampling:
    def test_single_triangle_samples_inside(self):
        tri = Region([Triangle((0.0, 0.0), (2.0, 0.0), (0.0, 2.0))])
        rng = np.random.default_rng(41)
        for p in tri.sample_uniform(rng, 200):
            assert tri.contains(*p)

    def test_area_weighting_between_two_triangles(self):
        # areas 3 : 1, so about 75% of samples land in the big triangle
        region = Region(
            [
                Triangle((0.0, 0.0), (3.0, 0.0), (0.0, 2.0)),
                Triangle((10.0, 0.0), (11.0, 0.0), (10.0, 2.0)),
            ]
        )
        rng = np.random.default_rng(43)
        pts = region.sample_uniform(rng, 10_000)
        big = sum(1 for x, _ in pts if x < 5.0)
        assert big / 10_000 == pytest.approx(0.75, abs=0.02)

    def test_holes_never_sampled(self):
        hole = AssetPolygon(((0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        rng = np.random.default_rng(47)
        for x, y in region.sample_uniform(rng, 500):
            assert not (0.2 < x < 0.8 and 0.2 < y < 0.8)

    def test_empty_region_raises(self):
        with pytest.raises(SamplingError):
            Region().sample_uniform(np.random.default_rng(0), 5)

    def test_all_plane_cannot_be_sampled(self):
        with pytest.raises(SamplingError):
            ALL_PLANE.sample_uniform(np.random.default_rng(0), 5)


class TestExteriorPolylines:
    def test_square_boundary_forms_closed_loop(self):
        lines = UNIT_SQUARE.exterior_polylines()
        assert len(lines) == 1
        loop = lines[0]
        assert loop[0] == loop[-1]
        assert set(loop) == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}

    def test_holes_emitted_as_rings(self):
        hole = AssetPolygon(((0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)))
        region = region_subtract_assets(UNIT_SQUARE, [hole])
        lines = region.exterior_polylines()
        assert len(lines) == 2
        assert lines[1][0] == lines[1][-1]


class TestAssetPolygon:
    def test_needs_three_distinct_vertices(self):
        with pytest.raises(ValueError):
            AssetPolygon(((0.0, 0.0), (1.0, 0.0)))
        with pytest.raises(ValueError):
            AssetPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 0.0)))

    def test_needs_positive_area(self):
        with pytest.raises(ValueError):
            AssetPolygon(((0.0, 0.0), (1.0, 1.0), (2.0, 2.0)))

    def test_densified_ring_area(self):
        poly = AssetPolygon(rect_ring(2.0, 3.0, 8.0, 9.0))
        assert poly.area() == pytest.approx(36.0)

    def test_cell_mask_counts(self, mini_scenario):
        grid = mini_scenario.grid
        mask = mini_scenario.assets[0].cell_mask(grid)
        # 4 x 6 rectangle of whole cells => at least its interior centers
        assert 15 <= mask.sum() <= 35
