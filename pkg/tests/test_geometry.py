from fractions import Fraction

import numpy as np
import pytest

from forestends.geometry import (
    Box,
    CurveRegion,
    GeometryError,
    JordanPolygon,
    PathPosition,
    PLTopoLine,
    Point,
    Polyline,
    Region,
    Segment,
    SegmentIndex,
    SegmentRelation,
    clip_segment,
    coord,
    curve_vs_polygon,
    path_first_hit_last_exit,
    point_in_polygon,
    polygon_signed_area,
    segment_relation,
    unit_direction,
    winding_number,
)

H = Fraction(1, 2)


def seg(a, b):
    return Segment(Point(*a), Point(*b))


class TestCoordinates:
    def test_integral_fraction_collapses_to_int(self):
        value = coord(Fraction(4, 2))
        assert value == 2 and isinstance(value, int)

    def test_string_rational(self):
        assert coord("1/2") == H
        assert coord(" -3 ") == -3

    @pytest.mark.parametrize("bad", [0.5, True, "one half", "1/0"])
    def test_inexact_or_invalid_rejected(self, bad):
        with pytest.raises(GeometryError):
            coord(bad)

    def test_points_are_exact_and_ordered(self):
        assert Point("1/2", 0) == Point(H, 0)
        assert Point(0, 5) < Point(1, -5)


class TestSegmentRelation:
    def test_disjoint(self):
        assert segment_relation(seg((0, 0), (1, 0)), seg((2, 0), (3, 0))) == SegmentRelation.DISJOINT

    def test_shared_endpoint_only(self):
        assert segment_relation(seg((0, 0), (1, 0)), seg((1, 0), (1, 1))) == SegmentRelation.SHARED_ENDPOINT

    def test_crossing_diagonals(self):
        assert segment_relation(seg((0, 0), (1, 1)), seg((0, 1), (1, 0))) == SegmentRelation.IMPROPER

    def test_touching_interior_is_improper(self):
        assert segment_relation(seg((0, 0), (2, 0)), seg((1, 0), (1, 1))) == SegmentRelation.IMPROPER

    def test_collinear_overlap_is_improper(self):
        assert segment_relation(seg((0, 0), (2, 0)), seg((1, 0), (3, 0))) == SegmentRelation.IMPROPER

    def test_identical_segments_are_improper(self):
        assert segment_relation(seg((0, 0), (2, 0)), seg((2, 0), (0, 0))) == SegmentRelation.IMPROPER

    def test_symmetric_on_random_rational_segments(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            coords = [Fraction(int(v), 3) for v in rng.integers(-6, 7, size=8)]
            a, b, c, d = (Point(coords[i], coords[i + 1]) for i in range(0, 8, 2))
            if a == b or c == d:
                continue
            assert segment_relation(Segment(a, b), Segment(c, d)) == segment_relation(Segment(c, d), Segment(a, b))

    def test_degenerate_segment_rejected(self):
        with pytest.raises(GeometryError):
            seg((1, 1), (1, 1))


class TestBoxAndClip:
    def test_box_requires_positive_extent(self):
        with pytest.raises(GeometryError):
            Box(0, 0, 0, 1)

    def test_clip_through_box(self):
        assert clip_segment(seg((-2, 0), (2, 0)), Box.square(Point(0, 0), 1)) == (Fraction(1, 4), Fraction(3, 4))

    def test_clip_miss(self):
        assert clip_segment(seg((-2, 2), (2, 2)), Box.square(Point(0, 0), 1)) is None

    def test_clip_touching_corner(self):
        assert clip_segment(seg((0, 2), (2, 0)), Box.square(Point(0, 0), 1)) == (H, H)

    def test_boundary_meeting(self):
        box = Box.square(Point(0, 0), 2)
        assert box.meets_boundary(seg((0, 0), (3, 0)))
        assert box.meets_boundary(seg((2, -1), (2, 1)))
        assert not box.meets_boundary(seg((-1, 0), (1, 0)))

    def test_corners_counterclockwise(self):
        corners = Box(0, 0, 2, 1).corners()
        assert corners == [Point(0, 0), Point(2, 0), Point(2, 1), Point(0, 1)]
        assert polygon_signed_area(corners) > 0


class TestPathHits:
    box = Box.square(Point(0, 0), 1)

    def test_straight_crossing(self):
        path = Polyline((Point(-2, 0), Point(2, 0)))
        assert path_first_hit_last_exit(path, self.box) == (PathPosition(0, Fraction(1, 4)),
                                                             PathPosition(0, Fraction(3, 4)))

    def test_missing_box(self):
        path = Polyline((Point(-2, 2), Point(2, 2)))
        assert path_first_hit_last_exit(path, self.box) == (None, None)

    def test_entering_and_turning_out(self):
        path = Polyline((Point(-2, 0), Point(0, 0), Point(0, 2)))
        first, last = path_first_hit_last_exit(path, self.box)
        assert first == PathPosition(0, H)
        assert last == PathPosition(1, H)
        assert path.point_at(last) == Point(0, 1)

    def test_scalar_positions(self):
        assert PathPosition(1, H).scalar() == Fraction(3, 2)
        assert PathPosition.from_scalar(Fraction(3, 2), 3) == PathPosition(1, H)
        assert PathPosition.from_scalar(3, 3) == PathPosition(2, 1)


class TestPolyline:
    def test_repeated_vertex_rejected(self):
        with pytest.raises(GeometryError):
            Polyline((Point(0, 0), Point(0, 0), Point(1, 0)))

    def test_simple_and_crossing(self):
        assert Polyline((Point(0, 0), Point(2, 0), Point(2, 2))).is_simple()
        assert not Polyline((Point(0, 0), Point(2, 0), Point(2, 2), Point(1, -1))).is_simple()

    def test_backtracking_is_not_simple(self):
        assert not Polyline((Point(0, 0), Point(2, 0), Point(1, 0))).is_simple()

    def test_sub_polyline(self):
        line = Polyline((Point(0, 0), Point(2, 0), Point(2, 2)))
        sub = line.sub_polyline(PathPosition(0, H), PathPosition(1, H))
        assert sub.vertices == (Point(1, 0), Point(2, 0), Point(2, 1))

    def test_sub_polyline_at_vertices(self):
        line = Polyline((Point(0, 0), Point(2, 0), Point(2, 2)))
        sub = line.sub_polyline(PathPosition(0, 1), PathPosition(1, 1))
        assert sub.vertices == (Point(2, 0), Point(2, 2))


class TestPolygons:
    def test_signed_area(self, unit_square):
        assert polygon_signed_area(unit_square.vertices) == 2

    @pytest.mark.parametrize("point,region", [
        (Point(H, H), Region.INTERIOR),
        (Point(2, 0), Region.EXTERIOR),
        (Point(1, H), Region.BOUNDARY),
        (Point(0, 0), Region.BOUNDARY),
    ])
    def test_point_in_unit_square(self, unit_square, point, region):
        assert point_in_polygon(unit_square, point) == region

    def test_agrees_with_winding_number(self):
        # L-shaped room with a notch
        J = JordanPolygon(tuple(Point(*p) for p in
                                [(0, 0), (4, 0), (4, 1), (2, 1), (2, 2), (3, 2), (3, 4), (0, 4)]))
        rng = np.random.default_rng(11)
        for x, y in rng.integers(-7, 35, size=(400, 2)):
            p = Point(Fraction(int(x), 7), Fraction(int(y), 7))
            region = point_in_polygon(J, p)
            if region == Region.BOUNDARY:
                continue
            assert (region == Region.INTERIOR) == (winding_number(J, p) != 0)

    @pytest.mark.parametrize("vertices", [
        [(0, 0), (1, 0), (2, 0)],
        [(0, 0), (1, 1), (1, 0), (0, 1)],
        [(0, 0), (1, 0), (0, 0), (0, 1)],
    ])
    def test_invalid_polygons(self, vertices):
        with pytest.raises(GeometryError):
            JordanPolygon(tuple(Point(*p) for p in vertices))

    def test_curve_inside(self, unit_square):
        assert curve_vs_polygon(Polyline((Point(0, 0), Point(1, 1))), unit_square) == CurveRegion.IN_CLOSED_INTERIOR

    def test_curve_outside(self, unit_square):
        assert curve_vs_polygon(Polyline((Point(2, 0), Point(3, 0))), unit_square) == CurveRegion.IN_CLOSED_EXTERIOR

    def test_curve_crossing(self, unit_square):
        assert curve_vs_polygon(Polyline((Point(H, H), Point(2, H))), unit_square) == CurveRegion.MIXED

    def test_boundary_curve_is_inside_closure(self, unit_square):
        assert curve_vs_polygon(unit_square.as_closed_polyline(), unit_square) == CurveRegion.IN_CLOSED_INTERIOR

    def test_walks_from_inside_the_room(self):
        room = JordanPolygon(tuple(Point(*p) for p in
                                   [(0, 0), (4, 0), (4, 1), (2, 1), (2, 2), (3, 2), (3, 4), (0, 4)]))
        rng = np.random.default_rng(5)
        for _ in range(40):
            # vertices in the open rectangle (0,2)x(0,4), a convex part of the room
            steps = [Point(Fraction(int(x), 9), Fraction(int(y), 9))
                     for x, y in rng.integers(1, [18, 36], size=(int(rng.integers(2, 7)), 2))]
            walk = [steps[0]]
            for p in steps[1:]:
                if p != walk[-1]:
                    walk.append(p)
            if len(walk) < 2:
                continue
            assert curve_vs_polygon(Polyline(tuple(walk)), room) == CurveRegion.IN_CLOSED_INTERIOR
            assert curve_vs_polygon(Polyline(tuple(walk) + (Point(9, 9),)), room) == CurveRegion.MIXED


class TestTopoLines:
    def bump(self):
        return PLTopoLine(Point(-1, 0), Polyline((Point(-1, 0), Point(0, 1), Point(1, 0))), Point(1, 0))

    def test_unit_direction(self):
        assert unit_direction(Point(2, 4)) == Point(H, 1)
        with pytest.raises(GeometryError):
            unit_direction(Point(0, 0))

    def test_directions_normalized(self):
        line = PLTopoLine(Point(-3, 0), Polyline((Point(-1, 0), Point(1, 0))), Point(5, 0))
        assert line.left_ray_dir == Point(-1, 0) and line.right_ray_dir == Point(1, 0)

    def test_truncate(self):
        truncated = self.bump().truncate(3)
        assert truncated.vertices[0] == Point(-3, 0)
        assert truncated.vertices[-1] == Point(3, 0)
        assert truncated.is_simple()

    def test_truncate_inside_chain_rejected(self):
        with pytest.raises(GeometryError):
            self.bump().truncate(1)

    def test_meeting_rays_rejected(self):
        with pytest.raises(GeometryError):
            PLTopoLine(Point(1, 1), Polyline((Point(0, 0), Point(1, 0))), Point(-1, 1))


class TestSegmentIndex:
    def test_query_box(self):
        segments = [seg((0, 0), (1, 0)), seg((5, 5), (6, 5)), seg((0, 3), (0, 8))]
        index = SegmentIndex(segments)
        assert index.query_box(Box(-1, -1, 2, 1)) == [0]
        assert sorted(index.query_box(Box(-1, 4, 7, 6))) == [1, 2]

    def test_candidate_pairs_cover_crossing(self):
        segments = [seg((0, 0), (3, 3)), seg((0, 3), (3, 0)), seg((10, 10), (11, 10))]
        assert (0, 1) in SegmentIndex(segments).candidate_pairs()
