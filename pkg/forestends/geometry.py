"""
Planar Forest Ends - Exact Geometry Kernel
Points, segments, polylines, Jordan polygons and the predicates built on them.
All arithmetic is exact over the rationals.
"""

import logging
import math
import numbers
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union

logger = logging.getLogger(__name__)

Coord = Union[int, Fraction]


class GeometryError(ValueError):
    """Raised when a geometric object violates its construction invariants."""


def coord(value: Union[int, Fraction, str]) -> Coord:
    """Parse an exact coordinate; integral values collapse to int."""
    if isinstance(value, bool) or isinstance(value, float):
        raise GeometryError(f"Inexact coordinate rejected: {value!r}")
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, str):
        try:
            value = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise GeometryError(f"Invalid rational {value!r}: {e}")
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    raise GeometryError(f"Unsupported coordinate type: {type(value).__name__}")


def ratio(num: Coord, den: Coord) -> Coord:
    if den == 0:
        raise GeometryError("Division by zero")
    return coord(Fraction(num) / Fraction(den))


@dataclass(frozen=True, order=True)
class Point:
    x: Coord
    y: Coord

    def __post_init__(self):
        object.__setattr__(self, "x", coord(self.x))
        object.__setattr__(self, "y", coord(self.y))

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def scale(self, factor: Coord) -> "Point":
        return Point(self.x * factor, self.y * factor)

    def cross(self, other: "Point") -> Coord:
        return self.x * other.y - self.y * other.x

    def dot(self, other: "Point") -> Coord:
        return self.x * other.x + self.y * other.y

    def norm_inf(self) -> Coord:
        return max(abs(self.x), abs(self.y))

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def as_floats(self) -> Tuple[float, float]:
        return float(self.x), float(self.y)


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear."""
    value = (b - a).cross(c - a)
    return (value > 0) - (value < 0)


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a == self.b:
            raise GeometryError(f"Degenerate segment at {self.a}")

    @property
    def direction(self) -> Point:
        return self.b - self.a

    def point_at(self, t: Coord) -> Point:
        return self.a + self.direction.scale(t)

    def parameter_of(self, p: Point) -> Coord:
        """Parameter of a point known to lie on the supporting line."""
        d = self.direction
        if d.x != 0:
            return ratio(p.x - self.a.x, d.x)
        return ratio(p.y - self.a.y, d.y)

    def contains_point(self, p: Point) -> bool:
        if orient(self.a, self.b, p) != 0:
            return False
        return (min(self.a.x, self.b.x) <= p.x <= max(self.a.x, self.b.x)
                and min(self.a.y, self.b.y) <= p.y <= max(self.a.y, self.b.y))

    def endpoints(self) -> Tuple[Point, Point]:
        return self.a, self.b

    def bbox_overlaps(self, other: "Segment") -> bool:
        return not (max(self.a.x, self.b.x) < min(other.a.x, other.b.x)
                    or max(other.a.x, other.b.x) < min(self.a.x, self.b.x)
                    or max(self.a.y, self.b.y) < min(other.a.y, other.b.y)
                    or max(other.a.y, other.b.y) < min(self.a.y, self.b.y))


class SegmentRelation(str, Enum):
    DISJOINT = "Disjoint"
    SHARED_ENDPOINT = "SharedEndpointOnly"
    IMPROPER = "ImproperIntersection"


class Region(str, Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    EXTERIOR = "Exterior"


class CurveRegion(str, Enum):
    IN_CLOSED_INTERIOR = "InClosureOfInterior"
    IN_CLOSED_EXTERIOR = "InClosureOfExterior"
    MIXED = "Mixed"


def _collinear_overlap(s1: Segment, s2: Segment) -> Tuple[Point, ...]:
    """Common points of two collinear segments: (), (p,) or (lo, hi)."""
    key = (lambda p: (p.x, p.y))
    lo1, hi1 = sorted((s1.a, s1.b), key=key)
    lo2, hi2 = sorted((s2.a, s2.b), key=key)
    lo = max(lo1, lo2, key=key)
    hi = min(hi1, hi2, key=key)
    if key(lo) > key(hi):
        return ()
    if lo == hi:
        return (lo,)
    return (lo, hi)


def segment_intersection_points(s1: Segment, s2: Segment) -> Tuple[Point, ...]:
    """Exact common points: empty, one point, or the two ends of an overlap."""
    if not s1.bbox_overlaps(s2):
        return ()
    a, b, c, d = s1.a, s1.b, s2.a, s2.b
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 == 0 and o2 == 0:
        return _collinear_overlap(s1, s2)
    if o1 * o2 > 0 or o3 * o4 > 0:
        return ()
    denom = s1.direction.cross(s2.direction)
    t = ratio((c - a).cross(s2.direction), denom)
    return (s1.point_at(t),)


def segment_relation(s1: Segment, s2: Segment) -> SegmentRelation:
    common = segment_intersection_points(s1, s2)
    if not common:
        return SegmentRelation.DISJOINT
    if len(common) > 1:
        return SegmentRelation.IMPROPER
    p = common[0]
    if p in (s1.a, s1.b) and p in (s2.a, s2.b):
        return SegmentRelation.SHARED_ENDPOINT
    return SegmentRelation.IMPROPER


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned rectangle."""
    xmin: Coord
    ymin: Coord
    xmax: Coord
    ymax: Coord

    def __post_init__(self):
        for name in ("xmin", "ymin", "xmax", "ymax"):
            object.__setattr__(self, name, coord(getattr(self, name)))
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise GeometryError(f"Empty box {self}")

    @classmethod
    def square(cls, center: Point, half_width: Coord) -> "Box":
        return cls(center.x - half_width, center.y - half_width,
                   center.x + half_width, center.y + half_width)

    @classmethod
    def unit(cls, corner: Point) -> "Box":
        return cls(corner.x, corner.y, corner.x + 1, corner.y + 1)

    @property
    def center(self) -> Point:
        return Point(ratio(self.xmin + self.xmax, 2), ratio(self.ymin + self.ymax, 2))

    def contains(self, p: Point) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax

    def contains_open(self, p: Point) -> bool:
        return self.xmin < p.x < self.xmax and self.ymin < p.y < self.ymax

    def contains_box(self, other: "Box") -> bool:
        return (self.xmin <= other.xmin and other.xmax <= self.xmax
                and self.ymin <= other.ymin and other.ymax <= self.ymax)

    def corners(self) -> List[Point]:
        return [Point(self.xmin, self.ymin), Point(self.xmax, self.ymin),
                Point(self.xmax, self.ymax), Point(self.xmin, self.ymax)]

    def boundary_segments(self) -> List[Segment]:
        c = self.corners()
        return [Segment(c[i], c[(i + 1) % 4]) for i in range(4)]

    def meets_segment(self, seg: Segment) -> bool:
        return clip_segment(seg, self) is not None

    def meets_boundary(self, seg: Segment) -> bool:
        if not self.meets_segment(seg):
            return False
        return not (self.contains_open(seg.a) and self.contains_open(seg.b))


def clip_segment(seg: Segment, box: Box) -> Optional[Tuple[Coord, Coord]]:
    """Exact Liang-Barsky clip; returns the parameter range inside the closed box."""
    d = seg.direction
    t0: Coord = 0
    t1: Coord = 1
    for p, q in ((-d.x, seg.a.x - box.xmin), (d.x, box.xmax - seg.a.x),
                 (-d.y, seg.a.y - box.ymin), (d.y, box.ymax - seg.a.y)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = ratio(q, p)
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    return t0, t1


class PathPosition(NamedTuple):
    """Position on a polyline: segment index plus parameter in [0, 1]."""
    index: int
    t: Coord

    def scalar(self) -> Fraction:
        return self.index + Fraction(self.t)

    @classmethod
    def from_scalar(cls, s: Coord, segment_count: int) -> "PathPosition":
        s = Fraction(s)
        if s >= segment_count:
            return cls(segment_count - 1, 1)
        i = math.floor(s)
        return cls(i, coord(s - i))


@dataclass(frozen=True)
class Polyline:
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(self.vertices) < 2:
            raise GeometryError("Polyline needs at least two vertices")
        for p, q in zip(self.vertices, self.vertices[1:]):
            if p == q:
                raise GeometryError(f"Repeated consecutive vertex {p}")

    @cached_property
    def segments(self) -> Tuple[Segment, ...]:
        return tuple(Segment(p, q) for p, q in zip(self.vertices, self.vertices[1:]))

    @property
    def segment_count(self) -> int:
        return len(self.vertices) - 1

    def point_at(self, pos: PathPosition) -> Point:
        return self.segments[pos.index].point_at(pos.t)

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.vertices)))

    def radius(self, center: Optional[Point] = None) -> Coord:
        """Largest sup-norm distance of a vertex from center (the origin by default)."""
        if center is None:
            return max(p.norm_inf() for p in self.vertices)
        return max((p - center).norm_inf() for p in self.vertices)

    def is_simple(self) -> bool:
        segs = self.segments
        index = SegmentIndex(segs)
        for i, j in index.candidate_pairs():
            rel = segment_relation(segs[i], segs[j])
            if j == i + 1:
                if rel == SegmentRelation.IMPROPER:
                    return False
            elif rel != SegmentRelation.DISJOINT:
                return False
        return True

    def sub_polyline(self, start: PathPosition, end: PathPosition) -> "Polyline":
        """Closed sub-arc between two positions, start before end."""
        points = [self.point_at(start)]
        for k in range(start.index + 1, end.index + 1):
            points.append(self.vertices[k])
        points.append(self.point_at(end))
        cleaned = [points[0]]
        for p in points[1:]:
            if p != cleaned[-1]:
                cleaned.append(p)
        return Polyline(tuple(cleaned))


def path_first_hit_last_exit(path: Polyline, box: Box) -> Tuple[Optional[PathPosition], Optional[PathPosition]]:
    first: Optional[PathPosition] = None
    last: Optional[PathPosition] = None
    for i, seg in enumerate(path.segments):
        clipped = clip_segment(seg, box)
        if clipped is None:
            continue
        if first is None:
            first = PathPosition(i, clipped[0])
        last = PathPosition(i, clipped[1])
    return first, last


@dataclass(frozen=True)
class JordanPolygon:
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        n = len(self.vertices)
        if n < 3:
            raise GeometryError("Polygon needs at least three vertices")
        if len(set(self.vertices)) != n:
            raise GeometryError("Polygon vertices must be distinct")
        if polygon_signed_area(self.vertices) == 0:
            raise GeometryError("Zero-area polygon rejected")
        edges = self.edges
        index = SegmentIndex(edges)
        for i, j in index.candidate_pairs():
            rel = segment_relation(edges[i], edges[j])
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                if rel == SegmentRelation.IMPROPER:
                    raise GeometryError(f"Polygon edges {i} and {j} overlap")
            elif rel != SegmentRelation.DISJOINT:
                raise GeometryError(f"Polygon edges {i} and {j} intersect")

    @cached_property
    def edges(self) -> Tuple[Segment, ...]:
        n = len(self.vertices)
        return tuple(Segment(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    def as_closed_polyline(self) -> Polyline:
        return Polyline(self.vertices + (self.vertices[0],))


def polygon_signed_area(vertices: Iterable[Point]) -> Coord:
    """Twice the signed area (shoelace)."""
    pts = list(vertices)
    total: Coord = 0
    for i, p in enumerate(pts):
        total += p.cross(pts[(i + 1) % len(pts)])
    return total


def point_in_polygon(J: JordanPolygon, p: Point) -> Region:
    for edge in J.edges:
        if edge.contains_point(p):
            return Region.BOUNDARY
    inside = False
    for edge in J.edges:
        a, b = edge.a, edge.b
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + ratio((p.y - a.y) * (b.x - a.x), b.y - a.y)
            if p.x < x_cross:
                inside = not inside
    return Region.INTERIOR if inside else Region.EXTERIOR


def winding_number(J: JordanPolygon, p: Point) -> int:
    """Winding number of J around p (p off the boundary)."""
    wn = 0
    for edge in J.edges:
        a, b = edge.a, edge.b
        if a.y <= p.y:
            if b.y > p.y and orient(a, b, p) > 0:
                wn += 1
        elif b.y <= p.y and orient(a, b, p) < 0:
            wn -= 1
    return wn


def curve_vs_polygon(c: Polyline, J: JordanPolygon) -> CurveRegion:
    saw_interior = False
    saw_exterior = False
    edge_index = SegmentIndex(J.edges)
    for seg in c.segments:
        cuts = {Fraction(0), Fraction(1)}
        for j in edge_index.query_segment(seg):
            for q in segment_intersection_points(seg, J.edges[j]):
                cuts.add(Fraction(seg.parameter_of(q)))
        ordered = sorted(cuts)
        for lo, hi in zip(ordered, ordered[1:]):
            region = point_in_polygon(J, seg.point_at(coord((lo + hi) / 2)))
            if region == Region.INTERIOR:
                saw_interior = True
            elif region == Region.EXTERIOR:
                saw_exterior = True
        if saw_interior and saw_exterior:
            return CurveRegion.MIXED
    if saw_exterior:
        return CurveRegion.IN_CLOSED_EXTERIOR
    return CurveRegion.IN_CLOSED_INTERIOR


def _ray_hit_square(origin: Point, direction: Point, R: Coord,
                    center: Optional[Point] = None) -> Point:
    """Point where a ray from inside center + [-R,R]^2 leaves the square."""
    cx, cy = (center.x, center.y) if center is not None else (0, 0)
    s: Optional[Coord] = None
    for pos, d, c in ((origin.x, direction.x, cx), (origin.y, direction.y, cy)):
        if d == 0:
            continue
        bound = c + R if d > 0 else c - R
        candidate = ratio(bound - pos, d)
        s = candidate if s is None else min(s, candidate)
    return origin + direction.scale(s)


def _rays_meet(p: Point, d: Point, q: Point, e: Point) -> bool:
    denom = d.cross(e)
    w = q - p
    if denom != 0:
        s = ratio(w.cross(e), denom)
        u = ratio(w.cross(d), denom)
        return s >= 0 and u >= 0
    if w.cross(d) != 0:
        return False
    if d.dot(e) > 0:
        return True
    return w.dot(d) >= 0


def unit_direction(d: Point) -> Point:
    if d.is_zero():
        raise GeometryError("Ray direction must be nonzero")
    return d.scale(ratio(1, d.norm_inf()))


@dataclass(frozen=True)
class PLTopoLine:
    """Bi-infinite piecewise-linear curve: a finite chain between two rays."""
    left_ray_dir: Point
    chain: Polyline
    right_ray_dir: Point

    def __post_init__(self):
        object.__setattr__(self, "left_ray_dir", unit_direction(self.left_ray_dir))
        object.__setattr__(self, "right_ray_dir", unit_direction(self.right_ray_dir))
        start, end = self.chain.vertices[0], self.chain.vertices[-1]
        if _rays_meet(start, self.left_ray_dir, end, self.right_ray_dir):
            raise GeometryError("Escape rays intersect")
        if not self.truncate(self.natural_radius()).is_simple():
            raise GeometryError("Topological line is not simple")

    def natural_radius(self) -> Coord:
        return self.chain.radius() + 1

    def truncate(self, R: Coord, center: Optional[Point] = None) -> Polyline:
        """Finite polyline with both rays cut at the square of half-width R around center."""
        if self.chain.radius(center) >= R:
            raise GeometryError(f"Truncation radius {R} does not enclose the chain")
        start, end = self.chain.vertices[0], self.chain.vertices[-1]
        left = _ray_hit_square(start, self.left_ray_dir, R, center)
        right = _ray_hit_square(end, self.right_ray_dir, R, center)
        return Polyline((left,) + self.chain.vertices + (right,))


class SegmentIndex:
    """Uniform bucket grid over segments for candidate-pair and box queries."""

    def __init__(self, segments: Iterable[Segment], cell: Coord = 1):
        self.segments = list(segments)
        self.cell = cell
        self.buckets: Dict[Tuple[int, int], List[int]] = {}
        for i, seg in enumerate(self.segments):
            for key in self._cells(min(seg.a.x, seg.b.x), min(seg.a.y, seg.b.y),
                                   max(seg.a.x, seg.b.x), max(seg.a.y, seg.b.y)):
                self.buckets.setdefault(key, []).append(i)

    def _cells(self, xmin, ymin, xmax, ymax):
        c = self.cell
        for gx in range(math.floor(xmin / c), math.floor(xmax / c) + 1):
            for gy in range(math.floor(ymin / c), math.floor(ymax / c) + 1):
                yield gx, gy

    def candidate_pairs(self) -> List[Tuple[int, int]]:
        pairs = set()
        for members in self.buckets.values():
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    i, j = members[a], members[b]
                    pairs.add((i, j) if i < j else (j, i))
        return sorted(pairs)

    def query_box(self, box: Box) -> List[int]:
        found = set()
        for key in self._cells(box.xmin, box.ymin, box.xmax, box.ymax):
            found.update(self.buckets.get(key, ()))
        return sorted(found)

    def query_segment(self, seg: Segment) -> List[int]:
        found = set()
        for key in self._cells(min(seg.a.x, seg.b.x), min(seg.a.y, seg.b.y),
                               max(seg.a.x, seg.b.x), max(seg.a.y, seg.b.y)):
            found.update(self.buckets.get(key, ()))
        return sorted(found)
