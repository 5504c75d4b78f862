"""
Planar Forest Ends - Corridor Engine
Doors between pairs of one-ended components, the topological lines through
them, Jordan curves of pairwise differences, betweenness and the induced
linear order, and the door traces of two-ended components.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, permutations
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .forest import (
    ComponentReport,
    EndsTag,
    EscapeStructure,
    ForestError,
    GeometricGraph,
    WindowSpec,
    box_classification,
    classify_components,
    forward_path,
    n1_in_box,
    pendant_of_box,
)
from .geometry import (
    Box,
    Coord,
    CurveRegion,
    GeometryError,
    JordanPolygon,
    PathPosition,
    PLTopoLine,
    Point,
    Polyline,
    Segment,
    SegmentIndex,
    clip_segment,
    coord,
    curve_vs_polygon,
    path_first_hit_last_exit,
    segment_intersection_points,
)

logger = logging.getLogger(__name__)


class CorridorError(ValueError):
    """Raised when a door line, a family of lines or a trace is inconsistent."""


@dataclass(frozen=True)
class Door:
    cell: Tuple[int, int]
    center: Point
    germ1: Polyline
    germ2: Polyline
    door_segment: Segment
    components: Tuple[int, int]

    @property
    def midpoint(self) -> Point:
        return self.door_segment.point_at(Fraction(1, 2))


@dataclass(frozen=True)
class Portion:
    """Bounded open subarc of a truncated line between two positions."""
    owner: Polyline
    start: PathPosition
    end: PathPosition

    @cached_property
    def arc(self) -> Polyline:
        return self.owner.sub_polyline(self.start, self.end)

    @property
    def midpoint(self) -> Point:
        mid = (self.start.scalar() + self.end.scalar()) / 2
        return self.owner.point_at(PathPosition.from_scalar(mid, self.owner.segment_count))


@dataclass(frozen=True)
class TopoLineFamily:
    lines: Tuple[PLTopoLine, ...]
    center: Optional[Point] = None

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    def __len__(self) -> int:
        return len(self.lines)

    @cached_property
    def radius(self) -> Coord:
        """Common truncation radius around center enclosing every chain."""
        if not self.lines:
            return 1
        return max(line.chain.radius(self.center) for line in self.lines) + 1

    @cached_property
    def truncated(self) -> Tuple[Polyline, ...]:
        return tuple(line.truncate(self.radius, self.center) for line in self.lines)


def bump_line(height: Coord, left: Coord = -1, right: Coord = 1) -> PLTopoLine:
    """Horizontal line with a triangular bump of the given height over [left, right]."""
    left, right = coord(left), coord(right)
    if not left < right:
        raise CorridorError("Bump support must satisfy left < right")
    chain = Polyline((Point(left, 0), Point(coord((Fraction(left) + right) / 2), coord(height)), Point(right, 0)))
    return PLTopoLine(Point(-1, 0), chain, Point(1, 0))


def bump_family(heights: Sequence[Coord]) -> TopoLineFamily:
    return TopoLineFamily(tuple(bump_line(h) for h in heights))


def _covered_intervals(P: Polyline, Q: Polyline) -> List[Tuple[Fraction, Fraction]]:
    """Global parameter intervals of P lying on Q."""
    q_index = SegmentIndex(Q.segments)
    covered = []
    for i, seg in enumerate(P.segments):
        for j in q_index.query_segment(seg):
            pts = segment_intersection_points(seg, Q.segments[j])
            if not pts:
                continue
            ts = sorted(Fraction(seg.parameter_of(p)) for p in pts)
            covered.append((i + ts[0], i + ts[-1]))
    covered.sort()
    merged: List[Tuple[Fraction, Fraction]] = []
    for lo, hi in covered:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _portion_of_truncations(P: Polyline, Q: Polyline) -> Optional[Portion]:
    n = P.segment_count
    merged = _covered_intervals(P, Q)
    gaps = []
    cursor = Fraction(0)
    for lo, hi in merged:
        if lo > cursor:
            gaps.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < n:
        gaps.append((cursor, Fraction(n)))
    if len(gaps) != 1:
        return None
    lo, hi = gaps[0]
    if lo == 0 or hi == n:
        return None
    return Portion(P, PathPosition.from_scalar(lo, n), PathPosition.from_scalar(hi, n))


def portion_difference(gamma: PLTopoLine, other: PLTopoLine,
                       R: Optional[Coord] = None) -> Optional[Portion]:
    """gamma minus other as a single bounded open subarc, or None when it is not a portion."""
    if gamma == other:
        return None
    if R is None:
        R = max(gamma.chain.radius(), other.chain.radius()) + 1
    return _portion_of_truncations(gamma.truncate(R), other.truncate(R))


def _splice(p: Portion, q: Portion) -> JordanPolygon:
    a, b = p.arc.vertices[0], p.arc.vertices[-1]
    back = q.arc.vertices
    if back[0] == b and back[-1] == a:
        ring = p.arc.vertices + back[1:-1]
    elif back[0] == a and back[-1] == b:
        ring = p.arc.vertices + tuple(reversed(back))[1:-1]
    else:
        raise CorridorError("Difference arcs do not close into a curve")
    try:
        return JordanPolygon(ring)
    except GeometryError as e:
        raise CorridorError(f"Difference arcs do not bound a Jordan polygon: {e}")


def jordan_from_pair(gamma: PLTopoLine, other: PLTopoLine,
                     R: Optional[Coord] = None) -> JordanPolygon:
    if gamma == other:
        raise CorridorError("Jordan curve of a line with itself")
    if R is None:
        R = max(gamma.chain.radius(), other.chain.radius()) + 1
    p = portion_difference(gamma, other, R)
    q = portion_difference(other, gamma, R)
    if p is None or q is None:
        raise CorridorError("Lines do not differ by a portion")
    return _splice(p, q)


class Betweenness:
    """Betweenness oracle over a family, caching portions, curves and answers."""

    def __init__(self, family: TopoLineFamily):
        self.family = family
        self._portions: Dict[Tuple[int, int], Optional[Portion]] = {}
        self._curves: Dict[Tuple[int, int], JordanPolygon] = {}
        self._answers: Dict[Tuple[int, int, int], bool] = {}

    def __len__(self) -> int:
        return len(self.family)

    def portion(self, i: int, j: int) -> Optional[Portion]:
        if i == j:
            return None
        if (i, j) not in self._portions:
            P, Q = self.family.truncated[i], self.family.truncated[j]
            self._portions[(i, j)] = _portion_of_truncations(P, Q)
        return self._portions[(i, j)]

    def jordan(self, i: int, j: int) -> JordanPolygon:
        if i == j:
            raise CorridorError(f"Jordan curve of line {i} with itself")
        key = (min(i, j), max(i, j))
        if key not in self._curves:
            p, q = self.portion(*key), self.portion(key[1], key[0])
            if p is None or q is None:
                raise CorridorError(f"Lines {key[0]} and {key[1]} do not differ by a portion")
            self._curves[key] = _splice(p, q)
        return self._curves[key]

    def between(self, a: int, b: int, c: int) -> bool:
        """True iff line b lies strictly between lines a and c."""
        if len({a, b, c}) != 3:
            raise CorridorError(f"Betweenness needs three distinct lines, got {(a, b, c)}")
        key = (a, b, c)
        if key not in self._answers:
            region = curve_vs_polygon(self.jordan(a, b).as_closed_polyline(), self.jordan(a, c))
            if region == CurveRegion.MIXED:
                raise CorridorError(f"Curve of lines {a},{b} crosses curve of lines {a},{c}")
            self._answers[key] = region == CurveRegion.IN_CLOSED_INTERIOR
        return self._answers[key]

    def anchor(self, i: int) -> Point:
        """Lexicographically smallest midpoint of the portions of line i."""
        points = [p.midpoint for j in range(len(self)) if (p := self.portion(i, j)) is not None]
        if not points:
            return self.family.lines[i].chain.vertices[0]
        return min(points)


def between(gamma: PLTopoLine, sigma: PLTopoLine, other: PLTopoLine) -> bool:
    return Betweenness(TopoLineFamily((gamma, sigma, other))).between(0, 1, 2)


def linear_order(family: TopoLineFamily, oracle: Optional[Betweenness] = None) -> List[int]:
    """Indices sorted by insertion with betweenness as comparator, reversal-normalized."""
    n = len(family)
    if n == 0:
        raise CorridorError("Cannot order an empty family")
    oracle = oracle or Betweenness(family)
    order = [0]
    for x in range(1, n):
        if len(order) == 1:
            order.append(x)
            continue
        first, last = order[0], order[-1]
        if oracle.between(x, first, last):
            order.insert(0, x)
        elif oracle.between(first, last, x):
            order.append(x)
        elif oracle.between(first, x, last):
            lo, hi = 0, len(order) - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if oracle.between(order[lo], x, order[mid]):
                    hi = mid
                else:
                    lo = mid
            order.insert(hi, x)
        else:
            raise CorridorError(f"Line {x} fits no position relative to lines {first} and {last}")
    if n > 1 and oracle.anchor(order[-1]) < oracle.anchor(order[0]):
        order.reverse()
    return order


@dataclass(frozen=True)
class AxiomSummary:
    symmetry_checks: int = 0
    symmetry_failures: int = 0
    trichotomy_checks: int = 0
    trichotomy_failures: int = 0
    transitivity_checks: int = 0
    transitivity_failures: int = 0
    order_checks: int = 0
    order_failures: int = 0

    @property
    def ok(self) -> bool:
        return not (self.symmetry_failures or self.trichotomy_failures
                    or self.transitivity_failures or self.order_failures)


def axiom_summary(oracle: Betweenness, order: Optional[Sequence[int]] = None) -> AxiomSummary:
    n = len(oracle)
    counts = dict.fromkeys(AxiomSummary.__dataclass_fields__, 0)
    for a, b, c in permutations(range(n), 3):
        counts["symmetry_checks"] += 1
        if oracle.between(a, b, c) != oracle.between(c, b, a):
            counts["symmetry_failures"] += 1
    for a, b, c in combinations(range(n), 3):
        counts["trichotomy_checks"] += 1
        held = oracle.between(b, a, c) + oracle.between(a, b, c) + oracle.between(a, c, b)
        if held != 1:
            counts["trichotomy_failures"] += 1
    for s, g, s1, s2 in permutations(range(n), 4):
        if oracle.between(s, g, s1) and not oracle.between(s, g, s2):
            counts["transitivity_checks"] += 1
            if not oracle.between(s1, g, s2):
                counts["transitivity_failures"] += 1
    if order is not None:
        rank = {x: i for i, x in enumerate(order)}
        for a, b, c in permutations(range(n), 3):
            counts["order_checks"] += 1
            inside = min(rank[a], rank[c]) < rank[b] < max(rank[a], rank[c])
            if oracle.between(a, b, c) != inside:
                counts["order_failures"] += 1
    return AxiomSummary(**counts)


def _escape_route(G: GeometricGraph, u: int, outer: Box) -> Optional[Polyline]:
    """Tree path from u through the nearest edge meeting the outer boundary."""
    if G.oriented:
        try:
            return forward_path(G, u)
        except ForestError:
            return None
    parent = {u: -1}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        for nbr, eid in G.incidence[v]:
            if nbr in parent:
                continue
            parent[nbr] = v
            if outer.meets_boundary(G.segment(eid)):
                path = [nbr]
                while parent[path[-1]] != -1:
                    path.append(parent[path[-1]])
                return Polyline(tuple(G.vertices[x] for x in reversed(path)))
            queue.append(nbr)
    return None


def _germ(route: Polyline, K: Box, outer: Box) -> Optional[Polyline]:
    """Part of route from its last exit of K up to its first point on the outer boundary."""
    _, exit_pos = path_first_hit_last_exit(route, K)
    if exit_pos is None:
        return None
    for i in range(exit_pos.index, route.segment_count):
        seg = route.segments[i]
        t_start = exit_pos.t if i == exit_pos.index else 0
        if not outer.contains_open(seg.point_at(t_start)):
            hit = PathPosition(i, t_start)
            break
        if outer.meets_boundary(seg):
            _, t1 = _clip_or_fail(seg, outer)
            hit = PathPosition(i, t1)
            break
    else:
        return None
    if hit.scalar() <= exit_pos.scalar():
        return None
    try:
        return route.sub_polyline(exit_pos, hit)
    except GeometryError:
        return None


def _clip_or_fail(seg: Segment, box: Box) -> Tuple[Coord, Coord]:
    clipped = clip_segment(seg, box)
    if clipped is None:
        raise CorridorError("Segment flagged on the boundary does not meet the box")
    return clipped


def build_gamma(door: Door) -> PLTopoLine:
    """Topological line: germ1 reversed, the door segment, then germ2."""
    g1, g2 = door.germ1, door.germ2
    chain = g1.reversed().vertices + g2.vertices
    left = g1.vertices[-1] - g1.vertices[-2]
    right = g2.vertices[-1] - g2.vertices[-2]
    try:
        return PLTopoLine(left, Polyline(chain), right)
    except GeometryError as e:
        raise CorridorError(f"Door at {door.center} does not give a simple line: {e}")


def _representative(G: GeometricGraph, report: ComponentReport, K: Box) -> int:
    inside = [x for x in report.vertices if K.contains(G.vertices[x])]
    return min(inside, key=lambda x: G.vertices[x])


def door_candidates(w: WindowSpec, k: int, l: int) -> List[Tuple[Tuple[int, int], Point]]:
    """Cells (i, j) of the 2l-grid around the window origin whose k-box fits in the window."""
    if not 0 < k < l:
        raise CorridorError(f"Doors need 0 < k < l, got k={k}, l={l}")
    inner, outer = w.inner_box, w.outer_box
    step = 2 * l
    span = int(Fraction(w.inner) // step) + 1
    cells = []
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            c = w.origin + Point(step * i, step * j)
            if inner.contains(c) and outer.contains_box(Box.square(c, k)):
                cells.append(((i, j), c))
    return cells


def detect_doors(G: GeometricGraph, k: int, l: int, w: WindowSpec) -> List[Door]:
    """Doors at candidate cells where exactly two one-ended components meet the k-box
    and the pendant trees of the k-box stay inside the open l-box.

    Each candidate is classified with its own k-box as the inner box; the outer
    window boundary stands in for infinity throughout.
    """
    cells = door_candidates(w, k, l)
    structure = EscapeStructure(G, w)
    outer = w.outer_box
    doors = []
    for cell, c in cells:
        K = Box.square(c, k)
        local = box_classification(G, K, outer)
        if n1_in_box(G, K, w, local) != 2:
            continue
        confine = Box.square(c, l)
        pendant = pendant_of_box(G, K, w, structure)
        if not all(confine.contains_open(G.vertices[x]) for x in pendant):
            logger.debug("Door candidate at %s rejected: pendant of %d vertices leaves the l-box", c, len(pendant))
            continue
        door = _door_at(cell, c, G, K, outer, local.with_tag(EndsTag.ONE_ENDED))
        if door is not None:
            doors.append(door)
    logger.debug("Detected %d doors with k=%d l=%d", len(doors), k, l)
    return doors


def _door_at(cell, c: Point, G: GeometricGraph, K: Box, outer: Box,
             one_ended: List[ComponentReport]) -> Optional[Door]:
    pair = [r for r in one_ended if any(K.contains(G.vertices[x]) for x in r.vertices)]
    reps = sorted(((_representative(G, r, K), r) for r in pair), key=lambda item: G.vertices[item[0]])
    germs = []
    for u, _ in reps:
        route = _escape_route(G, u, outer)
        germ = _germ(route, K, outer) if route is not None else None
        if germ is None:
            logger.info("Door candidate at %s rejected: germ from %s does not leave the window",
                        c, G.vertices[u])
            return None
        germs.append(germ)
    start1, start2 = germs[0].vertices[0], germs[1].vertices[0]
    if start1 == start2:
        logger.info("Door candidate at %s rejected: germs start at the same point", c)
        return None
    door = Door(cell, c, germs[0], germs[1], Segment(start1, start2),
                (reps[0][1].component_id, reps[1][1].component_id))
    try:
        build_gamma(door)
    except CorridorError as e:
        logger.info("Door candidate at %s rejected: %s", c, e)
        return None
    return door


def coherent_door_family(doors: Sequence[Door],
                         center: Optional[Point] = None) -> Tuple[List[Door], TopoLineFamily]:
    """Drop doors whose lines break the pairwise portion hypothesis, worst first."""
    kept = list(doors)
    while True:
        family = TopoLineFamily(tuple(build_gamma(d) for d in kept), center)
        oracle = Betweenness(family)
        failures = [0] * len(kept)
        for a, b in combinations(range(len(kept)), 2):
            if oracle.portion(a, b) is None or oracle.portion(b, a) is None:
                failures[a] += 1
                failures[b] += 1
        if not any(failures):
            return kept, family
        worst = max(range(len(kept)), key=lambda x: (failures[x], x))
        logger.warning("Dropping door at %s: %d portion failures", kept[worst].center, failures[worst])
        kept.pop(worst)


def door_trace(G: GeometricGraph, component: ComponentReport, family: TopoLineFamily,
               doors: Sequence[Door]) -> Set[int]:
    """Doors whose line meets the component inside the window; only two-ended components have traces.

    Only the germs and the door segment are tested: the escape rays beyond the
    window are extrapolations, not part of the graph.
    """
    if component.ends_class.tag != EndsTag.TWO_ENDED:
        return set()
    members = set(component.vertices)
    segments = [G.segment(eid) for eid in G.undirected_edge_ids if G.edges[eid][0] in members]
    if not segments:
        return set()
    index = SegmentIndex(segments)
    trace = set()
    for d, (door, line) in enumerate(zip(doors, family.lines)):
        for seg in line.chain.segments:
            for s in index.query_segment(seg):
                for p in segment_intersection_points(seg, segments[s]):
                    if not door.door_segment.contains_point(p):
                        raise CorridorError(f"Component {component.component_id} meets door {d} at {p} "
                                            f"off its door segment")
                    trace.add(d)
    return trace


def extreme_points(X: Set[int], order: Sequence[int]) -> List[int]:
    ranked = [x for x in order if x in X]
    if not ranked:
        return []
    return sorted({ranked[0], ranked[-1]}, key=order.index)


def check_trace_convex(trace: Set[int], order: Sequence[int]) -> bool:
    positions = sorted(i for i, x in enumerate(order) if x in trace)
    return not positions or positions[-1] - positions[0] + 1 == len(positions)


def trace_touches_extremes(trace: Set[int], order: Sequence[int]) -> bool:
    return bool(order) and order[0] in trace and order[-1] in trace


@dataclass
class CorridorReport:
    doors: List[Door]
    order: List[int]
    traces: Dict[int, List[int]] = field(default_factory=dict)
    convex: Dict[int, bool] = field(default_factory=dict)
    touches_extremes: Dict[int, bool] = field(default_factory=dict)
    extremes: Dict[int, List[int]] = field(default_factory=dict)
    axioms: AxiomSummary = field(default_factory=AxiomSummary)
    dropped: int = 0
    origin: Optional[Point] = None

    def to_dict(self) -> Dict:
        return {
            "doors": [
                {
                    "center": [str(door.center.x), str(door.center.y)],
                    "segment": [[str(p.x), str(p.y)] for p in door.door_segment.endpoints()],
                    "components": list(door.components),
                }
                for door in self.doors
            ],
            "dropped": self.dropped,
            "order": self.order,
            "traces": {str(cid): trace for cid, trace in self.traces.items()},
            "convex": {str(cid): ok for cid, ok in self.convex.items()},
            "touches_extremes": {str(cid): ok for cid, ok in self.touches_extremes.items()},
            "extremes": {str(cid): ends for cid, ends in self.extremes.items()},
            "axioms": {name: getattr(self.axioms, name) for name in AxiomSummary.__dataclass_fields__},
            "unboundedness": "replaced by trace touching both extreme detected doors",
        }


def analyze_corridor(G: GeometricGraph, k: int, l: int, w: WindowSpec) -> CorridorReport:
    classification = classify_components(G, w)
    found = detect_doors(G, k, l, w)
    doors, family = coherent_door_family(found, w.origin)
    report = CorridorReport(doors=doors, order=[], dropped=len(found) - len(doors), origin=w.origin)
    if not doors:
        return report
    oracle = Betweenness(family)
    report.order = linear_order(family, oracle)
    report.axioms = axiom_summary(oracle, report.order)
    for component in classification.with_tag(EndsTag.TWO_ENDED):
        trace = door_trace(G, component, family, doors)
        cid = component.component_id
        report.traces[cid] = [d for d in report.order if d in trace]
        report.convex[cid] = check_trace_convex(trace, report.order)
        report.touches_extremes[cid] = trace_touches_extremes(trace, report.order)
        report.extremes[cid] = extreme_points(trace, report.order)
    logger.info("Corridor: %d doors (%d dropped), %d two-ended components",
                len(doors), report.dropped, len(report.traces))
    return report
