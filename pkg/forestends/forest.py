"""
Planar Forest Ends - Forest Analysis Engine
Geometric graph model, structural validators and finite-window estimators:
edge intensity, box crossings, escape degree, ends classification,
pendant trees and peeling.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

import networkx as nx

from .geometry import (
    Box,
    Coord,
    Point,
    Polyline,
    Segment,
    SegmentIndex,
    SegmentRelation,
    clip_segment,
    coord,
    ratio,
    segment_relation,
)

logger = logging.getLogger(__name__)


class ForestError(ValueError):
    """Raised when a graph or a query violates the forest model."""


class UnionFind:
    """Disjoint sets with path compression over 0..size-1."""

    def __init__(self, size: int):
        self.size = size
        self.parents = list(range(size))
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of a and b; False when they were already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parents[rb] = ra
        self.num_components -= 1
        return True

    def components(self) -> List[List[int]]:
        groups: Dict[int, List[int]] = {}
        for i in range(self.size):
            groups.setdefault(self.find(i), []).append(i)
        return sorted(groups.values())


@dataclass(frozen=True)
class GeometricGraph:
    vertices: Tuple[Point, ...]
    edges: Tuple[Tuple[int, int], ...]
    oriented: bool = False
    ids: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        n = len(self.vertices)
        if not self.ids:
            object.__setattr__(self, "ids", tuple(range(n)))
        else:
            object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.ids) != n:
            raise ForestError("Stable ids must match the vertex count")
        if len(set(self.vertices)) != n:
            raise ForestError("Vertex positions must be pairwise distinct")
        directed = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ForestError(f"Edge ({u}, {v}) out of range")
            if u == v:
                raise ForestError(f"Self-loop at vertex {u}")
            directed.add((u, v))
        if self.oriented:
            for u, v in directed:
                if (v, u) in directed:
                    raise ForestError(f"Directed 2-cycle between {u} and {v}")

    @classmethod
    def empty(cls, oriented: bool = False) -> "GeometricGraph":
        return cls((), (), oriented)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @cached_property
    def undirected_edge_ids(self) -> Tuple[int, ...]:
        """First edge index of every distinct unordered pair."""
        seen = set()
        kept = []
        for i, (u, v) in enumerate(self.edges):
            key = (u, v) if u < v else (v, u)
            if key not in seen:
                seen.add(key)
                kept.append(i)
        return tuple(kept)

    @cached_property
    def incidence(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """Per vertex: sorted (neighbor, edge id) over the undirected collapse."""
        adj: List[List[Tuple[int, int]]] = [[] for _ in self.vertices]
        for eid in self.undirected_edge_ids:
            u, v = self.edges[eid]
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        return tuple(tuple(sorted(row)) for row in adj)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def segment(self, eid: int) -> Segment:
        u, v = self.edges[eid]
        return Segment(self.vertices[u], self.vertices[v])

    @cached_property
    def segment_index(self) -> SegmentIndex:
        """Bucket index over undirected segments; entries index undirected_edge_ids."""
        return SegmentIndex(self.segment(eid) for eid in self.undirected_edge_ids)

    def edges_meeting(self, box: Box) -> List[int]:
        ids = self.undirected_edge_ids
        return [ids[k] for k in self.segment_index.query_box(box)
                if box.meets_segment(self.segment(ids[k]))]

    @cached_property
    def position_index(self) -> Dict[Point, int]:
        return {p: i for i, p in enumerate(self.vertices)}

    @cached_property
    def successors(self) -> Tuple[Optional[int], ...]:
        if not self.oriented:
            raise ForestError("Successor pointers need an oriented graph")
        succ: List[Optional[int]] = [None] * self.vertex_count
        for u, v in self.edges:
            if succ[u] is not None:
                raise ForestError(f"Vertex {u} has out-degree above 1")
            succ[u] = v
        return tuple(succ)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        for eid in self.undirected_edge_ids:
            u, v = self.edges[eid]
            graph.add_edge(u, v, index=eid)
        return graph


@dataclass(frozen=True)
class WindowSpec:
    inner: Coord
    outer: Coord
    origin: Point = Point(0, 0)

    def __post_init__(self):
        object.__setattr__(self, "inner", coord(self.inner))
        object.__setattr__(self, "outer", coord(self.outer))
        if not (0 < self.inner < self.outer):
            raise ForestError(f"Window needs 0 < inner < outer, got {self.inner}, {self.outer}")

    @property
    def inner_box(self) -> Box:
        return Box.square(self.origin, self.inner)

    @property
    def outer_box(self) -> Box:
        return Box.square(self.origin, self.outer)


class EndsTag(str, Enum):
    FINITE = "FiniteComponent"
    ONE_ENDED = "OneEnded"
    TWO_ENDED = "TwoEnded"
    TRIFURCATING = "Trifurcating"


@dataclass(frozen=True)
class EndsClass:
    tag: EndsTag
    n: Optional[int] = None

    def __post_init__(self):
        if (self.tag == EndsTag.TRIFURCATING) != (self.n is not None and self.n >= 3):
            raise ForestError(f"Invalid ends class {self.tag} with n={self.n}")

    @classmethod
    def from_escapes(cls, escapes: int) -> "EndsClass":
        if escapes == 0:
            return cls(EndsTag.FINITE)
        if escapes == 1:
            return cls(EndsTag.ONE_ENDED)
        if escapes == 2:
            return cls(EndsTag.TWO_ENDED)
        return cls(EndsTag.TRIFURCATING, escapes)

    @property
    def escapes(self) -> int:
        return {EndsTag.FINITE: 0, EndsTag.ONE_ENDED: 1, EndsTag.TWO_ENDED: 2}.get(self.tag, self.n)

    def __str__(self) -> str:
        return f"{self.tag.value}({self.n})" if self.n is not None else self.tag.value


@dataclass(frozen=True)
class ComponentReport:
    component_id: int
    vertices: Tuple[int, ...]
    vertex_count_in_window: int
    ends_class: EndsClass
    escape_edge_parameters: Tuple[Tuple[int, Coord], ...]


@dataclass(frozen=True)
class Classification:
    reports: Tuple[ComponentReport, ...]

    def _count(self, tag: EndsTag) -> int:
        return sum(1 for r in self.reports if r.ends_class.tag == tag)

    @property
    def n0(self) -> int:
        return self._count(EndsTag.FINITE)

    @property
    def n1(self) -> int:
        return self._count(EndsTag.ONE_ENDED)

    @property
    def n2(self) -> int:
        return self._count(EndsTag.TWO_ENDED)

    @property
    def n3plus(self) -> int:
        return self._count(EndsTag.TRIFURCATING)

    def counts(self) -> Tuple[int, int, int, int]:
        return self.n0, self.n1, self.n2, self.n3plus

    def with_tag(self, tag: EndsTag) -> List[ComponentReport]:
        return [r for r in self.reports if r.ends_class.tag == tag]


@dataclass(frozen=True)
class ForestCheck:
    ok: bool
    cycle_witness: Tuple[int, ...] = ()


class PeelOutcome(str, Enum):
    NOT_REMOVED = "NotRemoved"


def validate_planarity(G: GeometricGraph) -> List[Tuple[int, int]]:
    """Pairs of edge indices whose segments meet anywhere but a shared extremity."""
    ids = G.undirected_edge_ids
    violations = []
    for a, b in G.segment_index.candidate_pairs():
        i, j = ids[a], ids[b]
        if segment_relation(G.segment(i), G.segment(j)) == SegmentRelation.IMPROPER:
            violations.append((min(i, j), max(i, j)))
    violations.sort()
    if violations:
        logger.debug("Planarity violations: %d pairs", len(violations))
    return violations


def validate_forest(G: GeometricGraph) -> ForestCheck:
    uf = UnionFind(G.vertex_count)
    accepted = nx.Graph()
    for eid in G.undirected_edge_ids:
        u, v = G.edges[eid]
        if not uf.union(u, v):
            path = nx.shortest_path(accepted, u, v)
            cycle = [accepted.edges[p, q]["index"] for p, q in zip(path, path[1:])]
            cycle.append(eid)
            return ForestCheck(False, tuple(cycle))
        accepted.add_edge(u, v, index=eid)
    return ForestCheck(True)


def component_census(G: GeometricGraph) -> List[Tuple[int, ...]]:
    return sorted(tuple(sorted(c)) for c in nx.connected_components(G.to_networkx()))


def unit_sample_boxes(region: Box, margin: Coord = 0, stride: int = 1,
                      offset: Coord = 0) -> List[Box]:
    """Unit boxes with corners on offset + Z^2 inside region shrunk by margin."""
    lo_x, hi_x = region.xmin + margin, region.xmax - margin
    lo_y, hi_y = region.ymin + margin, region.ymax - margin
    xs = range(math.ceil(lo_x - offset), math.floor(hi_x - offset - 1) + 1, stride)
    ys = range(math.ceil(lo_y - offset), math.floor(hi_y - offset - 1) + 1, stride)
    return [Box.unit(Point(x + offset, y + offset)) for y in ys for x in xs]


def edge_intensity(G: GeometricGraph, sample_boxes: List[Box]) -> Coord:
    if not sample_boxes:
        raise ForestError("Edge intensity needs at least one sample box")
    total = sum(len(G.edges_meeting(box)) for box in sample_boxes)
    return ratio(total, len(sample_boxes))


def chi_n(G: GeometricGraph, n: int, origin: Point) -> int:
    """Edges meeting the boundary of origin + [0, n]^2."""
    if n <= 0:
        raise ForestError("Box side must be positive")
    box = Box(origin.x, origin.y, origin.x + n, origin.y + n)
    return sum(1 for eid in G.edges_meeting(box) if box.meets_boundary(G.segment(eid)))


def boundary_cover_count(G: GeometricGraph, n: int, origin: Point) -> int:
    """Sum over the 4n unit boxes covering the boundary of origin + [0, n]^2."""
    total = 0
    for i in range(n):
        for dx, dy in ((i, 0), (i, n), (0, i), (n, i)):
            total += len(G.edges_meeting(Box.unit(origin + Point(dx, dy))))
    return total


def _boundary_parameter(seg: Segment, box: Box) -> Coord:
    lo, hi = clip_segment(seg, box)
    return hi if box.contains_open(seg.a) else lo


def classify_components(G: GeometricGraph, w: WindowSpec) -> Classification:
    return classify_in_boxes(G, w.inner_box, w.outer_box)


def classify_in_boxes(G: GeometricGraph, inner: Box, outer: Box) -> Classification:
    """Ends classes of the components with a vertex in inner, escaping through outer."""
    if not outer.contains_box(inner):
        raise ForestError("Inner box must lie inside the outer box")
    n = G.vertex_count
    inside = [inner.contains(p) for p in G.vertices]
    uf_all = UnionFind(n)
    uf_out = UnionFind(n)
    hits: List[Tuple[int, int]] = []

    for eid in G.undirected_edge_ids:
        u, v = G.edges[eid]
        seg = G.segment(eid)
        uf_all.union(u, v)
        clipped = clip_segment(seg, inner)
        if clipped is None:
            uf_out.union(u, v)
            if outer.meets_boundary(seg):
                hits.append((eid, u))
            continue
        t0, t1 = clipped
        # crossing edges become stubs hanging off their outside endpoints
        if not inside[u] and outer.meets_boundary(Segment(seg.a, seg.point_at(t0))):
            hits.append((eid, u))
        if not inside[v] and outer.meets_boundary(Segment(seg.point_at(t1), seg.b)):
            hits.append((eid, v))

    wanted = {uf_all.find(x) for x in range(n) if inside[x]}
    pieces: Dict[int, Set[int]] = {r: set() for r in wanted}
    params: Dict[int, Dict[int, Coord]] = {r: {} for r in wanted}
    for eid, x in hits:
        root = uf_all.find(x)
        if root not in wanted:
            continue
        pieces[root].add(uf_out.find(x))
        params[root].setdefault(eid, _boundary_parameter(G.segment(eid), outer))

    members: Dict[int, List[int]] = {r: [] for r in wanted}
    for x in range(n):
        root = uf_all.find(x)
        if root in members:
            members[root].append(x)

    reports = []
    for root, verts in members.items():
        reports.append(ComponentReport(
            component_id=min(G.ids[x] for x in verts),
            vertices=tuple(verts),
            vertex_count_in_window=sum(1 for x in verts if inside[x]),
            ends_class=EndsClass.from_escapes(len(pieces[root])),
            escape_edge_parameters=tuple(sorted(params[root].items())),
        ))
    reports.sort(key=lambda r: r.component_id)
    return Classification(tuple(reports))


def box_classification(G: GeometricGraph, K: Box, outer: Box) -> Classification:
    """Classification with K as the inner box, kept half a unit inside the outer boundary.

    A candidate box touching the window boundary would otherwise swallow the
    escape of any component leaving through that stretch of boundary.
    """
    h = Fraction(1, 2)
    inner = Box(max(K.xmin, outer.xmin + h), max(K.ymin, outer.ymin + h),
                min(K.xmax, outer.xmax - h), min(K.ymax, outer.ymax - h))
    return classify_in_boxes(G, inner, outer)


def n1_in_box(G: GeometricGraph, K: Box, w: WindowSpec,
              classification: Optional[Classification] = None) -> int:
    """Number of one-ended components with a vertex in K, classified with K as the inner box."""
    classification = classification or box_classification(G, K, w.outer_box)
    return sum(1 for r in classification.with_tag(EndsTag.ONE_ENDED)
               if any(K.contains(G.vertices[x]) for x in r.vertices))


class EscapeStructure:
    """Rooted view of a forest with per-subtree counts of outer-boundary edges."""

    def __init__(self, G: GeometricGraph, w: WindowSpec):
        self.graph = G
        self.window = w
        outer = w.outer_box
        n = G.vertex_count
        self.flag = {eid: outer.meets_boundary(G.segment(eid)) for eid in G.undirected_edge_ids}
        self.parent = [-1] * n
        self.parent_edge = [-1] * n
        self.root = [-1] * n
        self.children: List[List[int]] = [[] for _ in range(n)]
        self.below = [0] * n
        self.members: Dict[int, List[int]] = {}
        for r in range(n):
            if self.root[r] == -1:
                self._explore(r)

    def _explore(self, r: int) -> None:
        G = self.graph
        self.root[r] = r
        order = [r]
        stack = [r]
        while stack:
            v = stack.pop()
            for u, eid in G.incidence[v]:
                if eid == self.parent_edge[v]:
                    continue
                if self.root[u] != -1:
                    raise ForestError(f"Cycle through vertices {v} and {u}")
                self.root[u] = r
                self.parent[u] = v
                self.parent_edge[u] = eid
                self.children[v].append(u)
                order.append(u)
                stack.append(u)
        for v in reversed(order):
            p = self.parent[v]
            if p != -1:
                self.below[p] += self.below[v] + self.flag[self.parent_edge[v]]
        self.members[r] = sorted(order)

    def _parent_side_escapes(self, v: int) -> bool:
        total = self.below[self.root[v]]
        return total - self.below[v] - self.flag[self.parent_edge[v]] > 0

    def escape_degree(self, v: int) -> int:
        count = sum(1 for c in self.children[v] if self.below[c] > 0)
        if self.parent[v] != -1 and self._parent_side_escapes(v):
            count += 1
        return count

    def subtree(self, v: int) -> List[int]:
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return out

    def pendant_tree(self, v: int) -> Set[int]:
        result = {v}
        for c in self.children[v]:
            if self.below[c] == 0:
                result.update(self.subtree(c))
        if self.parent[v] != -1 and not self._parent_side_escapes(v):
            excluded = set(self.subtree(v))
            result.update(x for x in self.members[self.root[v]] if x not in excluded)
        return result


def escape_degrees(G: GeometricGraph, w: WindowSpec,
                   vertices: Optional[Iterable[int]] = None) -> Dict[int, int]:
    """Escape degree of every vertex in the inner box (or of the given ones)."""
    inner = w.inner_box
    if vertices is None:
        vertices = [i for i, p in enumerate(G.vertices) if inner.contains(p)]
    vertices = list(vertices)
    for v in vertices:
        if not inner.contains(G.vertices[v]):
            raise ForestError(f"Vertex {v} lies outside the inner box")
    structure = EscapeStructure(G, w)
    return {v: structure.escape_degree(v) for v in vertices}


def escape_degree(G: GeometricGraph, v: int, w: WindowSpec) -> int:
    return escape_degrees(G, w, [v])[v]


def trifurcation_density(G: GeometricGraph, w: WindowSpec) -> Coord:
    """Fraction of inner-box vertices with escape degree at least 3."""
    degrees = escape_degrees(G, w)
    if not degrees:
        return 0
    return ratio(sum(1 for d in degrees.values() if d >= 3), len(degrees))


def pendant_tree(G: GeometricGraph, v: int, w: WindowSpec) -> Set[int]:
    if not w.outer_box.contains(G.vertices[v]):
        raise ForestError(f"Vertex {v} lies outside the outer box")
    return EscapeStructure(G, w).pendant_tree(v)


def box_heads(G: GeometricGraph, K: Box) -> List[int]:
    """Heads of edges meeting K; both endpoints when the graph is unoriented."""
    heads = set()
    for eid in G.edges_meeting(K):
        u, v = G.edges[eid]
        heads.add(v)
        if not G.oriented:
            heads.add(u)
    return sorted(heads)


def pendant_of_box(G: GeometricGraph, K: Box, w: WindowSpec,
                   structure: Optional[EscapeStructure] = None) -> Set[int]:
    if not w.outer_box.contains_box(K):
        raise ForestError("Box must lie inside the outer window")
    structure = structure or EscapeStructure(G, w)
    result: Set[int] = set()
    for v in box_heads(G, K):
        result |= structure.pendant_tree(v)
    return result


def one_ended_trifurcations(G: GeometricGraph, k: int, l: int, w: WindowSpec) -> List[Point]:
    """Corners c with N1(c+[0,k]^2) >= 3 and Pend(c+[0,k]^2) inside c+(-l, k+l)^2."""
    structure = EscapeStructure(G, w)
    step = k + 2 * l
    inner = w.inner_box
    span = math.floor(Fraction(w.inner) / step) + 1
    found = []
    for i in range(-span, span + 1):
        for j in range(-span, span + 1):
            c = w.origin + Point(step * i, step * j)
            K = Box(c.x, c.y, c.x + k, c.y + k)
            if not inner.contains_box(K):
                continue
            if n1_in_box(G, K, w) < 3:
                continue
            region = Box(c.x - l, c.y - l, c.x + k + l, c.y + k + l)
            if all(region.contains_open(G.vertices[x]) for x in pendant_of_box(G, K, w, structure)):
                found.append(c)
    return found


def peel(G: GeometricGraph) -> GeometricGraph:
    """Remove every leaf simultaneously; stable ids follow the survivors."""
    keep = [v for v in range(G.vertex_count) if G.degree(v) != 1]
    remap = {old: new for new, old in enumerate(keep)}
    edges = tuple((remap[u], remap[v]) for u, v in G.edges if u in remap and v in remap)
    return GeometricGraph(
        vertices=tuple(G.vertices[v] for v in keep),
        edges=edges,
        oriented=G.oriented,
        ids=tuple(G.ids[v] for v in keep),
    )


def peeling_depth(G: GeometricGraph, v: int, max_iter: int) -> Union[int, PeelOutcome]:
    """Number of peels after which v is gone, or NotRemoved within max_iter peels.

    Leaves go simultaneously, so a path with three edges empties after two peels
    and its two middle vertices have depth 2. On a path of three vertices the
    first peel leaves the middle vertex isolated; an isolated vertex is not a
    leaf, so it stays and the answer is NotRemoved.
    """
    label = G.ids[v]
    current = G
    for n in range(1, max_iter + 1):
        peeled = peel(current)
        if label not in set(peeled.ids):
            return n
        if peeled.vertex_count == current.vertex_count:
            break
        current = peeled
    return PeelOutcome.NOT_REMOVED


def peeling_depths(G: GeometricGraph, max_iter: Optional[int] = None) -> Dict[int, Union[int, PeelOutcome]]:
    """Peeling depth of every vertex index in one pass over shrinking degrees."""
    deg = [G.degree(v) for v in range(G.vertex_count)]
    alive = [True] * G.vertex_count
    depth: Dict[int, Union[int, PeelOutcome]] = {}
    frontier = [v for v in range(G.vertex_count) if deg[v] == 1]
    rounds = 0
    while frontier and (max_iter is None or rounds < max_iter):
        rounds += 1
        removed = set(frontier)
        touched = set()
        for v in frontier:
            depth[v] = rounds
            alive[v] = False
        for v in frontier:
            for u, _ in G.incidence[v]:
                if alive[u]:
                    deg[u] -= 1
                    touched.add(u)
        frontier = sorted(u for u in touched if deg[u] == 1 and u not in removed)
    for v in range(G.vertex_count):
        depth.setdefault(v, PeelOutcome.NOT_REMOVED)
    return depth


def forward_vertices(G: GeometricGraph, v: int) -> List[int]:
    succ = G.successors
    path = [v]
    seen = {v}
    while succ[path[-1]] is not None:
        nxt = succ[path[-1]]
        if nxt in seen:
            raise ForestError(f"Directed cycle through vertex {nxt}")
        seen.add(nxt)
        path.append(nxt)
    return path


def forward_path(G: GeometricGraph, v: int) -> Polyline:
    path = forward_vertices(G, v)
    if len(path) < 2:
        raise ForestError(f"Vertex {v} has no successor")
    return Polyline(tuple(G.vertices[x] for x in path))
