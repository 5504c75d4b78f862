"""
Planar Forest Ends - Model Generators
Grid uniform spanning trees, dual trees, contours, peeling layers,
drainage networks, isolated points, unions and deterministic corridor fixtures.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .forest import (
    ForestError,
    GeometricGraph,
    PeelOutcome,
    WindowSpec,
    peeling_depths,
    validate_planarity,
)
from .geometry import Coord, Point, coord

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

# corners of the unit square in counterclockwise order; neighbours differ in one coordinate
CORNER_SIGNS = ((-1, -1), (1, -1), (1, 1), (-1, 1))


class GeneratorError(ValueError):
    """Raised when a generator precondition fails or a union is not planar."""


class Boundary(str, Enum):
    WIRED = "wired"
    FREE = "free"


class TieBreak(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    origin: Point = Point(0, 0)

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise GeneratorError(f"Grid must be at least 2x2, got {self.width}x{self.height}")

    @property
    def vertex_count(self) -> int:
        return self.width * self.height

    def index(self, i: int, j: int) -> int:
        return j * self.width + i

    def point(self, i: int, j: int) -> Point:
        return self.origin + Point(i, j)

    def points(self) -> Tuple[Point, ...]:
        return tuple(self.point(i, j) for j in range(self.height) for i in range(self.width))

    def center(self) -> Point:
        return self.point(self.width // 2, self.height // 2)

    def neighbours(self, i: int, j: int) -> List[int]:
        out = []
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            a, b = i + di, j + dj
            if 0 <= a < self.width and 0 <= b < self.height:
                out.append(self.index(a, b))
        return out

    def boundary_cycle(self) -> List[int]:
        m, h = self.width, self.height
        cycle = [self.index(i, 0) for i in range(m)]
        cycle += [self.index(m - 1, j) for j in range(1, h)]
        cycle += [self.index(i, h - 1) for i in range(m - 2, -1, -1)]
        cycle += [self.index(0, j) for j in range(h - 2, 0, -1)]
        return cycle


@dataclass(frozen=True)
class PhiSchedule:
    """Peeling depths phi(4), phi(5), ...; strictly increasing."""
    phi: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(int(x) for x in self.phi))
        if not self.phi:
            raise GeneratorError("Schedule needs at least phi(4)")
        if self.phi[0] < 0 or any(b <= a for a, b in zip(self.phi, self.phi[1:])):
            raise GeneratorError(f"Schedule must be nonnegative and strictly increasing: {self.phi}")

    @property
    def n_max(self) -> int:
        return 3 + len(self.phi)

    def value(self, n: int) -> int:
        if not 4 <= n <= self.n_max:
            raise GeneratorError(f"phi({n}) undefined for n_max={self.n_max}")
        return self.phi[n - 4]


@dataclass(frozen=True)
class DrainageSpec:
    width: int
    height: int
    p: Coord
    tie_break: TieBreak = TieBreak.RIGHT
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p", coord(self.p))
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))
        if not 0 < self.p <= 1:
            raise GeneratorError(f"Open probability must lie in (0, 1], got {self.p}")
        if self.width < 1 or self.height < 1:
            raise GeneratorError("Drainage region must be nonempty")


class EndsTriple(NamedTuple):
    """Infinite-volume counts of finite, one-ended and two-ended components."""
    n0: float
    n1: float
    n2: float


class _UniformBuffer:
    """Batched uniform draws from a seeded numpy Generator."""

    def __init__(self, rng: np.random.Generator, batch: int = 4096):
        self.rng = rng
        self.batch = batch
        self.values = rng.random(batch)
        self.pos = 0

    def choice(self, k: int) -> int:
        if self.pos == self.batch:
            self.values = self.rng.random(self.batch)
            self.pos = 0
        u = self.values[self.pos]
        self.pos += 1
        return min(int(u * k), k - 1)


def _normalized(edges) -> Tuple[Tuple[int, int], ...]:
    return tuple(sorted((min(u, v), max(u, v)) for u, v in edges))


def lattice_graph(spec: GridSpec) -> GeometricGraph:
    """Every nearest-neighbour edge of the grid."""
    edges = []
    for j in range(spec.height):
        for i in range(spec.width):
            if i + 1 < spec.width:
                edges.append((spec.index(i, j), spec.index(i + 1, j)))
            if j + 1 < spec.height:
                edges.append((spec.index(i, j), spec.index(i, j + 1)))
    return GeometricGraph(spec.points(), _normalized(edges))


def ust_wilson(spec: GridSpec, seed: int, boundary: Boundary = Boundary.WIRED) -> GeometricGraph:
    """Uniform spanning tree of the grid by loop-erased random walks."""
    n = spec.vertex_count
    draws = _UniformBuffer(np.random.default_rng(seed))
    nbrs = [spec.neighbours(i, j) for j in range(spec.height) for i in range(spec.width)]
    in_tree = [False] * n
    nxt = [-1] * n
    edges: List[Tuple[int, int]] = []

    if Boundary(boundary) == Boundary.WIRED:
        cycle = spec.boundary_cycle()
        cut = draws.choice(len(cycle))
        path = cycle[cut + 1:] + cycle[:cut + 1]
        for a, b in zip(path, path[1:]):
            edges.append((a, b))
        for v in path:
            in_tree[v] = True
    else:
        in_tree[draws.choice(n)] = True

    for start in range(n):
        u = start
        while not in_tree[u]:
            nxt[u] = nbrs[u][draws.choice(len(nbrs[u]))]
            u = nxt[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            edges.append((u, nxt[u]))
            u = nxt[u]

    logger.debug("UST %dx%d seed=%s boundary=%s", spec.width, spec.height, seed, boundary)
    return GeometricGraph(spec.points(), _normalized(edges))


def _edge_pairs(G: GeometricGraph) -> set:
    pairs = set()
    for u, v in G.edges:
        pairs.add((G.vertices[u], G.vertices[v]))
        pairs.add((G.vertices[v], G.vertices[u]))
    return pairs


def dual_tree(ust: GeometricGraph, spec: GridSpec) -> GeometricGraph:
    """Dual graph on interior faces keeping the dual edges no primal edge crosses."""
    if ust.vertex_count != spec.vertex_count:
        raise GeneratorError("Primal tree does not match the grid")
    primal = _edge_pairs(ust)
    fw, fh = spec.width - 1, spec.height - 1
    vertices = tuple(spec.origin + Point(i + HALF, j + HALF) for j in range(fh) for i in range(fw))
    edges = []
    for j in range(fh):
        for i in range(fw):
            here = j * fw + i
            if i + 1 < fw and (spec.point(i + 1, j), spec.point(i + 1, j + 1)) not in primal:
                edges.append((here, here + 1))
            if j + 1 < fh and (spec.point(i, j + 1), spec.point(i + 1, j + 1)) not in primal:
                edges.append((here, here + fw))
    return GeometricGraph(vertices, _normalized(edges))


def contour(Z: GeometricGraph, eps: Coord) -> GeometricGraph:
    """Contour at distance eps of a subgraph of the unit lattice."""
    eps = coord(eps)
    if not 0 < eps < HALF:
        raise GeneratorError(f"Contour distance must lie in (0, 1/2), got {eps}")
    for p in Z.vertices:
        if not (isinstance(p.x, int) and isinstance(p.y, int)):
            raise GeneratorError(f"Contour input vertex {p} is not a lattice point")
    present = _edge_pairs(Z)
    for a, b in present:
        if abs(a.x - b.x) + abs(a.y - b.y) != 1:
            raise GeneratorError(f"Contour input edge {a}-{b} is not a unit lattice edge")

    lattice = sorted(Z.vertices)
    corner: Dict[Tuple[Point, Tuple[int, int]], int] = {}
    vertices = []
    for v in lattice:
        for sign in CORNER_SIGNS:
            corner[(v, sign)] = len(vertices)
            vertices.append(v + Point(eps * sign[0], eps * sign[1]))

    edges = []
    for v in lattice:
        for k, d in enumerate(CORNER_SIGNS):
            d2 = CORNER_SIGNS[(k + 1) % 4]
            side = Point((d[0] + d2[0]) // 2, (d[1] + d2[1]) // 2)
            if (v, v + side) not in present:
                edges.append((corner[(v, d)], corner[(v, d2)]))
    for eid in Z.undirected_edge_ids:
        u, w = Z.edges[eid]
        v, v2 = Z.vertices[u], Z.vertices[w]
        step = v2 - v
        for d in CORNER_SIGNS:
            d2 = (d[0] - 2 * step.x, d[1] - 2 * step.y)
            if d2 in CORNER_SIGNS:
                edges.append((corner[(v, d)], corner[(v2, d2)]))
    return GeometricGraph(tuple(vertices), _normalized(edges))


def induced_subgraph(G: GeometricGraph, keep) -> GeometricGraph:
    keep = sorted(set(keep))
    remap = {old: new for new, old in enumerate(keep)}
    edges = tuple((remap[u], remap[v]) for u, v in G.edges if u in remap and v in remap)
    return GeometricGraph(tuple(G.vertices[v] for v in keep), edges, G.oriented,
                          tuple(G.ids[v] for v in keep))


def peeled_to(G: GeometricGraph, rounds: int, depths=None) -> GeometricGraph:
    """Peel^rounds(G) read off the peeling depths."""
    depths = depths if depths is not None else peeling_depths(G)
    keep = [v for v, d in depths.items() if d == PeelOutcome.NOT_REMOVED or d > rounds]
    return induced_subgraph(G, keep)


def phi_schedule_from_depths(depths: Sequence[Union[int, PeelOutcome]],
                             n_max: Optional[int] = None) -> PhiSchedule:
    """Smallest phi(n) with empirical P[d > phi(n)] <= 2^-(n-3), forced increasing."""
    samples = len(depths)
    if samples == 0:
        raise GeneratorError("No peeling depths to build a schedule from")
    never = sum(1 for d in depths if d == PeelOutcome.NOT_REMOVED)
    finite = sorted((int(d) for d in depths if d != PeelOutcome.NOT_REMOVED), reverse=True)
    phi: List[int] = []
    n = 4
    while n_max is None or n <= n_max:
        allowed = math.floor(Fraction(samples, 2 ** (n - 3))) - never
        if allowed < 0:
            break
        t = finite[allowed] if allowed < len(finite) else 0
        if phi:
            t = max(t, phi[-1] + 1)
        phi.append(t)
        exceed = never + sum(1 for d in finite if d > t)
        if exceed == 0:
            break
        n += 1
    if not phi:
        raise GeneratorError("Too many vertices survive peeling to satisfy phi(4)")
    return PhiSchedule(tuple(phi))


def g_phi(ust: GeometricGraph, sched: PhiSchedule, check: bool = True) -> GeometricGraph:
    """Union over n of the contours at distance 1/n of Peel^phi(n)(ust)."""
    depths = peeling_depths(ust)
    layers = []
    for n in range(4, sched.n_max + 1):
        core = peeled_to(ust, sched.value(n), depths)
        if core.vertex_count == 0:
            continue
        layers.append(contour(core, Fraction(1, n)))
    if not layers:
        return GeometricGraph.empty()
    return graph_union(layers, check=check)


def drainage_grs(spec: DrainageSpec) -> GeometricGraph:
    """Each open site points to the nearest open site of the next row."""
    rng = np.random.default_rng(spec.seed)
    is_open = rng.random((spec.height, spec.width)) < float(spec.p)
    rows = [np.flatnonzero(is_open[y]) for y in range(spec.height)]
    offsets = np.concatenate(([0], np.cumsum([len(r) for r in rows])))

    vertices = [Point(int(x), y) for y in range(spec.height) for x in rows[y]]
    edges = []
    for y in range(spec.height - 1):
        xs, up = rows[y], rows[y + 1]
        if len(xs) == 0 or len(up) == 0:
            continue
        pos = np.searchsorted(up, xs, side="left")
        right = np.minimum(pos, len(up) - 1)
        left = np.maximum(pos - 1, 0)
        d_right = np.abs(up[right] - xs)
        d_left = np.abs(xs - up[left])
        if spec.tie_break == TieBreak.RIGHT:
            target = np.where(d_right <= d_left, right, left)
        else:
            target = np.where(d_left <= d_right, left, right)
        for k in range(len(xs)):
            edges.append((int(offsets[y] + k), int(offsets[y + 1] + target[k])))

    logger.debug("Drainage %dx%d p=%s seed=%s: %d sites",
                 spec.width, spec.height, spec.p, spec.seed, len(vertices))
    return GeometricGraph(tuple(vertices), tuple(edges), oriented=True)


def drainage_successors(G: GeometricGraph) -> Dict[int, List[Tuple[Coord, Coord]]]:
    """Per row y: (x, target x) pairs sorted by x."""
    rows: Dict[int, List[Tuple[Coord, Coord]]] = {}
    for u, v in G.edges:
        a, b = G.vertices[u], G.vertices[v]
        rows.setdefault(a.y, []).append((a.x, b.x))
    return {y: sorted(pairs) for y, pairs in sorted(rows.items())}


def drainage_intensity_bound(G: GeometricGraph, p: Coord) -> float:
    """p * pi * E[(sqrt(2) + |outgoing edge|)^2] over sites with a successor."""
    if not G.edges:
        return 0.0
    lengths = np.array([math.hypot(*(G.vertices[v] - G.vertices[u]).as_floats()) for u, v in G.edges])
    return float(float(p) * math.pi * np.mean((math.sqrt(2) + lengths) ** 2))


def iso_points(spec: GridSpec) -> GeometricGraph:
    shift = Point(THIRD, THIRD)
    return GeometricGraph(tuple(p + shift for p in spec.points()), ())


def graph_union(gs: Sequence[GeometricGraph], check: bool = True) -> GeometricGraph:
    if not gs:
        raise GeneratorError("Union of no graphs")
    vertices: List[Point] = []
    edges: List[Tuple[int, int]] = []
    for g in gs:
        base = len(vertices)
        vertices.extend(g.vertices)
        edges.extend((u + base, v + base) for u, v in g.edges)
    try:
        union = GeometricGraph(tuple(vertices), tuple(edges), all(g.oriented for g in gs))
    except ForestError as e:
        raise GeneratorError(f"Layers cannot be merged: {e}")
    if check:
        violations = validate_planarity(union)
        if violations:
            raise GeneratorError(f"ImproperIntersection between layers: {len(violations)} edge pairs")
    return union


LAYER_NAMES = ("ust", "dual", "contour", "iso")

# drawing layer of each part
DRAWING_LAYER = {"ust": "primal", "dual": "dual", "contour": "contour", "iso": "iso"}


def layered_parts(spec: GridSpec, seed: int, layers: Sequence[str],
                  eps: Sequence[Coord] = (Fraction(1, 4),),
                  boundary: Boundary = Boundary.WIRED) -> List[Tuple[str, GeometricGraph]]:
    """Named parts of a layered model: the UST, its dual, its contours and isolated points."""
    unknown = [name for name in layers if name not in LAYER_NAMES]
    if unknown or not layers:
        raise GeneratorError(f"Unknown or empty layer list: {list(layers)}")
    ust = ust_wilson(spec, seed, boundary)
    parts = []
    for name in layers:
        if name == "ust":
            parts.append((name, ust))
        elif name == "dual":
            parts.append((name, dual_tree(ust, spec)))
        elif name == "contour":
            parts.extend((name, contour(ust, e)) for e in eps)
        else:
            parts.append((name, iso_points(spec)))
    return parts


def layered_model(spec: GridSpec, seed: int, layers: Sequence[str],
                  eps: Sequence[Coord] = (Fraction(1, 4),),
                  boundary: Boundary = Boundary.WIRED) -> GeometricGraph:
    """Finite union of a UST with its dual, its contours and isolated points."""
    return graph_union([G for _, G in layered_parts(spec, seed, layers, eps, boundary)])


def predicted_ends_triple(layers: Sequence[str], contour_count: int = 1) -> EndsTriple:
    """Infinite-lattice component census of a layered union."""
    n0 = math.inf if "iso" in layers else 0
    n1 = ("ust" in layers) + ("dual" in layers)
    n2 = contour_count if "contour" in layers else 0
    return EndsTriple(n0, n1, n2)


def fixture_corridor(L: int, teeth: bool = True) -> GeometricGraph:
    """Two combs facing each other across a straight two-ended path.

    Each comb hangs from a backbone one row inside the window, capped one unit
    short of the left side, so it leaves the window through the right side only.
    Three-site blocks sit at distance 3 from the middle path, each joined to the
    backbone by a vertical riser through its centre; optional unit teeth point
    towards the path at even x.

    The straight capped paths of `fixture_capped_paths` admit a door only next
    to their capped end: the pendant tree of any other k-box runs back along the
    path to the cap and leaves the l-box. The risers keep pendants within a few
    units of each block, so doors repeat along the corridor.
    """
    if L < 8:
        raise GeneratorError(f"Corridor fixture needs L >= 8, got {L}")
    edge_set = set()

    def add_path(points: List[Tuple[int, int]]):
        for a, b in zip(points, points[1:]):
            edge_set.add((min(a, b), max(a, b)))

    add_path([(x, 0) for x in range(-L, L + 1)])
    for side in (1, -1):
        add_path([(x, side * (L - 1)) for x in range(-L + 1, L + 1)])
        for r in range(-L + 1, L):
            if r % 3 != 0:
                continue
            add_path([(r, side * y) for y in range(3, L)])
            block = [x for x in range(r - 1, r + 2) if -L + 1 <= x <= L - 1]
            add_path([(x, side * 3) for x in block])
            if teeth:
                for x in block:
                    if x % 2 == 0:
                        add_path([(x, side * 3), (x, side * 2)])

    points = sorted({p for e in edge_set for p in e})
    index = {p: i for i, p in enumerate(points)}
    edges = tuple(sorted((index[a], index[b]) for a, b in edge_set))
    return GeometricGraph(tuple(Point(x, y) for x, y in points), edges)


def fixture_capped_paths(L: int, teeth: bool = True) -> GeometricGraph:
    """Paths at y = 3 and y = -3 capped one unit short of the left side, and a full path at y = 0.

    Unit teeth point from the outer paths towards the middle one at even x.
    """
    if L < 8:
        raise GeneratorError(f"Corridor fixture needs L >= 8, got {L}")
    vertices = [Point(x, 0) for x in range(-L, L + 1)]
    edges = [(i, i + 1) for i in range(2 * L)]
    for side in (1, -1):
        base = len(vertices)
        vertices.extend(Point(x, 3 * side) for x in range(-L + 1, L + 1))
        edges.extend((base + i, base + i + 1) for i in range(2 * L - 1))
        if teeth:
            for i, x in enumerate(range(-L + 1, L + 1)):
                if x % 2 == 0:
                    vertices.append(Point(x, 2 * side))
                    edges.append((base + i, len(vertices) - 1))
    return GeometricGraph(tuple(vertices), tuple(edges))


def fixture_window(L: int) -> WindowSpec:
    return WindowSpec(inner=L - 2, outer=L, origin=Point(0, 0))


def peel_depth_sample(spec: GridSpec, seeds: Sequence[int], radius: int = 0,
                      boundary: Boundary = Boundary.WIRED) -> List[Union[int, PeelOutcome]]:
    """Peeling depths of the vertices within L-infinity radius of the grid center, pooled over seeds."""
    center = spec.center()
    depths: List[Union[int, PeelOutcome]] = []
    for seed in seeds:
        tree = ust_wilson(spec, seed, boundary)
        table = peeling_depths(tree)
        depths.extend(table[v] for v, p in enumerate(tree.vertices) if (p - center).norm_inf() <= radius)
    return depths
