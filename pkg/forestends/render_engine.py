"""
Planar Forest Ends - SVG Render Engine
Layered vector drawings of geometric graphs, windows, doors and corridors.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from jinja2 import Environment

from .corridor import Door
from .forest import GeometricGraph, WindowSpec
from .geometry import Box, Point

logger = logging.getLogger(__name__)

# frozen names and drawing order
LAYER_ORDER = ("corridor", "window", "iso", "dual", "primal", "drainage", "peel", "contour",
               "doors", "door-segments")

GRAPH_LAYERS = ("primal", "dual", "contour", "peel", "iso", "drainage")

LAYER_STYLES: Dict[str, str] = {
    "primal": 'stroke="#000000" stroke-width="1.5" fill="none"',
    "dual": 'stroke="#888888" stroke-width="1" stroke-dasharray="1,3" fill="none"',
    "contour": 'stroke="#cc0000" stroke-width="1" fill="none"',
    "peel": 'stroke="#2255aa" stroke-width="1" fill="none"',
    "iso": 'fill="#444444" stroke="none"',
    "drainage": 'stroke="#1a6b3c" stroke-width="1" fill="none" marker-end="url(#arrow)"',
    "doors": 'stroke="#e08000" stroke-width="2.5" fill="none"',
    "door-segments": 'stroke="#e08000" stroke-width="3" stroke-dasharray="4,2" fill="none"',
    "corridor": 'fill="url(#hatch)" stroke="#888888" stroke-width="0.5"',
    "window": 'stroke="#3366cc" stroke-width="0.75" stroke-dasharray="6,3" fill="none"',
}

SVG_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{{ width }}" height="{{ height }}" viewBox="0 0 {{ width }} {{ height }}">
<defs>
<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="#aaaaaa" stroke-width="2"/></pattern>
<marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="4" markerHeight="4" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#1a6b3c"/></marker>
</defs>
<rect width="{{ width }}" height="{{ height }}" fill="#ffffff"/>
{% for layer in layers %}
<g id="{{ layer.name }}" {{ layer.style }}>
{% for item in layer.items %}
{% if item.kind == "line" %}
<line x1="{{ item.coords[0] }}" y1="{{ item.coords[1] }}" x2="{{ item.coords[2] }}" y2="{{ item.coords[3] }}"/>
{% elif item.kind == "dot" %}
<circle cx="{{ item.coords[0] }}" cy="{{ item.coords[1] }}" r="{{ dot_radius }}"/>
{% elif item.kind == "polyline" %}
<polyline points="{{ item.coords | join(' ') }}"/>
{% else %}
<polygon points="{{ item.coords | join(' ') }}"/>
{% endif %}
{% endfor %}
</g>
{% endfor %}
</svg>
"""

_environment = Environment(trim_blocks=True, lstrip_blocks=True, autoescape=False)
_template = _environment.from_string(SVG_TEMPLATE)


@dataclass
class _Item:
    kind: str
    coords: List[str]


@dataclass
class _Layer:
    name: str
    style: str
    items: List[_Item]


class RenderEngine:
    """Maps exact coordinates to a y-flipped canvas with fixed-precision numbers."""

    def __init__(self, scale: int = 10, padding: int = 10, precision: int = 2):
        self.scale = scale
        self.padding = padding
        self.precision = precision
        self.bounds = Box(0, 0, 1, 1)

    def _fit(self, points: Sequence[Point]) -> None:
        if not points:
            self.bounds = Box(0, 0, 1, 1)
            return
        xs = [p.x for p in points]
        ys = [p.y for p in points]
        xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
        self.bounds = Box(xmin, ymin, xmax if xmax > xmin else xmin + 1, ymax if ymax > ymin else ymin + 1)

    def _num(self, value: float) -> str:
        return f"{value:.{self.precision}f}"

    def _xy(self, p: Point) -> Tuple[str, str]:
        x = float(p.x - self.bounds.xmin) * self.scale + self.padding
        y = float(self.bounds.ymax - p.y) * self.scale + self.padding
        return self._num(x), self._num(y)

    def _pair(self, p: Point) -> str:
        return ",".join(self._xy(p))

    def _graph_items(self, G: GeometricGraph) -> List[_Item]:
        items = []
        edge_ids = range(len(G.edges)) if G.oriented else G.undirected_edge_ids
        touched = set()
        for eid in edge_ids:
            u, v = G.edges[eid]
            touched.update((u, v))
            items.append(_Item("line", [*self._xy(G.vertices[u]), *self._xy(G.vertices[v])]))
        for v, p in enumerate(G.vertices):
            if v not in touched:
                items.append(_Item("dot", list(self._xy(p))))
        return items

    def render(self, graphs: Sequence[Tuple[str, GeometricGraph]],
               window: Optional[WindowSpec] = None,
               doors: Sequence[Door] = (),
               corridor: Optional[Sequence[Point]] = None) -> str:
        unknown = [name for name, _ in graphs if name not in GRAPH_LAYERS]
        if unknown:
            raise ValueError(f"Unknown graph layer names: {unknown}")

        points: List[Point] = [p for _, G in graphs for p in G.vertices]
        if window is not None:
            points.extend(window.outer_box.corners())
        for door in doors:
            points.extend(door.germ1.vertices + door.germ2.vertices)
        if corridor:
            points.extend(corridor)
        self._fit(points)

        contents: Dict[str, List[_Item]] = {}
        for name, G in graphs:
            contents.setdefault(name, []).extend(self._graph_items(G))
        if window is not None:
            contents["window"] = [_Item("polygon", [self._pair(p) for p in box.corners()])
                                  for box in (window.inner_box, window.outer_box)]
        if doors:
            contents["doors"] = [_Item("polyline", [self._pair(p) for p in germ.vertices])
                                 for door in doors for germ in (door.germ1, door.germ2)]
            contents["door-segments"] = [_Item("line", [*self._xy(d.door_segment.a), *self._xy(d.door_segment.b)])
                                         for d in doors]
        if corridor:
            contents["corridor"] = [_Item("polygon", [self._pair(p) for p in corridor])]

        layers = [_Layer(name, LAYER_STYLES[name], contents[name]) for name in LAYER_ORDER if name in contents]
        width = self._num(float(self.bounds.xmax - self.bounds.xmin) * self.scale + 2 * self.padding)
        height = self._num(float(self.bounds.ymax - self.bounds.ymin) * self.scale + 2 * self.padding)
        logger.debug("Rendering %d layers", len(layers))
        return _template.render(width=width, height=height, layers=layers,
                                dot_radius=self._num(self.scale / 6))


def render_svg(graphs: Sequence[Tuple[str, GeometricGraph]],
               window: Optional[WindowSpec] = None,
               doors: Sequence[Door] = (),
               corridor: Optional[Sequence[Point]] = None,
               scale: int = 10) -> str:
    return RenderEngine(scale=scale).render(graphs, window, doors, corridor)
