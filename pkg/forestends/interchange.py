"""
Planar Forest Ends - Graph Interchange
Versioned JSON documents for geometric graphs with exact rational coordinates.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import List, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from .forest import ForestError, GeometricGraph
from .geometry import Point, coord

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class InterchangeError(ValueError):
    """Raised when a graph document cannot be read."""


class GraphDocument(BaseModel):
    """Vertices as [x_num, x_den, y_num, y_den]; edges as index pairs."""
    version: int = FORMAT_VERSION
    oriented: bool = False
    vertices: List[Tuple[int, int, int, int]] = Field(default_factory=list)
    edges: List[Tuple[int, int]] = Field(default_factory=list)

    @field_validator("version")
    @classmethod
    def known_version(cls, value: int) -> int:
        if value != FORMAT_VERSION:
            raise ValueError(f"Unsupported graph document version {value}")
        return value

    @field_validator("vertices")
    @classmethod
    def positive_denominators(cls, value):
        for row in value:
            if row[1] <= 0 or row[3] <= 0:
                raise ValueError(f"Denominators must be positive: {list(row)}")
        return value


def to_document(G: GeometricGraph) -> GraphDocument:
    rows = []
    for p in G.vertices:
        x, y = Fraction(p.x), Fraction(p.y)
        rows.append((x.numerator, x.denominator, y.numerator, y.denominator))
    return GraphDocument(oriented=G.oriented, vertices=rows, edges=list(G.edges))


def from_document(doc: GraphDocument) -> GeometricGraph:
    vertices = tuple(Point(coord(Fraction(xn, xd)), coord(Fraction(yn, yd))) for xn, xd, yn, yd in doc.vertices)
    try:
        return GeometricGraph(vertices, tuple(tuple(e) for e in doc.edges), doc.oriented)
    except ForestError as e:
        raise InterchangeError(f"Invalid graph document: {e}")


def dumps_graph(G: GeometricGraph) -> str:
    doc = to_document(G)
    return json.dumps(doc.model_dump(mode="json"), separators=(",", ":")) + "\n"


def loads_graph(text: Union[str, bytes]) -> GeometricGraph:
    try:
        doc = GraphDocument.model_validate_json(text)
    except ValidationError as e:
        raise InterchangeError(f"Malformed graph document: {e.error_count()} errors") from e
    return from_document(doc)


def save_graph(G: GeometricGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_graph(G))
    logger.debug("Saved graph with %d vertices to %s", G.vertex_count, path)
    return path


def load_graph(path: Union[str, Path]) -> GeometricGraph:
    path = Path(path)
    if not path.exists():
        raise InterchangeError(f"Graph file not found: {path}")
    return loads_graph(path.read_text())
