"""
Planar Forest Ends - Analysis API
HTTP access to model generation, graph analysis, corridor reports and rendering
"""

import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel, Field

from .corridor import analyze_corridor
from .forest import GeometricGraph, WindowSpec
from .experiment_orchestrator import (
    AnalysisToggles,
    ModelConfig,
    WindowConfig,
    analyze_graph,
    build_model,
    corridor_outline,
)
from .generators import graph_union
from .interchange import GraphDocument, from_document, to_document
from .render_engine import GRAPH_LAYERS, render_svg

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Planar Forest Ends API",
    description="Stationary planar random forests: generation, ends classification and corridors",
    version="1.0.0"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class GenerateRequest(BaseModel):
    model: ModelConfig = Field(default_factory=ModelConfig)
    seed: int = 0


class AnalyzeRequest(BaseModel):
    graph: GraphDocument
    window: WindowConfig = Field(default_factory=WindowConfig)
    analysis: AnalysisToggles = Field(default_factory=AnalysisToggles)
    forest_expected: bool = True


class CorridorRequest(BaseModel):
    graph: GraphDocument
    window: WindowConfig = Field(default_factory=WindowConfig)
    k: int = 4
    l: int = 6


class RenderLayer(BaseModel):
    name: str = "primal"
    graph: GraphDocument


class RenderRequest(BaseModel):
    graph: Optional[GraphDocument] = None
    layer: str = "primal"
    layers: List[RenderLayer] = Field(default_factory=list)
    window: Optional[WindowConfig] = None
    k: Optional[int] = None
    l: Optional[int] = None


def _window(G: GeometricGraph, window: WindowConfig) -> WindowSpec:
    """Window with its origin defaulting to the lattice point nearest the bounding-box centre."""
    if window.origin is None and G.vertex_count:
        xs = [p.x for p in G.vertices]
        ys = [p.y for p in G.vertices]
        window = window.model_copy(update={"origin": (str((min(xs) + max(xs)) // 2),
                                                      str((min(ys) + max(ys)) // 2))})
    return window.to_window(ModelConfig())


@app.get("/")
async def root():
    return {
        "service": "Planar Forest Ends API",
        "version": "1.0.0",
        "endpoints": ["/health", "/generate", "/analyze", "/corridor", "/render"],
    }


@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": "forestends"}


@app.post("/generate")
async def generate(request: GenerateRequest) -> Dict[str, Any]:
    """Generate one sample of a model and return it as a graph document"""
    try:
        G, _ = build_model(request.model, request.seed)
        return to_document(G).model_dump(mode="json")
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.exception("Generation failed")
        raise HTTPException(status_code=500, detail=f"Generation failed: {str(e)}")


@app.post("/analyze")
async def analyze(request: AnalyzeRequest) -> Dict[str, Any]:
    try:
        G = from_document(request.graph)
        row, report = analyze_graph(G, request.analysis, _window(G, request.window),
                                    forest_expected=request.forest_expected)
        return {"stats": row.columns(), "corridor": report.to_dict() if report else None}
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.exception("Analysis failed")
        raise HTTPException(status_code=500, detail=f"Analysis failed: {str(e)}")


@app.post("/corridor")
async def corridor(request: CorridorRequest) -> Dict[str, Any]:
    """Doors, their order and the traces of two-ended components"""
    try:
        G = from_document(request.graph)
        return analyze_corridor(G, request.k, request.l, _window(G, request.window)).to_dict()
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.exception("Corridor analysis failed")
        raise HTTPException(status_code=500, detail=f"Corridor analysis failed: {str(e)}")


@app.post("/render")
async def render(request: RenderRequest):
    try:
        layers = [(part.name, from_document(part.graph)) for part in request.layers]
        if request.graph is not None:
            layers.insert(0, (request.layer, from_document(request.graph)))
        if not layers:
            raise ValueError("Nothing to render: give a graph or layers")
        unknown = [name for name, _ in layers if name not in GRAPH_LAYERS]
        if unknown:
            raise ValueError(f"Unknown layers {unknown}")
        window = None
        doors = ()
        outline = None
        if request.window is not None:
            G = layers[0][1] if len(layers) == 1 else graph_union([graph for _, graph in layers])
            window = _window(G, request.window)
            if request.k is not None and request.l is not None:
                report = analyze_corridor(G, request.k, request.l, window)
                doors, outline = report.doors, corridor_outline(report)
        svg = render_svg(layers, window, doors, outline)
        return Response(content=svg, media_type="image/svg+xml")
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except Exception as e:
        logger.exception("Rendering failed")
        raise HTTPException(status_code=500, detail=f"Rendering failed: {str(e)}")
