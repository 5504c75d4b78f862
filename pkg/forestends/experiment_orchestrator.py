"""
Planar Forest Ends - Experiment Orchestrator
Configuration, seeded replicates, per-seed statistics, aggregation,
CSV/SVG/JSON emission, the acceptance suite and timing benchmarks.
"""

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from .corridor import (
    Betweenness,
    CorridorReport,
    TopoLineFamily,
    analyze_corridor,
    axiom_summary,
    build_gamma,
    bump_family,
    linear_order,
)
from .forest import (
    GeometricGraph,
    PeelOutcome,
    WindowSpec,
    boundary_cover_count,
    chi_n,
    classify_components,
    component_census,
    edge_intensity,
    escape_degrees,
    forward_vertices,
    one_ended_trifurcations,
    trifurcation_density,
    unit_sample_boxes,
    validate_forest,
    validate_planarity,
)
from .generators import (
    DRAWING_LAYER,
    Boundary,
    DrainageSpec,
    EndsTriple,
    GridSpec,
    PhiSchedule,
    TieBreak,
    contour,
    drainage_grs,
    drainage_intensity_bound,
    dual_tree,
    fixture_corridor,
    fixture_window,
    g_phi,
    graph_union,
    iso_points,
    layered_parts,
    peel_depth_sample,
    phi_schedule_from_depths,
    predicted_ends_triple,
    ust_wilson,
)
from .geometry import Box, Coord, Point, coord
from .render_engine import render_svg

logger = logging.getLogger(__name__)

MODEL_NAMES = ("ust", "ust_dual", "layers", "g_phi", "drainage", "iso", "corridor")
FOREST_MODELS = {"ust", "ust_dual", "drainage", "iso", "corridor"}


class ConfigError(ValueError):
    """Raised when an experiment configuration cannot be read or is invalid."""


def _rational(value: Union[int, str]) -> str:
    try:
        return str(coord(value))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Not a rational number: {value!r}") from e


class ModelConfig(BaseModel):
    name: str = "ust"
    width: int = 30
    height: int = 30
    p: str = "1/2"
    tie_break: TieBreak = TieBreak.RIGHT
    layers: List[str] = Field(default_factory=lambda: ["ust", "dual"])
    eps: List[str] = Field(default_factory=lambda: ["1/4"])
    teeth: bool = True
    boundary: Boundary = Boundary.WIRED
    phi: Optional[List[int]] = None
    pilot_samples: int = 20

    @field_validator("name")
    @classmethod
    def known_model(cls, value: str) -> str:
        if value not in MODEL_NAMES:
            raise ValueError(f"Unknown model {value!r}; expected one of {', '.join(MODEL_NAMES)}")
        return value

    @field_validator("p", mode="before")
    @classmethod
    def rational_p(cls, value):
        return _rational(value)

    @field_validator("eps", mode="before")
    @classmethod
    def rational_eps(cls, value):
        return [_rational(v) for v in value]

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.width, self.height)

    def default_origin(self) -> Point:
        if self.name == "corridor":
            return Point(0, 0)
        return Point(self.width // 2, self.height // 2)


class WindowConfig(BaseModel):
    inner: str = "5"
    outer: str = "12"
    origin: Optional[Tuple[str, str]] = None

    @field_validator("inner", "outer", mode="before")
    @classmethod
    def rational_size(cls, value):
        return _rational(value)

    @field_validator("origin", mode="before")
    @classmethod
    def rational_origin(cls, value):
        if value is None:
            return None
        return tuple(_rational(v) for v in value)

    def to_window(self, model: ModelConfig) -> WindowSpec:
        if self.origin is None:
            origin = model.default_origin()
        else:
            origin = Point(coord(self.origin[0]), coord(self.origin[1]))
        return WindowSpec(coord(self.inner), coord(self.outer), origin)


class SeedConfig(BaseModel):
    count: int = Field(default=10, ge=1)
    master: int = Field(default=20240601, ge=0)


class DoorToggles(BaseModel):
    k: int = 4
    l: int = 6


class AnalysisToggles(BaseModel):
    validate_graph: bool = Field(default=True, alias="validate")
    intensity: bool = True
    chi_n: List[int] = Field(default_factory=lambda: [5, 10])
    classify: bool = True
    trifurcations: bool = False
    doors: Optional[DoorToggles] = None

    model_config = {"populate_by_name": True}


class OutputConfig(BaseModel):
    stats_path: str = "results/stats.csv"
    svg_path: Optional[str] = None
    report_path: Optional[str] = None


class ExperimentConfig(BaseModel):
    model: ModelConfig = Field(default_factory=ModelConfig)
    window: WindowConfig = Field(default_factory=WindowConfig)
    seeds: SeedConfig = Field(default_factory=SeedConfig)
    analysis: AnalysisToggles = Field(default_factory=AnalysisToggles)
    output: OutputConfig = Field(default_factory=OutputConfig)
    workers: int = Field(default=1, ge=1)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        return ExperimentConfig.model_validate_json(path.read_text())
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {e}") from e


def replicate_seed(master: int, k: int) -> int:
    """Seed of replicate k, derivable without running replicates 0..k-1."""
    return int(np.random.SeedSequence(entropy=master, spawn_key=(k,)).generate_state(1)[0])


def build_model(model: ModelConfig, seed: int) -> Tuple[GeometricGraph, List[Tuple[str, GeometricGraph]]]:
    """The model graph and its named drawing layers."""
    if model.name == "ust":
        tree = ust_wilson(model.grid, seed, model.boundary)
        return tree, [("primal", tree)]
    if model.name == "ust_dual":
        tree = ust_wilson(model.grid, seed, model.boundary)
        dual = dual_tree(tree, model.grid)
        return graph_union([tree, dual]), [("primal", tree), ("dual", dual)]
    if model.name == "layers":
        parts = layered_parts(model.grid, seed, model.layers, [coord(e) for e in model.eps], model.boundary)
        return graph_union([G for _, G in parts]), [(DRAWING_LAYER[name], G) for name, G in parts]
    if model.name == "g_phi":
        tree = ust_wilson(model.grid, seed, model.boundary)
        if model.phi:
            sched = PhiSchedule(tuple(model.phi))
        else:
            pilot = [replicate_seed(seed, k) for k in range(model.pilot_samples)]
            sched = phi_schedule_from_depths(peel_depth_sample(model.grid, pilot, boundary=model.boundary))
        layer = g_phi(tree, sched)
        return layer, [("primal", tree), ("contour", layer)]
    if model.name == "drainage":
        G = drainage_grs(DrainageSpec(model.width, model.height, coord(model.p), model.tie_break, seed))
        return G, [("drainage", G)]
    if model.name == "iso":
        G = iso_points(model.grid)
        return G, [("iso", G)]
    G = fixture_corridor(model.width // 2, model.teeth)
    return G, [("primal", G)]


def predicted_census(model: ModelConfig) -> Optional[EndsTriple]:
    """Infinite-lattice (n0, n1, n2) of the models built from UST layers."""
    layers = {"ust": ["ust"], "ust_dual": ["ust", "dual"], "layers": model.layers, "iso": ["iso"]}.get(model.name)
    if layers is None:
        return None
    return predicted_ends_triple(layers, len(model.eps))


class StatsRow(BaseModel):
    seed_index: int
    seed: int
    model: str
    valid: bool = True
    planarity_violations: int = 0
    forest_ok: bool = True
    lambda_hat: Optional[float] = None
    lambda_bound: Optional[float] = None
    chi: Dict[int, int] = Field(default_factory=dict)
    chi_bound: Dict[int, float] = Field(default_factory=dict)
    chi_cover: Dict[int, int] = Field(default_factory=dict)
    n0: int = 0
    n1: int = 0
    n2: int = 0
    n3plus: int = 0
    trifurcation_density: Optional[float] = None
    one_ended_trifurcations: Optional[int] = None
    door_count: int = 0
    convex_traces: int = 0
    two_ended_traces: int = 0

    def columns(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "seed_index": self.seed_index,
            "seed": self.seed,
            "model": self.model,
            "valid": int(self.valid),
            "planarity_violations": self.planarity_violations,
            "forest_ok": int(self.forest_ok),
            "lambda_hat": self.lambda_hat,
            "lambda_bound": self.lambda_bound,
        }
        for n in sorted(self.chi):
            out[f"chi_{n}"] = self.chi[n]
            out[f"chi_bound_{n}"] = self.chi_bound.get(n)
            out[f"chi_cover_{n}"] = self.chi_cover.get(n)
        out.update({
            "n0": self.n0, "n1": self.n1, "n2": self.n2, "n3plus": self.n3plus,
            "trifurcation_density": self.trifurcation_density,
            "one_ended_trifurcations": self.one_ended_trifurcations,
            "door_count": self.door_count,
            "convex_traces": self.convex_traces,
            "two_ended_traces": self.two_ended_traces,
        })
        return out


def chi_box_corner(center: Point, n: int) -> Point:
    """Lower-left corner of the side-n box centred (up to flooring) at center."""
    return Point(math.floor(center.x - Fraction(n, 2)), math.floor(center.y - Fraction(n, 2)))


def analyze_graph(G: GeometricGraph, toggles: AnalysisToggles, window: WindowSpec,
                  seed_index: int = 0, seed: int = 0, model: str = "file",
                  forest_expected: bool = True,
                  site_intensity: Optional[Coord] = None) -> Tuple[StatsRow, Optional[CorridorReport]]:
    """Stats row of one graph and, when doors are requested, its corridor report.

    site_intensity is the open-site probability of a drainage network; with it
    the row carries the intensity bound next to the measured intensity.
    """
    row = StatsRow(seed_index=seed_index, seed=seed, model=model)
    if toggles.validate_graph:
        row.planarity_violations = len(validate_planarity(G))
        row.forest_ok = validate_forest(G).ok
        row.valid = row.planarity_violations == 0 and (row.forest_ok or not forest_expected)
        if not row.valid:
            logger.warning("Seed %d (%s): %d planarity violations, forest=%s",
                           seed_index, model, row.planarity_violations, row.forest_ok)
    else:
        row.forest_ok = validate_forest(G).ok

    if toggles.intensity:
        boxes = unit_sample_boxes(window.outer_box)
        lam = edge_intensity(G, boxes)
        row.lambda_hat = float(lam)
        if site_intensity is not None and G.oriented:
            row.lambda_bound = drainage_intensity_bound(G, site_intensity)
        for n in toggles.chi_n:
            corner = chi_box_corner(window.origin, n)
            row.chi[n] = chi_n(G, n, corner)
            row.chi_bound[n] = 4 * float(lam) * n
            row.chi_cover[n] = boundary_cover_count(G, n, corner)

    if toggles.classify:
        row.n0, row.n1, row.n2, row.n3plus = classify_components(G, window).counts()

    if toggles.trifurcations and row.forest_ok:
        row.trifurcation_density = float(trifurcation_density(G, window))
        sizes = toggles.doors or DoorToggles()
        row.one_ended_trifurcations = len(one_ended_trifurcations(G, sizes.k, sizes.l, window))

    report = None
    if toggles.doors is not None and row.forest_ok:
        report = analyze_corridor(G, toggles.doors.k, toggles.doors.l, window)
        row.door_count = len(report.doors)
        row.two_ended_traces = sum(1 for trace in report.traces.values() if trace)
        row.convex_traces = sum(1 for cid, trace in report.traces.items()
                                if trace and report.convex[cid] and report.touches_extremes[cid])
    return row, report


def run_replicate(cfg: ExperimentConfig, k: int) -> StatsRow:
    seed = replicate_seed(cfg.seeds.master, k)
    try:
        G, _ = build_model(cfg.model, seed)
        p = coord(cfg.model.p) if cfg.model.name == "drainage" else None
        row, _ = analyze_graph(G, cfg.analysis, cfg.window.to_window(cfg.model), k, seed,
                               cfg.model.name, cfg.model.name in FOREST_MODELS, p)
        return row
    except ValueError as e:
        logger.warning("Seed %d (%s) failed: %s", k, cfg.model.name, e)
        return StatsRow(seed_index=k, seed=seed, model=cfg.model.name, valid=False, forest_ok=False)


def _replicate_task(args: Tuple[ExperimentConfig, int]) -> StatsRow:
    return run_replicate(*args)


def aggregate(rows: Sequence[StatsRow]) -> Dict[str, Dict[str, Optional[float]]]:
    """Mean and standard error of every numeric column, folded in seed order."""
    ordered = sorted(rows, key=lambda r: r.seed_index)
    tables = [r.columns() for r in ordered]
    mean: Dict[str, Optional[float]] = {}
    stderr: Dict[str, Optional[float]] = {}
    for name in tables[0] if tables else []:
        if name in ("seed_index", "seed", "model"):
            continue
        values = np.array([t[name] for t in tables if t.get(name) is not None], dtype=float)
        if values.size == 0:
            mean[name] = stderr[name] = None
            continue
        mean[name] = float(values.mean())
        stderr[name] = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return {"mean": mean, "stderr": stderr}


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def stats_csv_text(rows: Sequence[StatsRow], summary: Dict[str, Dict[str, Optional[float]]]) -> str:
    ordered = sorted(rows, key=lambda r: r.seed_index)
    header = list(ordered[0].columns()) if ordered else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in ordered:
        table = row.columns()
        writer.writerow([_cell(table.get(name)) for name in header])
    for label in ("mean", "stderr"):
        values = summary.get(label, {})
        writer.writerow([label if name == "seed_index" else _cell(values.get(name)) for name in header])
    return buffer.getvalue()


def write_stats_csv(rows: Sequence[StatsRow], summary: Dict[str, Dict[str, Optional[float]]],
                    path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(stats_csv_text(rows, summary))
    return path


@dataclass
class ExperimentResult:
    rows: List[StatsRow]
    summary: Dict[str, Dict[str, Optional[float]]]
    predicted: Optional[EndsTriple] = None
    stats_path: Optional[Path] = None
    svg_path: Optional[Path] = None
    report_path: Optional[Path] = None

    @property
    def exit_code(self) -> int:
        return 0 if all(r.valid for r in self.rows) else 1


class ExperimentOrchestrator:
    """Runs the replicates of a configuration and writes its artifacts."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg

    def run_rows(self) -> List[StatsRow]:
        tasks = [(self.cfg, k) for k in range(self.cfg.seeds.count)]
        if self.cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=self.cfg.workers) as pool:
                rows = list(pool.map(_replicate_task, tasks))
        else:
            rows = [_replicate_task(t) for t in tasks]
        return sorted(rows, key=lambda r: r.seed_index)

    def run(self) -> ExperimentResult:
        cfg = self.cfg
        logger.info("Experiment %s: %d seeds, master %d", cfg.model.name, cfg.seeds.count, cfg.seeds.master)
        rows = self.run_rows()
        result = ExperimentResult(rows, aggregate(rows), predicted_census(cfg.model))
        if result.predicted is not None:
            logger.info("Predicted infinite-lattice census: n0=%s n1=%s n2=%s", *result.predicted)
        result.stats_path = write_stats_csv(rows, result.summary, cfg.output.stats_path)
        if cfg.output.svg_path or cfg.output.report_path:
            self._first_replicate_artifacts(result)
        logger.info("Experiment %s finished: %d/%d rows valid", cfg.model.name,
                    sum(r.valid for r in rows), len(rows))
        return result

    def _first_replicate_artifacts(self, result: ExperimentResult) -> None:
        cfg = self.cfg
        seed = replicate_seed(cfg.seeds.master, 0)
        G, layers = build_model(cfg.model, seed)
        window = cfg.window.to_window(cfg.model)
        report = None
        if cfg.analysis.doors is not None:
            report = analyze_corridor(G, cfg.analysis.doors.k, cfg.analysis.doors.l, window)
        if cfg.output.svg_path:
            doors = report.doors if report else ()
            result.svg_path = Path(cfg.output.svg_path)
            result.svg_path.parent.mkdir(parents=True, exist_ok=True)
            result.svg_path.write_text(render_svg(layers, window, doors, corridor_outline(report)))
        if cfg.output.report_path and report is not None:
            result.report_path = Path(cfg.output.report_path)
            result.report_path.parent.mkdir(parents=True, exist_ok=True)
            result.report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return ExperimentOrchestrator(cfg).run()


def corridor_outline(report: Optional[CorridorReport]) -> Optional[List[Point]]:
    """Polygon between the first and last ordered door lines, if there are two."""
    if report is None or len(report.order) < 2:
        return None
    oracle = Betweenness(TopoLineFamily(tuple(build_gamma(d) for d in report.doors), report.origin))
    return list(oracle.jordan(report.order[0], report.order[-1]).vertices)


# Acceptance suite

@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float


@dataclass
class VerifyReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["check", "passed", "value"])
        for c in self.checks:
            writer.writerow([c.name, int(c.passed), f"{c.value:.6f}"])
        return buffer.getvalue()


def _seeds(master: int, tag: int, count: int) -> List[int]:
    return [replicate_seed(master * 100 + tag, k) for k in range(count)]


def _stderr(values: Sequence[float]) -> float:
    arr = np.asarray(values, dtype=float)
    return float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0


def check_contour_cycles(seeds: Sequence[int], size: int = 15) -> CheckResult:
    spec = GridSpec(size, size)
    good = 0
    for seed in seeds:
        cont = contour(ust_wilson(spec, seed), Fraction(1, 4))
        regular = all(cont.degree(v) == 2 for v in range(cont.vertex_count))
        if regular and len(component_census(cont)) == 1 and cont.vertex_count == 4 * size * size:
            good += 1
    return CheckResult("contour_cycle", good == len(seeds), good / len(seeds))


def check_duality(seeds: Sequence[int], size: int = 15) -> CheckResult:
    spec = GridSpec(size, size)
    good = 0
    for seed in seeds:
        tree = ust_wilson(spec, seed)
        dual = dual_tree(tree, spec)
        spanning = (len(dual.edges) == (size - 1) ** 2 - 1 and validate_forest(dual).ok
                    and len(component_census(dual)) == 1)
        if spanning and not validate_planarity(graph_union([tree, dual], check=False)):
            good += 1
    return CheckResult("duality", good == len(seeds), good / len(seeds))


def check_chi_bound(seeds: Sequence[int], size: int = 200, ns: Sequence[int] = (5, 10, 20)) -> List[CheckResult]:
    center = Point(size // 2, size // 2)
    region = Box(0, 0, size - 1, size - 1)
    chis: Dict[int, List[int]] = {n: [] for n in ns}
    lams = []
    bounds = []
    for seed in seeds:
        G = drainage_grs(DrainageSpec(size, size, Fraction(1, 2), TieBreak.RIGHT, seed))
        lams.append(float(edge_intensity(G, unit_sample_boxes(region, margin=size // 10, stride=4))))
        bounds.append(drainage_intensity_bound(G, Fraction(1, 2)))
        for n in ns:
            chis[n].append(chi_n(G, n, chi_box_corner(center, n)))
    lam = float(np.mean(lams))
    lam_bound = float(np.mean(bounds))
    results = [CheckResult("drainage_intensity_bound", lam <= lam_bound, lam / lam_bound)]
    for n in ns:
        mean_chi = float(np.mean(chis[n]))
        bound = 4 * lam * n + 3 * _stderr(chis[n])
        results.append(CheckResult(f"chi_bound_{n}", mean_chi <= bound, mean_chi / bound if bound else 0.0))
    return results


def scale_windows(L: int, half_size: int) -> List[WindowSpec]:
    """Windows tiling [-half_size, half_size)^2 with 2L-tiles, inner L/2 and outer L-2."""
    if half_size % L or L <= 4:
        raise ConfigError(f"Scale {L} does not tile a grid of half-size {half_size}")
    centers = range(-half_size + L, half_size, 2 * L)
    return [WindowSpec(Fraction(L, 2), L - 2, Point(x, y)) for x in centers for y in centers]


def trifurcation_densities(seeds: Sequence[int],
                           scales: Sequence[int] = (10, 20, 40)) -> Dict[int, Tuple[float, float]]:
    """Per scale, mean and standard error over seeds of the density of inner-box
    vertices with escape degree >= 3.

    Every scale reuses the same UST of each seed on a grid of side 2*max(scales),
    tiled by windows of that scale, so all scales see about the same number of
    inner vertices.
    """
    half = max(scales)
    spec = GridSpec(2 * half, 2 * half, Point(-half, -half))
    per_seed: Dict[int, List[float]] = {L: [] for L in scales}
    for seed in seeds:
        tree = ust_wilson(spec, seed)
        for L in scales:
            hits = total = 0
            for window in scale_windows(L, half):
                degrees = escape_degrees(tree, window)
                hits += sum(1 for d in degrees.values() if d >= 3)
                total += len(degrees)
            per_seed[L].append(hits / total)
    return {L: (float(np.mean(v)), _stderr(v)) for L, v in per_seed.items()}


def check_trifurcation_decay(seeds: Sequence[int], scales: Sequence[int] = (10, 20, 40)) -> CheckResult:
    """Density nonincreasing across scales and halved from the first to the last,
    both up to three standard errors."""
    table = trifurcation_densities(seeds, scales)
    logger.info("Trifurcation densities: %s",
                ", ".join(f"L={L}: {m:.6f}±{se:.6f}" for L, (m, se) in table.items()))
    ordered = sorted(scales)
    ok = True
    for a, b in zip(ordered, ordered[1:]):
        (ma, sa), (mb, sb) = table[a], table[b]
        ok &= mb <= ma + 3 * math.hypot(sa, sb)
    (m0, s0), (m1, s1) = table[ordered[0]], table[ordered[-1]]
    ok &= m1 <= m0 / 2 + 3 * math.hypot(s0 / 2, s1)
    return CheckResult("trifurcation_decay", bool(ok), m1 / m0 if m0 else 0.0)


def check_drainage_two_ended(seeds: Sequence[int], size: int = 40, inner: int = 10) -> CheckResult:
    window = WindowSpec(inner, inner + 5, Point(size // 2, size // 2))
    good = 0
    for seed in seeds:
        G = drainage_grs(DrainageSpec(size, size, 1, TieBreak.RIGHT, seed))
        c = classify_components(G, window)
        if c.n1 == 0 and c.n3plus == 0 and c.n2 == 2 * inner + 1:
            good += 1
    return CheckResult("drainage_two_ended", good == len(seeds), good / len(seeds))


def connected_pair_fraction(G: GeometricGraph, box: Box) -> Optional[float]:
    """Fraction of vertex pairs in box whose forward paths reach the same terminal."""
    terminal = [forward_vertices(G, v)[-1] for v, p in enumerate(G.vertices) if box.contains(p)]
    pairs = list(combinations(terminal, 2))
    if not pairs:
        return None
    return sum(1 for a, b in pairs if a == b) / len(pairs)


def check_drainage_coalescence(seeds: Sequence[int], width: int = 200, height: int = 600,
                               k: int = 10, L: int = 100) -> List[CheckResult]:
    """Forward paths from the side-2k box at the bottom centre share a terminal.

    Paths k apart merge after about k^2 rows, so the grid runs 600 rows above
    the box; at height 200 the mean fraction for k=10 stays near 3/4.
    """
    window = WindowSpec(k, L, Point(width // 2, k))
    fractions = []
    worst_n3 = 0
    for seed in seeds:
        G = drainage_grs(DrainageSpec(width, height, Fraction(1, 2), TieBreak.RIGHT, seed))
        frac = connected_pair_fraction(G, window.inner_box)
        if frac is not None:
            fractions.append(frac)
        worst_n3 = max(worst_n3, classify_components(G, window).n3plus)
    mean = float(np.mean(fractions)) if fractions else 1.0
    return [CheckResult("drainage_coalescence", mean >= 0.95, mean),
            CheckResult("drainage_no_trifurcation", worst_n3 == 0, float(worst_n3))]


def check_betweenness(seeds: Sequence[int], size: int = 8) -> CheckResult:
    good = 0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        heights = [int(h) for h in rng.choice(np.arange(-20, 21), size=size, replace=False)]
        family = bump_family(heights)
        oracle = Betweenness(family)
        order = linear_order(family, oracle)
        summary = axiom_summary(oracle, order)
        if summary.ok and [heights[i] for i in order] == sorted(heights):
            good += 1
    return CheckResult("betweenness_axioms", good == len(seeds), good / len(seeds))


def check_corridor_fixture(L: int = 16, k: int = 4, l: int = 6) -> CheckResult:
    G = fixture_corridor(L)
    report = analyze_corridor(G, k, l, fixture_window(L))
    xs = [report.doors[i].midpoint.x for i in report.order]
    middle = G.position_index[Point(-L, 0)]
    component = next(c for c in component_census(G) if middle in c)
    cid = min(G.ids[x] for x in component)
    ok = (len(report.doors) >= 1 and xs == sorted(xs) and cid in report.traces
          and sorted(report.traces[cid]) == list(range(len(report.doors))) and report.convex[cid])
    return CheckResult("corridor_fixture", ok, float(len(report.doors)))


def lambda_phi_estimate(seeds: Sequence[int], size: int = 40, radius: int = 2) -> Tuple[float, float, float]:
    """Summed tail bound, mean edge intensity of G_phi near the centre and its standard error."""
    spec = GridSpec(size, size)
    depths = peel_depth_sample(spec, seeds, radius)
    sched = phi_schedule_from_depths(depths)
    tails = []
    for phi_n in sched.phi:
        exceed = sum(1 for d in depths if d == PeelOutcome.NOT_REMOVED or d > phi_n)
        tails.append(exceed / len(depths))
    bound = 8 * sum(tails)
    center = spec.center()
    half = Fraction(1, 2)
    samples = []
    for seed in seeds:
        layer = g_phi(ust_wilson(spec, seed), sched, check=False)
        for p in spec.points():
            if (p - center).norm_inf() <= radius:
                samples.append(len(layer.edges_meeting(Box.square(p, half))))
    return bound, float(np.mean(samples)), _stderr(samples)


def check_lambda_phi(seeds: Sequence[int]) -> List[CheckResult]:
    bound, lam, se = lambda_phi_estimate(seeds)
    return [CheckResult("lambda_phi_series", bound <= 16, bound),
            CheckResult("lambda_phi_bound", lam <= bound + 3 * se, lam)]


def reproducibility_csv(master: int) -> str:
    cfg = ExperimentConfig(
        model=ModelConfig(name="ust", width=12, height=12),
        window=WindowConfig(inner="2", outer="5"),
        seeds=SeedConfig(count=3, master=master),
        analysis=AnalysisToggles(chi_n=[3], trifurcations=True),
    )
    rows = [run_replicate(cfg, k) for k in range(cfg.seeds.count)]
    return stats_csv_text(rows, aggregate(rows))


def verify(master: int = 20240601, quick: bool = False) -> VerifyReport:
    """The acceptance suite; quick mode shrinks every seed count."""
    def count(full: int, small: int) -> int:
        return small if quick else full

    report = VerifyReport()
    report.checks.append(check_contour_cycles(_seeds(master, 1, count(50, 5))))
    report.checks.append(check_duality(_seeds(master, 2, count(50, 5))))
    report.checks.extend(check_chi_bound(_seeds(master, 3, count(100, 5)), size=200 if not quick else 60))
    report.checks.append(check_trifurcation_decay(_seeds(master, 4, count(40, 8))))
    report.checks.append(check_drainage_two_ended(_seeds(master, 5, count(10, 2))))
    report.checks.extend(check_drainage_coalescence(_seeds(master, 6, count(50, 10))))
    report.checks.append(check_betweenness(_seeds(master, 7, count(100, 10))))
    report.checks.append(check_corridor_fixture())
    report.checks.extend(check_lambda_phi(_seeds(master, 9, count(100, 10))))
    same = reproducibility_csv(master) == reproducibility_csv(master)
    report.checks.append(CheckResult("reproducibility", same, float(same)))
    for c in report.checks:
        log = logger.info if c.passed else logger.warning
        log("Check %s: %s (%.6f)", c.name, "pass" if c.passed else "FAIL", c.value)
    return report


def bench(model: str = "ust", sizes: Sequence[int] = (10, 20, 40), seeds: int = 3,
          master: int = 20240601) -> List[Tuple[int, float]]:
    """Mean generation-plus-analysis seconds per seed for each grid size."""
    timings = []
    for size in sizes:
        cfg = ExperimentConfig(model=ModelConfig(name=model, width=size, height=size),
                               window=WindowConfig(inner=str(max(1, size // 8)), outer=str(max(2, size // 2 - 1))),
                               seeds=SeedConfig(count=seeds, master=master))
        start = time.perf_counter()
        for k in range(seeds):
            run_replicate(cfg, k)
        timings.append((size, (time.perf_counter() - start) / seeds))
        logger.info("Bench %s size %d: %.4fs per seed", model, size, timings[-1][1])
    return timings
