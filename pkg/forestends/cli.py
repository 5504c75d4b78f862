"""
Planar Forest Ends - Command Line Interface
Subcommands: run, generate, analyze, corridor, verify, render, bench.
Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import ValidationError

from .corridor import analyze_corridor
from .forest import GeometricGraph
from .experiment_orchestrator import (
    AnalysisToggles,
    ConfigError,
    DoorToggles,
    ExperimentConfig,
    MODEL_NAMES,
    ModelConfig,
    WindowConfig,
    aggregate,
    analyze_graph,
    bench,
    build_model,
    corridor_outline,
    load_config,
    run_experiment,
    verify,
    write_stats_csv,
)
from .generators import graph_union
from .interchange import InterchangeError, load_graph, save_graph
from .render_engine import GRAPH_LAYERS, render_svg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forestends", description="Ends of stationary planar random forests")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def window_flags(p):
        p.add_argument("--inner", help="inner window half-width (integer or a/b)")
        p.add_argument("--outer", help="outer window half-width (integer or a/b)")

    def model_flags(p):
        p.add_argument("--model", choices=MODEL_NAMES)
        p.add_argument("--width", type=int)
        p.add_argument("--height", type=int)
        p.add_argument("--p", help="drainage open probability (integer or a/b)")

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("--config", help="experiment configuration (JSON)")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--seeds", type=int, help="number of replicates")
    run.add_argument("--k", type=int)
    run.add_argument("--l", type=int)
    run.add_argument("--out", help="stats CSV path")
    model_flags(run)
    window_flags(run)

    gen = sub.add_parser("generate", help="sample a model into a graph file")
    gen.add_argument("--config", help="experiment configuration (JSON)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default="graph.json")
    model_flags(gen)

    ana = sub.add_parser("analyze", help="statistics of a graph file")
    ana.add_argument("graph")
    ana.add_argument("--k", type=int)
    ana.add_argument("--l", type=int)
    ana.add_argument("--chi", type=int, nargs="*", default=[5, 10])
    ana.add_argument("--trifurcations", action="store_true")
    ana.add_argument("--no-forest", action="store_true", help="do not require the graph to be a forest")
    ana.add_argument("--out", help="stats CSV path")
    window_flags(ana)

    cor = sub.add_parser("corridor", help="door and order report of a graph file")
    cor.add_argument("graph")
    cor.add_argument("--k", type=int, default=4)
    cor.add_argument("--l", type=int, default=6)
    cor.add_argument("--out", help="report JSON path")
    window_flags(cor)

    ver = sub.add_parser("verify", help="run the acceptance suite")
    ver.add_argument("--seed", type=int, default=20240601, help="master seed")
    ver.add_argument("--quick", action="store_true", help="reduced seed counts")
    ver.add_argument("--out", default="results/verify.csv")

    ren = sub.add_parser("render", help="draw graph files or a sampled model as SVG")
    ren.add_argument("graphs", nargs="*", help="graph files, drawn in the order given")
    ren.add_argument("--layer", choices=GRAPH_LAYERS, action="append",
                     help="layer of each graph file, repeated once per file (default primal)")
    ren.add_argument("--config", help="experiment configuration (JSON)")
    ren.add_argument("--seed", type=int, default=0)
    model_flags(ren)
    ren.add_argument("--k", type=int)
    ren.add_argument("--l", type=int)
    ren.add_argument("--out", default="graph.svg")
    window_flags(ren)

    ben = sub.add_parser("bench", help="time generation and analysis")
    ben.add_argument("--model", choices=MODEL_NAMES, default="ust")
    ben.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40])
    ben.add_argument("--seeds", type=int, default=3)
    ben.add_argument("--seed", type=int, default=20240601, help="master seed")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    model = {}
    for name in ("model", "width", "height", "p"):
        value = getattr(args, name, None)
        if value is not None:
            model["name" if name == "model" else name] = value
    window = {name: getattr(args, name) for name in ("inner", "outer") if getattr(args, name, None) is not None}
    try:
        cfg = cfg.model_copy(update={
            "model": ModelConfig(**{**cfg.model.model_dump(), **model}),
            "window": WindowConfig(**{**cfg.window.model_dump(), **window}),
        })
        if getattr(args, "seed", None) is not None or getattr(args, "seeds", None) is not None:
            seeds = cfg.seeds.model_copy(update={
                k: v for k, v in (("master", getattr(args, "seed", None)), ("count", getattr(args, "seeds", None)))
                if v is not None
            })
            cfg = cfg.model_copy(update={"seeds": seeds})
        if getattr(args, "k", None) is not None and getattr(args, "l", None) is not None:
            analysis = cfg.analysis.model_copy(update={"doors": DoorToggles(k=args.k, l=args.l)})
            cfg = cfg.model_copy(update={"analysis": analysis})
    except ValidationError as e:
        raise ConfigError(f"Invalid option: {e}") from e
    return cfg


def _graph_window(args, G):
    xs = [p.x for p in G.vertices] or [0]
    ys = [p.y for p in G.vertices] or [0]
    origin = (str((min(xs) + max(xs)) // 2), str((min(ys) + max(ys)) // 2))
    fields = {"origin": origin}
    for name in ("inner", "outer"):
        if getattr(args, name, None) is not None:
            fields[name] = getattr(args, name)
    try:
        return WindowConfig(**fields).to_window(ModelConfig())
    except ValueError as e:
        raise ConfigError(f"Invalid window: {e}") from e


def cmd_run(args) -> int:
    cfg = _config(args)
    if args.out:
        cfg = cfg.model_copy(update={"output": cfg.output.model_copy(update={"stats_path": args.out})})
    result = run_experiment(cfg)
    if result.predicted is not None:
        n0, n1, n2 = result.predicted
        print(f"Predicted infinite-lattice census: n0={n0} n1={n1} n2={n2}")
    print(f"Wrote {result.stats_path}")
    return result.exit_code


def cmd_generate(args) -> int:
    cfg = _config(args)
    G, _ = build_model(cfg.model, args.seed)
    path = save_graph(G, args.out)
    print(f"Wrote {cfg.model.name} sample with {G.vertex_count} vertices and {len(G.edges)} edges to {path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    G = load_graph(args.graph)
    window = _graph_window(args, G)
    doors =DoorToggles(k=args.k, l=args.l) if args.k is not None and args.l is not None else None
    toggles = AnalysisToggles(chi_n=args.chi, trifurcations=args.trifurcations, doors=doors)
    row, _ = analyze_graph(G, toggles, window, forest_expected=not args.no_forest)
    if args.out:
        write_stats_csv([row], aggregate([row]), args.out)
    print(json.dumps(row.columns(), indent=2))
    return EXIT_OK if row.valid else EXIT_INVALID


def cmd_corridor(args) -> int:
    G = load_graph(args.graph)
    report = analyze_corridor(G, args.k, args.l, _graph_window(args, G))
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.axioms.ok else EXIT_INVALID


def cmd_verify(args) -> int:
    report = verify(args.seed, args.quick)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.csv_text())
    for check in report.checks:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}  {check.value:.6f}")
    return EXIT_OK if report.passed else EXIT_INVALID


def _render_layers(args) -> List[Tuple[str, GeometricGraph]]:
    if args.graphs:
        names = args.layer or ["primal"] * len(args.graphs)
        if len(names) != len(args.graphs):
            raise ConfigError(f"Got {len(names)} --layer names for {len(args.graphs)} graph files")
        return [(name, load_graph(path)) for name, path in zip(names, args.graphs)]
    if args.model is None and args.config is None:
        raise ConfigError("render needs graph files or a model")
    if args.layer:
        raise ConfigError("--layer names graph files; sampled models bring their own layers")
    _, layers = build_model(_config(args).model, args.seed)
    return layers


def cmd_render(args) -> int:
    layers = _render_layers(args)
    window = doors = outline = None
    if args.inner is not None or args.outer is not None:
        G = layers[0][1] if len(layers) == 1 else graph_union([graph for _, graph in layers])
        window = _graph_window(args, G)
        if args.k is not None and args.l is not None:
            report = analyze_corridor(G, args.k, args.l, window)
            doors, outline = report.doors, corridor_outline(report)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render_svg(layers, window, doors or (), outline))
    print(f"Wrote {out} with layers {', '.join(name for name, _ in layers)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    for size, seconds in bench(args.model, args.sizes, args.seeds, args.seed):
        print(f"{args.model:10s} {size:5d} {seconds:.4f}s")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "corridor": cmd_corridor,
    "verify": cmd_verify,
    "render": cmd_render,
    "bench": cmd_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InterchangeError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except ValueError as e:
        logger.error("Validation failed: %s", e)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
