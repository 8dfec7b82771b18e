"""Command-line entry point: ``causalfront <command> [options]``.

Every option that has an environment fallback reads ``CAUSALFRONT_<NAME>``
(for example ``CAUSALFRONT_SEED``); command-line values win over the
environment, which wins over the run config file.

Exit codes: 0 success, 1 runtime failure (including an interrupted run,
whose partial front is still written), 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell import MeasurementSettings, chsh, generate_frequencies
from .bounds import audit_front
from .evolution import EvolutionConfig, make_streams, run_evolution
from .graph import CausalGraph, bell_graph, check_graph, load_graph
from .island import IslandPlan, default_plan, run_island_plan
from .metrics import FrequencyTable, influence_conditioning, objective_names
from .storage import (export_members, load_frequencies, load_genomes, load_points, read_json,
                      save_frequencies, save_genomes, write_json)

log = logging.getLogger("causalfront")

ENV_PREFIX = "CAUSALFRONT_"


class UsageError(Exception):
    pass


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name)


def parse_edge(text: str) -> tuple[str, str]:
    for sep in ("->", ","):
        if sep in text:
            src, dst = (p.strip() for p in text.split(sep, 1))
            if src and dst:
                return src, dst
    raise argparse.ArgumentTypeError(f"edge must look like 'a->b', got {text!r}")


def _scale(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("scale must lie in (0, 1]")
    return v


# ---------------------------------------------------------------- run config


def _resolve(base: Path, value):
    if value is None or isinstance(value, dict):
        return value
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_run_config(args) -> dict:
    """Merge the optional ``--config`` file with command-line values."""
    cfg: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file {path} does not exist")
        cfg = read_json(path)
        base = path.parent
        for key in ("graph", "frequencies", "plan"):
            cfg[key] = _resolve(base, cfg.get(key))
    evo = dict(cfg.get("evolution", {}))
    for flag, key in (("seed", "seed"), ("threads", "threads"), ("generations", "generations"),
                      ("mu", "mu"), ("lambda_", "lambda_"), ("sigma", "mutation_sigma"),
                      ("checkpoint_every", "checkpoint_every")):
        v = getattr(args, flag, None)
        if v is not None:
            evo[key] = v
    cfg["evolution"] = evo
    for key in ("graph", "frequencies", "plan"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = Path(v)
    if getattr(args, "gamma", None) is not None:
        cfg["frequencies"] = {"gamma": args.gamma}
    if getattr(args, "penalize", None):
        cfg["penalized_edges"] = [list(e) for e in args.penalize]
    for key in ("hidden_cardinality", "scale", "repeat", "output"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    for key in ("graph", "frequencies", "plan"):
        v = cfg.get(key)
        if isinstance(v, Path) and not v.is_file():
            raise UsageError(f"{key} file {v} does not exist")
    scale = cfg.get("scale", 1.0)
    if not 0 < scale <= 1:
        raise UsageError("scale must lie in (0, 1]")
    return cfg


def _graph(cfg: dict) -> CausalGraph:
    if cfg.get("graph"):
        graph = load_graph(cfg["graph"])
        if "penalized_edges" in cfg:
            graph = CausalGraph(graph.nodes, tuple(tuple(e) for e in cfg["penalized_edges"]))
        return check_graph(graph)
    edges = tuple(tuple(e) for e in cfg.get("penalized_edges", [("a", "b")]))
    return bell_graph(extra_edges=edges, hidden_cardinality=int(cfg.get("hidden_cardinality", 4)))


def _frequencies(cfg: dict, graph: CausalGraph) -> FrequencyTable:
    src = cfg.get("frequencies")
    if src is None:
        raise UsageError("no frequency data: pass --frequencies, --gamma or a config entry")
    shape = tuple(graph.cardinality(v) for v in graph.observables)
    if isinstance(src, dict):
        return generate_frequencies(float(src["gamma"]), shots=src.get("shots"), rng=src.get("seed"))
    return load_frequencies(src, shape)


def _config(cfg: dict) -> EvolutionConfig:
    try:
        return EvolutionConfig.from_dict(cfg["evolution"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _write_outputs(out: Path, graph, freq, front, archive, manifest: dict):
    out.mkdir(parents=True, exist_ok=True)
    names = objective_names(graph)
    export_members(out, "front", graph, names, front)
    export_members(out, "archive", graph, names, archive)
    manifest.update(
        graph=graph.to_dict(),
        graph_sha256=graph.digest(),
        frequency_sha256=freq.digest(),
        objectives=list(names),
        front_size=len(front),
        archive_size=len(archive),
        version=__version__,
    )
    write_json(out / "manifest.json", manifest)
    save_frequencies(freq, out / "frequencies.csv")


def _summary(points: np.ndarray, names) -> str:
    if points.size == 0:
        return "empty front"
    best = points.min(axis=0)
    return ", ".join(f"min {n} = {v:.6g}" for n, v in zip(names, best))


# ---------------------------------------------------------------- commands


def cmd_generate_data(args) -> int:
    if not 0.0 <= args.gamma <= 1.0:
        raise UsageError(f"gamma must lie in [0, 1], got {args.gamma}")
    if (args.alice is None) != (args.bob is None):
        raise UsageError("--alice and --bob must be given together")
    settings = None if args.alice is None else MeasurementSettings(tuple(args.alice), tuple(args.bob))
    seed = args.seed
    if args.shots is not None and seed is None:
        seed, _ = make_streams(None)
    freq = generate_frequencies(args.gamma, settings, args.shots, seed)
    s = chsh(freq)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    save_frequencies(freq, out / f"{args.name}.csv")
    write_json(out / f"{args.name}.json", {
        "gamma": args.gamma,
        "settings": (settings or MeasurementSettings()).to_dict(),
        "shots": args.shots,
        "seed": seed,
        "S": s,
    })
    print(f"S = {s:.6f}")
    return 0


def _checkpointer(out: Path, graph):
    def write(gen, result):
        path = out / "checkpoints"
        path.mkdir(parents=True, exist_ok=True)
        save_genomes(path / f"generation_{gen:06d}.json", graph, result.population)
    return write


def cmd_evolve(args) -> int:
    cfg = load_run_config(args)
    graph = _graph(cfg)
    freq = _frequencies(cfg, graph)
    config = _config(cfg)
    seed, _ = make_streams(config.seed)
    config = config.replace(seed=seed)
    out = Path(cfg.get("output", "."))
    out.mkdir(parents=True, exist_ok=True)
    result = run_evolution(graph, freq, config, checkpoint=_checkpointer(out, graph))
    _write_outputs(out, graph, freq, result.front, result.archive, {
        "command": "evolve",
        "config": config.to_dict(),
        "seed": seed,
        "n_evaluations": result.n_evaluations,
        "interrupted": result.interrupted,
    })
    print(_summary(result.front.points(), objective_names(graph)))
    return 1 if result.interrupted else 0


def cmd_island(args) -> int:
    cfg = load_run_config(args)
    graph = _graph(cfg)
    freq = _frequencies(cfg, graph)
    config = _config(cfg)
    seed, _ = make_streams(config.seed)
    config = config.replace(seed=seed)
    if cfg.get("plan"):
        plan = IslandPlan.from_dict(read_json(cfg["plan"]))
        if "repeat" in cfg:
            plan.repeat = int(cfg["repeat"])
    else:
        plan = default_plan(graph, cfg.get("scale", 1.0), int(cfg.get("repeat", 1)))
    try:
        plan.validate(graph)
    except ValueError as exc:
        raise UsageError(f"invalid plan: {exc}") from exc
    out = Path(cfg.get("output", "."))
    result = run_island_plan(plan, graph, freq, config)
    _write_outputs(out, graph, freq, result.front, result.archive, {
        "command": "island",
        "config": config.to_dict(),
        "plan": plan.to_dict(),
        "seed": seed,
        "n_evaluations": result.n_evaluations,
        "stage_hypervolumes": result.stage_hypervolumes,
    })
    write_json(out / "island_log.json", result.log)
    print(_summary(result.front.points(), objective_names(graph)))
    return 0


def _front_graph(front_path: Path, args, names) -> CausalGraph:
    sidecar = front_path.with_name(front_path.stem + "_genomes.json")
    if args.graph:
        return load_graph(args.graph)
    if sidecar.is_file():
        return CausalGraph.from_dict(read_json(sidecar)["graph"])
    edges = [parse_edge(n[2:-1]) for n in names[1:]]
    return bell_graph(extra_edges=edges)


def cmd_bound_check(args) -> int:
    front_path = Path(args.front)
    if not front_path.is_file():
        raise UsageError(f"front file {front_path} does not exist")
    if not Path(args.frequencies).is_file():
        raise UsageError(f"frequency file {args.frequencies} does not exist")
    names, points = load_points(front_path)
    if len(points) == 0:
        if args.output:
            write_json(args.output, {"rows": [], "violations": 0})
        print("empty front: nothing to check")
        return 0
    graph = _front_graph(front_path, args, names)
    shape = tuple(graph.cardinality(v) for v in graph.observables)
    freq = load_frequencies(args.frequencies, shape)
    edges = [args.edge] if args.edge else list(graph.penalized_edges)
    report = {"rows": [], "violations": 0}
    for edge in edges:
        column = f"C[{edge[0]}->{edge[1]}]"
        if column not in names:
            raise UsageError(f"front has no column {column}")
        cond = influence_conditioning(graph, edge)
        hidden = [c for c in cond if not graph.node(c).observable]
        if hidden:
            raise UsageError(f"edge {edge} conditions on hidden nodes {hidden}; no empirical influence")
        pts = points[:, [0, names.index(column)]]
        for row in audit_front(pts, freq, edge, cond):
            report["rows"].append({"edge": f"{edge[0]}->{edge[1]}", **row.to_dict()})
            report["violations"] += row.status == "violation"
    if args.output:
        write_json(args.output, report)
    counts = {s: sum(r["status"] == s for r in report["rows"]) for s in ("ok", "violation", "inapplicable")}
    print(f"ok: {report['violations'] == 0}  ({counts['ok']} ok, {counts['violation']} violations, "
          f"{counts['inapplicable']} inapplicable)")
    return 1 if report["violations"] else 0


def cmd_export_front(args) -> int:
    """Re-export a genome sidecar as non-dominated objective rows, optionally for other data."""
    if not Path(args.genomes).is_file():
        raise UsageError(f"genome file {args.genomes} does not exist")
    graph, members = load_genomes(args.genomes)
    if args.frequencies:
        from .evolution import Evaluator
        shape = tuple(graph.cardinality(v) for v in graph.observables)
        ev = Evaluator(graph, load_frequencies(args.frequencies, shape))
        ev(members)
    if any(m.fitness is None for m in members):
        raise UsageError("genomes carry no fitness; pass --frequencies to score them")
    pairs = [(m.fitness, m) for m in members]
    if args.non_dominated and pairs:
        from .pareto import non_dominated_mask
        mask = non_dominated_mask(np.vstack([f for f, _ in pairs]))
        pairs = [p for p, keep in zip(pairs, mask) if keep]
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    export_members(out, args.name, graph, objective_names(graph), pairs)
    print(f"wrote {len(pairs)} rows to {out / (args.name + '.csv')}")
    return 0


# ---------------------------------------------------------------- parser


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run config JSON (paths inside are relative to it)")
    p.add_argument("--graph", help="graph JSON (default: the Bell graph)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--frequencies", help="frequency table CSV")
    src.add_argument("--gamma", type=float, help="use the exact synthetic table for this gamma")
    p.add_argument("--penalize", type=parse_edge, action="append", metavar="SRC->DST",
                   help="penalized edge, repeatable (default a->b)")
    p.add_argument("--hidden-cardinality", type=int, dest="hidden_cardinality")
    p.add_argument("--seed", type=int, default=_env("SEED"))
    p.add_argument("--threads", type=int, default=_env("THREADS"))
    p.add_argument("--generations", type=int, default=_env("GENERATIONS"))
    p.add_argument("--mu", type=int)
    p.add_argument("--lambda", type=int, dest="lambda_")
    p.add_argument("--sigma", type=float, help="mutation standard deviation")
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every",
                   default=_env("CHECKPOINT_EVERY"), help="write the population every K generations")
    p.add_argument("--output", default=_env("OUTPUT"), help="output directory (default .)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causalfront", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="write a synthetic Bell frequency table")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--shots", type=int, help="sample this many events instead of exact frequencies")
    p.add_argument("--seed", type=int, default=_env("SEED"))
    p.add_argument("--alice", type=float, nargs=2, metavar=("T1", "T2"), help="analyser angles (radians)")
    p.add_argument("--bob", type=float, nargs=2, metavar=("T1", "T2"))
    p.add_argument("--output", default=_env("OUTPUT") or ".")
    p.add_argument("--name", default="frequencies")
    p.set_defaults(func=cmd_generate_data)

    p = sub.add_parser("evolve", help="basic multi-objective run")
    _add_run_options(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("island", help="staged island-model run")
    _add_run_options(p)
    p.add_argument("--plan", help="island plan JSON (default: the scaled standard plan)")
    p.add_argument("--scale", type=_scale, default=_env("SCALE"))
    p.add_argument("--repeat", type=int, default=_env("REPEAT"))
    p.set_defaults(func=cmd_island)

    p = sub.add_parser("bound-check", help="audit a front against the analytic bound")
    p.add_argument("--front", required=True, help="front or archive CSV")
    p.add_argument("--frequencies", required=True)
    p.add_argument("--graph", help="graph JSON (default: the genome sidecar next to the front)")
    p.add_argument("--edge", type=parse_edge, help="only this edge (default: every C column)")
    p.add_argument("--output", help="write the JSON report here")
    p.set_defaults(func=cmd_bound_check)

    p = sub.add_parser("export-front", help="re-export a genome sidecar as CSV")
    p.add_argument("--genomes", required=True)
    p.add_argument("--frequencies", help="re-score members against this table")
    p.add_argument("--non-dominated", action="store_true", help="keep only non-dominated rows")
    p.add_argument("--output", default=_env("OUTPUT") or ".")
    p.add_argument("--name", default="front")
    p.set_defaults(func=cmd_export_front)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report, don't dump a traceback on users
        log.debug("failure", exc_info=True)
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
