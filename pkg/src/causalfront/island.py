"""Staged island model for higher-dimensional fronts.

Populations are first evolved at the extremes of the front on structurally
reduced graphs (penalized edges removed) or under a lexicographic
objective, then transplanted onto larger graphs to seed the search for the
full multi-objective front.  All island outputs are re-scored on the full
graph and offered to one global epsilon archive.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .evolution import EvolutionConfig, EvolutionResult, Evaluator, fitness_matrix, run_evolution
from .graph import CausalGraph, Edge, GraphError, check_graph
from .metrics import FrequencyTable
from .model import Individual
from .operators import create_individual
from .pareto import EpsilonArchive, ParetoFront, hypervolume
from .selection import lexicographic_select, nsga2_select

log = logging.getLogger(__name__)

MODES = ("multi", "lexicographic")


def transplant(population: Sequence[Individual], from_graph: CausalGraph, to_graph: CausalGraph) -> list[Individual]:
    """Move individuals onto a graph with extra penalized edges.

    Tensors of nodes that gained parents are copied across every value of
    each new parent, so the new parent has no direct effect and the
    observable joint is unchanged.  Fitness is not carried over.
    """
    check_graph(from_graph)
    check_graph(to_graph)
    if from_graph.names != to_graph.names:
        raise GraphError("graphs declare different nodes")
    added = set(to_graph.edges) - set(from_graph.edges)
    if set(from_graph.edges) - set(to_graph.edges):
        raise GraphError("target graph drops edges of the source graph")
    unpenalized = added - set(to_graph.penalized_edges)
    if unpenalized:
        raise GraphError(f"added edges {sorted(unpenalized)} are not penalized in the target graph")
    plans = []
    for old, new in zip(from_graph.nodes, to_graph.nodes):
        if (old.cardinality, old.observable) != (new.cardinality, new.observable):
            raise GraphError(f"node {old.name!r} differs between graphs")
        if old.parents == new.parents:
            plans.append(None)
            continue
        src_axes = (old.name,) + old.parents
        dst_axes = (new.name,) + new.parents
        missing = [a for a in dst_axes if a not in src_axes]
        order = [(src_axes + tuple(missing)).index(a) for a in dst_axes]
        plans.append((len(missing), order, to_graph.tensor_shape(new.name)))
    out = []
    for ind in population:
        if ind.graph != from_graph:
            raise GraphError("individual is not on the source graph")
        tensors = []
        for t, plan in zip(ind.tensors, plans):
            if plan is None:
                tensors.append(t)
                continue
            n_new, order, shape = plan
            grown = t.reshape(t.shape + (1,) * n_new).transpose(order)
            tensors.append(np.ascontiguousarray(np.broadcast_to(grown, shape)))
        out.append(Individual(to_graph, tensors))
    return out


def lexicographic_evolve(
    graph: CausalGraph,
    freq: FrequencyTable,
    edge: Edge,
    config: EvolutionConfig,
    initial_population: Sequence[Individual] | None = None,
    evaluator: Evaluator | None = None,
) -> EvolutionResult:
    """Minimize TVD, breaking near-ties (within 1e-9) by the influence along `edge`.

    Fitness vectors are ``(TVD, C_edge)``.  The final population is sorted best first.
    """
    if tuple(edge) not in graph.penalized_edges:
        raise GraphError(f"{edge} is not a penalized edge of the graph")
    if evaluator is None:
        evaluator = Evaluator(graph, freq, edges=(tuple(edge),), threads=config.threads)
    result = run_evolution(graph, freq, config.replace(selection="lexicographic"),
                           initial_population, evaluator=evaluator)
    order = lexicographic_select(fitness_matrix(result.population), len(result.population))
    result.population = [result.population[k] for k in order]
    return result


@dataclass
class Island:
    name: str
    removed_edges: tuple[Edge, ...] = ()
    mode: str = "multi"
    lexicographic_edge: Edge | None = None
    source: str | tuple[str, ...] = "fresh"
    population: int = 300
    runs: int = 1
    generations: int = 400
    seed_size: int | None = None

    def __post_init__(self):
        self.removed_edges = tuple(tuple(e) for e in self.removed_edges)
        if self.lexicographic_edge is not None:
            self.lexicographic_edge = tuple(self.lexicographic_edge)
        if not isinstance(self.source, str):
            self.source = tuple(self.source)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["removed_edges"] = [list(e) for e in self.removed_edges]
        d["lexicographic_edge"] = None if self.lexicographic_edge is None else list(self.lexicographic_edge)
        d["source"] = self.source if isinstance(self.source, str) else list(self.source)
        return d


@dataclass
class IslandPlan:
    """Ordered stages of islands.

    Islands source their seed population from ``"fresh"`` random
    individuals, from named islands of earlier stages, or from the
    ``"archive"`` filled by the seed stages.  The first `seed_stages` stages
    are repeated (at most `max_seed_rounds` times) until that archive holds
    `archive_target` individuals; the remaining stages then run once.  The
    whole plan runs `repeat` times into the same global archive.
    """

    stages: list[list[Island]]
    repeat: int = 1
    archive_target: int = 0
    max_seed_rounds: int = 1
    seed_stages: int | None = None

    def __post_init__(self):
        self.stages = [[i if isinstance(i, Island) else Island(**i) for i in stage] for stage in self.stages]
        if self.seed_stages is None:
            self.seed_stages = max(len(self.stages) - 1, 0)

    def validate(self, graph: CausalGraph) -> "IslandPlan":
        if not self.stages or not all(self.stages):
            raise ValueError("plan needs at least one non-empty stage")
        if not 0 <= self.seed_stages <= len(self.stages):
            raise ValueError("seed_stages out of range")
        seen: set[str] = set()
        for k, stage in enumerate(self.stages):
            names_here = set()
            for isl in stage:
                if isl.name in seen or isl.name in names_here:
                    raise ValueError(f"duplicate island name {isl.name!r}")
                names_here.add(isl.name)
                for e in isl.removed_edges:
                    if e not in graph.penalized_edges:
                        raise ValueError(f"island {isl.name!r} removes non-penalized edge {e}")
                if isl.mode not in MODES:
                    raise ValueError(f"island {isl.name!r} has unknown mode {isl.mode!r}")
                if isl.mode == "lexicographic":
                    if isl.lexicographic_edge is None or isl.lexicographic_edge in isl.removed_edges \
                            or isl.lexicographic_edge not in graph.penalized_edges:
                        raise ValueError(f"island {isl.name!r} needs a present penalized lexicographic edge")
                if isl.source == "archive":
                    if isl.removed_edges or k < self.seed_stages:
                        raise ValueError(f"island {isl.name!r}: archive seeding needs the full graph after the seed stages")
                elif isl.source != "fresh":
                    for src in isl.source:
                        if src not in seen:
                            raise ValueError(f"island {isl.name!r} sources {src!r} which is not an earlier island")
                if isl.population < 1 or isl.runs < 1 or isl.generations < 0:
                    raise ValueError(f"island {isl.name!r} has invalid sizes")
            seen |= names_here
        return self

    def to_dict(self) -> dict:
        return {
            "stages": [[i.to_dict() for i in stage] for stage in self.stages],
            "repeat": self.repeat,
            "archive_target": self.archive_target,
            "max_seed_rounds": self.max_seed_rounds,
            "seed_stages": self.seed_stages,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IslandPlan":
        return cls(**data)


def _scaled(n: int, scale: float, minimum: int = 8) -> int:
    return max(minimum, int(round(n * scale)))


def default_plan(graph: CausalGraph, scale: float = 1.0, repeat: int = 1) -> IslandPlan:
    """The staged recipe, with every size multiplied by `scale`.

    Stage 1 evolves a min-TVD island on the graph with every penalized edge
    removed and, per penalized edge, a lexicographic island on the graph
    keeping only that edge.  Stage 2 evolves each two-objective front from
    the pooled stage-1 survivors.  With more than one penalized edge a third
    stage evolves the full front from the seed archive.
    """
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    edges = graph.penalized_edges
    pop1, gen1 = _scaled(300, scale), _scaled(400, scale)
    pop2, gen2 = _scaled(400, scale), _scaled(400, scale)
    pop3, gen3 = _scaled(2000, scale), _scaled(800, scale)
    if not edges:
        return IslandPlan([[Island("min_tvd", population=pop1, runs=4, generations=gen1)]], repeat=repeat)
    stage1 = [Island("min_tvd", removed_edges=edges, population=pop1, runs=4, generations=gen1)]
    for e in edges:
        others = tuple(o for o in edges if o != e)
        stage1.append(Island(f"extreme_{e[0]}_{e[1]}", removed_edges=others, mode="lexicographic",
                             lexicographic_edge=e, population=pop1, runs=4, generations=gen1))
    stage2 = []
    for e in edges:
        others = tuple(o for o in edges if o != e)
        stage2.append(Island(f"front_{e[0]}_{e[1]}", removed_edges=others,
                             source=("min_tvd", f"extreme_{e[0]}_{e[1]}"),
                             population=pop2, runs=1, generations=gen2, seed_size=pop2))
    if len(edges) == 1:
        return IslandPlan([stage1, stage2], repeat=repeat, seed_stages=1)
    stage3 = [Island("full", source="archive", population=pop3, runs=1, generations=gen3)]
    return IslandPlan([stage1, stage2, stage3], repeat=repeat,
                      archive_target=pop3, max_seed_rounds=5, seed_stages=2)


@dataclass
class IslandResult:
    front: ParetoFront
    archive: EpsilonArchive
    n_evaluations: int
    seed: int
    log: list[dict] = field(default_factory=list)
    stage_hypervolumes: list[float] = field(default_factory=list)


def _run_seed(base: int, k: int) -> int:
    if k == 0:
        return base
    return int(np.random.SeedSequence([base, k]).generate_state(2, np.uint64)[0] % (2**63))


def run_island_plan(
    plan: IslandPlan,
    graph: CausalGraph,
    freq: FrequencyTable,
    base_config: EvolutionConfig,
    strict: bool = False,
) -> IslandResult:
    """Execute a plan and return the global front and archive on the full graph.

    Run ``k`` of the plan (counting every island run in order) uses
    ``base_config.seed`` for ``k = 0`` and a seed derived from it otherwise,
    so a one-island, one-run plan reproduces ``run_evolution`` exactly.
    Failing island runs are logged and skipped unless `strict` is set.
    """
    check_graph(graph)
    plan.validate(graph)
    base_seed = base_config.seed
    if base_seed is None:
        base_seed = int(np.random.SeedSequence().entropy % (2**63))
    full_eval = Evaluator(graph, freq, threads=base_config.threads)
    evaluators: dict = {}
    front = ParetoFront()
    archive = EpsilonArchive(base_config.epsilon_abs, base_config.epsilon_rel)
    result = IslandResult(front, archive, 0, base_seed)
    counter = 0

    def spent() -> int:
        return full_eval.n_evaluations + sum(e.n_evaluations for e in evaluators.values())

    def island_graph(isl: Island) -> CausalGraph:
        return graph.without_edges(isl.removed_edges) if isl.removed_edges else graph

    def evaluator_for(isl: Island, g: CausalGraph) -> Evaluator:
        if isl.mode == "multi" and g == graph:
            return full_eval
        key = (g, isl.mode, isl.lexicographic_edge)
        if key not in evaluators:
            edges = (isl.lexicographic_edge,) if isl.mode == "lexicographic" else None
            evaluators[key] = Evaluator(g, freq, edges=edges, threads=base_config.threads)
        return evaluators[key]

    def select(isl: Island, inds: list[Individual], n: int) -> list[Individual]:
        if len(inds) <= n:
            return inds
        pick = lexicographic_select if isl.mode == "lexicographic" else nsga2_select
        return [inds[k] for k in pick(fitness_matrix(inds), n)]

    def seeds_for(isl, g, ev, outputs, seed_archive, rng) -> list[Individual] | None:
        if isl.source == "fresh":
            return None
        if isl.source == "archive":
            pool = [ind for _, ind in seed_archive]
            if ev is not full_eval:
                pool = [Individual(graph, ind.tensors) for ind in pool]
        else:
            pool = []
            for name in isl.source:
                for src_graph, pop in outputs.get(name, []):
                    pool.extend(transplant(pop, src_graph, g))
        ev([ind for ind in pool if ind.fitness is None])
        chosen = select(isl, pool, isl.seed_size or isl.population)
        while len(chosen) < isl.population:
            chosen.append(create_individual(g, rng))
        return chosen

    def run_stage(k, stage, outputs, seed_archive, feed_seed, tags):
        nonlocal counter
        for isl in stage:
            g = island_graph(isl)
            ev = evaluator_for(isl, g)
            for r in range(isl.runs):
                seed = _run_seed(base_seed, counter)
                counter += 1
                cfg = base_config.replace(
                    mu=isl.population, lambda_=isl.population, generations=isl.generations, seed=seed,
                    selection="lexicographic" if isl.mode == "lexicographic" else "nsga2")
                before = spent()
                entry = dict(tags, stage=k, island=isl.name, run=r, seed=seed)
                try:
                    init = seeds_for(isl, g, ev, outputs, seed_archive,
                                     np.random.default_rng(np.random.SeedSequence([seed, 7])))
                    if ev is full_eval:
                        res = run_evolution(g, freq, cfg, init, evaluator=ev, front=front, archive=archive)
                        exported = list(res.population)
                    else:
                        res = run_evolution(g, freq, cfg, init, evaluator=ev)
                        exported = transplant([ind for _, ind in res.archive] + res.population, g, graph)
                        full_eval(exported)
                        archive.offer_many((i.fitness for i in exported), exported)
                        front.update((i.fitness for i in exported), exported)
                    if feed_seed:
                        seed_archive.offer_many((i.fitness for i in exported), exported)
                    outputs.setdefault(isl.name, []).append((g, res.population))
                    entry.update(status="ok", best=fitness_matrix(res.population).min(axis=0).tolist())
                except Exception as exc:  # noqa: BLE001 - one failed island must not sink the plan
                    if strict:
                        raise
                    log.exception("island %s run %d failed", isl.name, r)
                    entry.update(status="failed", error=repr(exc))
                entry["evaluations"] = spent() - before
                result.log.append(entry)
        result.stage_hypervolumes.append(hypervolume(archive.points()) if len(archive) else 0.0)

    try:
        for rep in range(plan.repeat):
            seed_archive = EpsilonArchive(base_config.epsilon_abs, base_config.epsilon_rel)
            outputs: dict[str, list] = {}
            for rnd in range(plan.max_seed_rounds if plan.seed_stages else 0):
                outputs = {}
                for k in range(plan.seed_stages):
                    run_stage(k, plan.stages[k], outputs, seed_archive, True, {"repeat": rep, "round": rnd})
                if len(seed_archive) >= plan.archive_target:
                    break
            for k in range(plan.seed_stages, len(plan.stages)):
                run_stage(k, plan.stages[k], outputs, seed_archive, False, {"repeat": rep, "round": None})
    finally:
        for ev in evaluators.values():
            ev.close()
        full_eval.close()
    result.n_evaluations = spent()
    return result
