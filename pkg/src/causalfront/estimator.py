"""scikit-learn style front searches.

``ParetoSearch().fit(X)`` runs the basic evolutionary search and
``IslandSearch().fit(X)`` the staged island plan.  ``X`` is a frequency
table in any form accepted by `check_frequency_table`; ``score`` is the
dominated hypervolume of the fitted archive.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bell import BELL_VARS
from .evolution import EvolutionConfig, run_evolution
from .graph import CausalGraph, bell_graph, check_graph
from .island import IslandPlan, default_plan, run_island_plan
from .metrics import FrequencyTable, objective_names
from .pareto import hypervolume


def check_frequency_table(X, variables=BELL_VARS, shape=None) -> FrequencyTable:
    """Coerce `X` into a normalized `FrequencyTable`.

    Accepts a `FrequencyTable`, an array with one axis per variable (counts
    or frequencies), or a 2-D integer array of observed outcomes with one
    column per variable and one row per event.
    """
    if isinstance(X, FrequencyTable):
        return X if X.normalized else X.normalize()
    arr = np.asarray(X)
    variables = tuple(variables)
    if arr.ndim == 2 and arr.shape[1] == len(variables) and len(variables) != 2 \
            and np.issubdtype(arr.dtype, np.integer):
        if np.any(arr < 0):
            raise ValueError("outcome indices must be non-negative")
        if shape is None:
            shape = tuple(int(m) + 1 for m in arr.max(axis=0))
        if np.any(arr >= np.asarray(shape)):
            raise ValueError("outcome index exceeds the variable's cardinality")
        counts = np.zeros(shape)
        np.add.at(counts, tuple(arr.T), 1)
        return FrequencyTable(variables, counts, normalized=False).normalize()
    if arr.ndim != len(variables):
        raise ValueError(f"expected {len(variables)} axes or an (n, {len(variables)}) outcome array, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"table shape {arr.shape} does not match {tuple(shape)}")
    arr = arr.astype(float)
    if arr.sum() <= 0:
        raise ValueError("table has no mass")
    return FrequencyTable(variables, arr, normalized=False).normalize()


def _resolve_graph(graph, penalized_edges, hidden_cardinality) -> CausalGraph:
    if graph is None:
        return bell_graph(extra_edges=tuple(tuple(e) for e in penalized_edges),
                          hidden_cardinality=hidden_cardinality)
    return check_graph(graph)


class _FrontSearch(BaseEstimator):
    def _prepare(self, X):
        graph = _resolve_graph(self.graph, self.penalized_edges, self.hidden_cardinality)
        shape = tuple(graph.cardinality(v) for v in graph.observables)
        freq = check_frequency_table(X, graph.observables, shape)
        return graph, freq

    def _store(self, graph, front, archive, n_evaluations):
        self.graph_ = graph
        self.objective_names_ = objective_names(graph)
        self.front_ = front.points()
        self.front_individuals_ = list(front.individuals)
        self.archive_ = archive.points()
        self.archive_individuals_ = list(archive.individuals)
        self.n_evaluations_ = n_evaluations

    def score(self, X=None, y=None) -> float:
        """Dominated hypervolume of the archive (reference point 2 per objective)."""
        check_is_fitted(self, "archive_")
        return hypervolume(self.archive_)


class ParetoSearch(_FrontSearch):
    """Evolve the Pareto front of TVD against causal influence.

    With ``graph=None`` the Bell graph is built with `penalized_edges` added.
    """

    def __init__(self, graph=None, penalized_edges=(("a", "b"),), hidden_cardinality=4,
                 mu=300, lambda_=300, p_crossover=0.1, p_mutation=0.9, mutation_sigma=0.1,
                 generations=400, selection="nsga2", threads=1, random_state=None):
        self.graph = graph
        self.penalized_edges = penalized_edges
        self.hidden_cardinality = hidden_cardinality
        self.mu = mu
        self.lambda_ = lambda_
        self.p_crossover = p_crossover
        self.p_mutation = p_mutation
        self.mutation_sigma = mutation_sigma
        self.generations = generations
        self.selection = selection
        self.threads = threads
        self.random_state = random_state

    def _config(self) -> EvolutionConfig:
        return EvolutionConfig(
            mu=self.mu, lambda_=self.lambda_, p_crossover=self.p_crossover, p_mutation=self.p_mutation,
            mutation_sigma=self.mutation_sigma, generations=self.generations, seed=self.random_state,
            selection=self.selection, threads=self.threads)

    def fit(self, X, y=None):
        graph, freq = self._prepare(X)
        self.result_ = run_evolution(graph, freq, self._config())
        self.history_ = self.result_.history
        self._store(graph, self.result_.front, self.result_.archive, self.result_.n_evaluations)
        return self


class IslandSearch(_FrontSearch):
    """Staged island search; `plan` defaults to the scaled standard recipe."""

    def __init__(self, graph=None, penalized_edges=(("a", "b"),), hidden_cardinality=4,
                 plan=None, scale=0.3, repeat=1, p_crossover=0.1, p_mutation=0.9,
                 mutation_sigma=0.1, threads=1, random_state=None):
        self.graph = graph
        self.penalized_edges = penalized_edges
        self.hidden_cardinality = hidden_cardinality
        self.plan = plan
        self.scale = scale
        self.repeat = repeat
        self.p_crossover = p_crossover
        self.p_mutation = p_mutation
        self.mutation_sigma = mutation_sigma
        self.threads = threads
        self.random_state = random_state

    def fit(self, X, y=None):
        graph, freq = self._prepare(X)
        if self.plan is None:
            plan = default_plan(graph, self.scale, self.repeat)
        else:
            plan = self.plan if isinstance(self.plan, IslandPlan) else IslandPlan.from_dict(self.plan)
        self.plan_ = plan
        config = EvolutionConfig(p_crossover=self.p_crossover, p_mutation=self.p_mutation,
                                 mutation_sigma=self.mutation_sigma, seed=self.random_state,
                                 threads=self.threads)
        self.result_ = run_island_plan(plan, graph, freq, config)
        self.log_ = self.result_.log
        self._store(graph, self.result_.front, self.result_.archive, self.result_.n_evaluations)
        return self
