"""Individuals (one conditional tensor per node) and distributions derived from them.

Every node tensor stores ``Pr(node | parents)`` with the node's own value as
the leading index, ``X[j0, j1, ..., jn]``.  Joint and conditional
distributions are obtained by contracting the tensors of the ancestral
closure of the requested variables with ``numpy.einsum``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .graph import CausalGraph, GraphError, check_graph

COLUMN_ATOL = 1e-9
# Condition cells whose marginal probability falls below this are infeasible.
FEASIBILITY_THRESHOLD = 1e-12


class Individual:
    """A causal model on a fixed graph.

    ``fitness`` is metadata filled in by evaluation; it is not part of the
    genome and is never copied by the genetic operators.
    """

    __slots__ = ("graph", "tensors", "fitness")

    def __init__(self, graph: CausalGraph, tensors: Sequence[np.ndarray], fitness=None):
        if len(tensors) != len(graph.nodes):
            raise GraphError(f"expected {len(graph.nodes)} tensors, got {len(tensors)}")
        frozen = []
        for node, t in zip(graph.nodes, tensors):
            arr = np.asarray(t, dtype=float)
            shape = graph.tensor_shape(node.name)
            if arr.shape != shape:
                raise GraphError(f"tensor for {node.name!r} has shape {arr.shape}, expected {shape}")
            if arr.flags.writeable:
                arr = arr.copy()
                arr.flags.writeable = False
            frozen.append(arr)
        self.graph = graph
        self.tensors = tuple(frozen)
        self.fitness = fitness

    def tensor(self, name: str) -> np.ndarray:
        return self.tensors[self.graph.index(name)]

    def with_tensors(self, replacements: dict[int, np.ndarray]) -> "Individual":
        tensors = list(self.tensors)
        for k, t in replacements.items():
            tensors[k] = t
        return Individual(self.graph, tensors)

    def __repr__(self):
        fit = None if self.fitness is None else np.round(self.fitness, 6).tolist()
        return f"Individual(nodes={list(self.graph.names)}, fitness={fit})"


def tensor_problems(graph: CausalGraph, tensors: Sequence[np.ndarray], atol: float = COLUMN_ATOL) -> list[str]:
    problems = []
    for node, t in zip(graph.nodes, tensors):
        t = np.asarray(t)
        if t.shape != graph.tensor_shape(node.name):
            problems.append(f"{node.name}: shape {t.shape} != {graph.tensor_shape(node.name)}")
            continue
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            problems.append(f"{node.name}: entries outside [0, 1]")
        sums = t.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > atol):
            problems.append(f"{node.name}: columns do not sum to 1 (worst {np.max(np.abs(sums - 1)):.3g})")
    return problems


def check_individual(ind: Individual, atol: float = COLUMN_ATOL) -> Individual:
    problems = tensor_problems(ind.graph, ind.tensors, atol)
    if problems:
        raise GraphError("invalid individual: " + "; ".join(problems))
    return ind


def individual_from_arrays(graph: CausalGraph, arrays: dict[str, np.ndarray]) -> Individual:
    """Build a validated individual from ``{node name: tensor}``."""
    check_graph(graph)
    missing = set(graph.names) - set(arrays)
    if missing:
        raise GraphError(f"missing tensors for {sorted(missing)}")
    return check_individual(Individual(graph, [np.asarray(arrays[n], float) for n in graph.names]))


@dataclass(frozen=True)
class DistributionTensor:
    """``values[targets..., conditions...]``; ``feasible`` is indexed by conditions only."""

    target_vars: tuple[str, ...]
    condition_vars: tuple[str, ...]
    values: np.ndarray
    feasible: np.ndarray

    @property
    def is_joint(self) -> bool:
        return not self.condition_vars


def ancestral_closure(graph: CausalGraph, variables: Iterable[str]) -> list[str]:
    """Variables plus all their ancestors, pulled in parent-set by parent-set."""
    included: set[str] = set()
    pending = set(variables)
    while pending:
        included |= pending
        pending = {p for name in pending for p in graph.parents(name)} - included
    return [name for name in graph.names if name in included]


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


@lru_cache(maxsize=4096)
def _contraction_plan(graph: CausalGraph, keep: tuple[str, ...]) -> tuple[str, tuple[int, ...]]:
    if len(graph.nodes) > len(_LETTERS):
        raise GraphError("graph too large for einsum subscripts")
    closure = ancestral_closure(graph, keep)
    letter = {name: _LETTERS[graph.index(name)] for name in graph.names}
    operands = []
    for name in closure:
        axes = (name,) + graph.parents(name)
        operands.append("..." + "".join(letter[a] for a in axes))
    out = "..." + "".join(letter[k] for k in keep)
    return ",".join(operands) + "->" + out, tuple(graph.index(n) for n in closure)


def contract(graph: CausalGraph, tensors: Sequence[np.ndarray], keep: Sequence[str]) -> np.ndarray:
    """Joint probability ``Pr(keep)`` from node tensors.

    Tensors may carry identical leading batch dimensions, in which case the
    result is batched the same way.
    """
    keep = tuple(keep)
    if len(set(keep)) != len(keep):
        raise ValueError("repeated variable in contraction")
    subscripts, idx = _contraction_plan(graph, keep)
    return np.einsum(subscripts, *[tensors[i] for i in idx])


def _conditional(joint: np.ndarray, n_batch: int, n_targets: int) -> tuple[np.ndarray, np.ndarray]:
    """Divide ``joint[batch..., targets..., conditions...]`` by its condition marginal."""
    target_axes = tuple(range(n_batch, n_batch + n_targets))
    marginal = joint.sum(axis=target_axes, keepdims=True)
    feasible = marginal >= FEASIBILITY_THRESHOLD
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(feasible, joint / np.where(feasible, marginal, 1.0), np.nan)
    return values, np.squeeze(feasible, axis=target_axes)


def joint_distribution(
    individual: Individual,
    targets: Sequence[str],
    conditions: Sequence[str] = (),
) -> DistributionTensor:
    """``Pr(targets | conditions)`` for one individual.

    With no conditions the result is the joint over `targets`.  Condition
    cells of (near) zero probability are marked infeasible and filled with NaN.
    """
    graph = individual.graph
    targets, conditions = tuple(targets), tuple(conditions)
    for name in targets + conditions:
        graph.index(name)
    if set(targets) & set(conditions):
        raise ValueError("targets and conditions must be disjoint")
    joint = contract(graph, individual.tensors, targets + conditions)
    if not conditions:
        return DistributionTensor(targets, (), joint, np.ones((), dtype=bool))
    values, feasible = _conditional(joint, 0, len(targets))
    return DistributionTensor(targets, conditions, values, feasible)


def observable_joint(individual: Individual) -> DistributionTensor:
    """Joint over the observable nodes (graph order), hidden nodes summed out."""
    obs = individual.graph.observables
    if not obs:
        raise GraphError("graph has no observable nodes")
    return joint_distribution(individual, obs)


def marginalize(dist: DistributionTensor, keep: Sequence[str]) -> DistributionTensor:
    """Sum out every target not in `keep`; the result follows the order of `keep`."""
    if dist.condition_vars:
        raise ValueError("marginalize expects a joint distribution")
    keep = tuple(keep)
    unknown = set(keep) - set(dist.target_vars)
    if unknown:
        raise ValueError(f"cannot keep {sorted(unknown)}: not targets of the distribution")
    drop = tuple(k for k, v in enumerate(dist.target_vars) if v not in keep)
    values = dist.values.sum(axis=drop)
    remaining = [v for v in dist.target_vars if v in keep]
    values = np.transpose(values, [remaining.index(v) for v in keep])
    return DistributionTensor(keep, (), values, np.ones((), dtype=bool))
