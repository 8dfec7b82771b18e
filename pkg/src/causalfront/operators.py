"""Creation, crossover and mutation of individuals."""

from __future__ import annotations

import numpy as np

from .graph import CausalGraph, GraphError, check_graph
from .model import Individual


def random_tensor(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Uniform [0, 1] draws, each column renormalized to sum to one."""
    while True:
        raw = rng.random(shape)
        sums = raw.sum(axis=0, keepdims=True)
        if np.all(sums > 0):
            return raw / sums


def create_individual(graph: CausalGraph, rng: np.random.Generator) -> Individual:
    check_graph(graph)
    return Individual(graph, [random_tensor(graph.tensor_shape(n), rng) for n in graph.names])


def crossover(
    i1: Individual, i2: Individual, rng: np.random.Generator, swap_prob: float = 0.5
) -> tuple[Individual, Individual]:
    """Exchange whole node tensors between two parents, node by node."""
    if i1.graph != i2.graph:
        raise GraphError("crossover between individuals on different graphs")
    swap = rng.random(len(i1.tensors)) < swap_prob
    t1 = [b if s else a for a, b, s in zip(i1.tensors, i2.tensors, swap)]
    t2 = [a if s else b for a, b, s in zip(i1.tensors, i2.tensors, swap)]
    return Individual(i1.graph, t1), Individual(i1.graph, t2)


def mutate(ind: Individual, sigma: float, rng: np.random.Generator) -> Individual:
    """Gaussian nudge of one tensor entry, then clip and renormalize its column.

    If the column sums to zero after clipping it is reset to uniform.
    """
    k = int(rng.integers(len(ind.tensors)))
    t = np.array(ind.tensors[k])
    flat = int(rng.integers(t.size))
    idx = np.unravel_index(flat, t.shape)
    t[idx] = min(1.0, max(0.0, t[idx] + rng.normal(0.0, sigma)))
    col = (slice(None),) + tuple(idx[1:])
    total = t[col].sum()
    if total > 0:
        t[col] = t[col] / total
    else:
        t[col] = 1.0 / t.shape[0]
    return ind.with_tensors({k: t})
