import numpy as np
import pytest

from causalfront.graph import GraphError, bell_graph
from causalfront.model import tensor_problems
from causalfront.operators import create_individual, crossover, mutate, random_tensor


def test_random_tensor_columns(rng):
    t = random_tensor((3, 2, 4), rng)
    np.testing.assert_allclose(t.sum(axis=0), 1.0)
    assert t.min() >= 0


def test_created_individuals_are_valid(rng):
    g = bell_graph(extra_edges=[("a", "b"), ("x", "lambda")])
    for _ in range(20):
        assert not tensor_problems(g, create_individual(g, rng).tensors)


def test_crossover_swaps_whole_tensors(rng):
    g = bell_graph()
    p1, p2 = create_individual(g, rng), create_individual(g, rng)
    c1, c2 = crossover(p1, p2, rng)
    for k in range(len(g.nodes)):
        from_1 = c1.tensors[k] is p1.tensors[k]
        assert from_1 or c1.tensors[k] is p2.tensors[k]
        assert c2.tensors[k] is (p2.tensors[k] if from_1 else p1.tensors[k])
    assert c1.fitness is None and c2.fitness is None


def test_crossover_extremes(rng):
    g = bell_graph()
    p1, p2 = create_individual(g, rng), create_individual(g, rng)
    same, _ = crossover(p1, p2, rng, swap_prob=0.0)
    swapped, _ = crossover(p1, p2, rng, swap_prob=1.0)
    assert all(a is b for a, b in zip(same.tensors, p1.tensors))
    assert all(a is b for a, b in zip(swapped.tensors, p2.tensors))


def test_crossover_rejects_graph_mismatch(rng):
    a = create_individual(bell_graph(), rng)
    b = create_individual(bell_graph(extra_edges=[("a", "b")]), rng)
    with pytest.raises(GraphError):
        crossover(a, b, rng)


def test_mutation_touches_one_column(rng):
    g = bell_graph()
    ind = create_individual(g, rng)
    for _ in range(50):
        child = mutate(ind, 0.1, rng)
        changed = [k for k in range(len(g.nodes)) if not np.array_equal(child.tensors[k], ind.tensors[k])]
        assert len(changed) <= 1
        for k in changed:
            diff = np.any(child.tensors[k] != ind.tensors[k], axis=0)
            assert diff.sum() <= 1
        assert not tensor_problems(g, child.tensors)


def test_tiny_sigma_is_nearly_identity(rng):
    ind = create_individual(bell_graph(), rng)
    child = mutate(ind, 1e-15, rng)
    for a, b in zip(child.tensors, ind.tensors):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_zeroed_column_resets_to_uniform(rng):
    from causalfront.graph import CausalGraph, NodeSpec
    from causalfront.model import Individual
    g = CausalGraph((NodeSpec("u", 1),))
    ind = Individual(g, [np.array([1.0])])
    # a single-outcome column always renormalizes back to one
    for _ in range(20):
        assert mutate(ind, 5.0, rng).tensors[0][0] == 1.0


def test_operator_closure_property(rng):
    g = bell_graph(extra_edges=[("a", "b")])
    pop = [create_individual(g, rng) for _ in range(10)]
    for _ in range(2000):
        i, j = rng.integers(len(pop), size=2)
        if rng.random() < 0.3:
            child = crossover(pop[i], pop[j], rng)[0]
        else:
            child = mutate(pop[i], 0.5, rng)
        assert not tensor_problems(g, child.tensors)
        pop[int(rng.integers(len(pop)))] = child
