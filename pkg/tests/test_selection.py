import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from causalfront.selection import (crowding_distance, lexicographic_compare, lexicographic_order,
                                   lexicographic_select, non_dominated_sort, nsga2_select)
from oracles import brute_crowding, brute_nsga2, brute_ranks


def ranks_of(fronts, n):
    r = np.empty(n, int)
    for k, f in enumerate(fronts):
        r[f] = k
    return r


def test_sort_matches_oracle(rng):
    for _ in range(50):
        n, k = int(rng.integers(1, 40)), int(rng.integers(1, 4))
        f = rng.integers(0, 6, size=(n, k)).astype(float)
        assert ranks_of(non_dominated_sort(f), n).tolist() == brute_ranks(f.tolist())


def test_crowding_matches_oracle(rng):
    for _ in range(50):
        n = int(rng.integers(1, 20))
        f = rng.random((n, 3))
        np.testing.assert_allclose(crowding_distance(f), brute_crowding(f.tolist()))


def test_nsga2_matches_oracle(rng):
    for _ in range(50):
        n, k = int(rng.integers(2, 50)), int(rng.integers(2, 4))
        f = rng.random((n, k))
        mu = int(rng.integers(1, n + 1))
        assert sorted(nsga2_select(f, mu).tolist()) == sorted(brute_nsga2(f.tolist(), mu))


def test_nsga2_keeps_extremes():
    f = np.array([[0.0, 1.0], [0.2, 0.8], [0.5, 0.5], [0.55, 0.45], [1.0, 0.0]])
    assert set(nsga2_select(f, 2).tolist()) == {0, 4}
    with pytest.raises(ValueError):
        nsga2_select(f, 6)


def test_duplicates_share_a_rank():
    f = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
    assert ranks_of(non_dominated_sort(f), 3).tolist() == [0, 0, 1]


def test_lexicographic_tolerance():
    assert lexicographic_compare([0.1, 5.0], [0.1 + 1e-12, 1.0]) == 1
    assert lexicographic_compare([0.1, 5.0], [0.2, 1.0]) == -1
    assert lexicographic_compare([0.1, 1.0], [0.1, 1.0]) == 0
    f = np.array([[0.3, 0.0], [0.1, 0.9], [0.1 + 5e-10, 0.2], [0.2, 0.1]])
    assert lexicographic_order(f).tolist() == [2, 1, 3, 0]
    assert lexicographic_select(f, 2).tolist() == [2, 1]


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 25), st.integers(1, 3)), elements=st.floats(0, 1, width=16)))
def test_first_front_is_mutually_non_dominated(f):
    first = f[non_dominated_sort(f)[0]]
    for u in first:
        assert not any(np.all(v <= u) and np.any(v < u) for v in f)
