import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from causalfront.pareto import (DominanceKDTree, EpsilonArchive, ParetoFront, hypervolume,
                                non_dominated_mask)
from oracles import dominates, inclusion_exclusion_hv


def test_kdtree_query_matches_scan(rng):
    for k in (2, 3, 4):
        pts = rng.random((300, k))
        tree = DominanceKDTree(pts[:150])
        for p in pts[150:200]:
            tree.insert(p)
        stored = pts[:200]
        for q in rng.random((200, k)):
            assert tree.any_weakly_dominating(q) == bool(np.any(np.all(stored <= q, axis=1)))
        for q in stored[:20]:
            assert tree.any_weakly_dominating(q)


@pytest.mark.parametrize("limit", [4, 64])
def test_front_is_the_non_dominated_subset(rng, limit):
    pts = np.round(rng.random((400, 3)), 2)
    front = ParetoFront(linear_scan_limit=limit)
    for chunk in np.array_split(np.arange(len(pts)), 20):
        front.update(pts[chunk], chunk.tolist())
    got = front.points()
    for p in got:
        assert not any(dominates(q, p) for q in pts)
    # every non-dominated value is represented (duplicates collapse to one)
    want = {tuple(p) for p in pts[non_dominated_mask(pts)]}
    assert {tuple(p) for p in got} == want
    assert len(got) == len(want)


def test_front_rejects_weakly_dominated():
    front = ParetoFront()
    assert front.offer([0.5, 0.5])
    assert not front.offer([0.5, 0.5])
    assert not front.offer([0.6, 0.5])
    assert front.offer([0.4, 0.9])
    front.offer([0.1, 0.1])
    assert front.prune() == 2
    assert front.points().tolist() == [[0.1, 0.1]]


def test_front_hypervolume_never_drops(rng):
    front = ParetoFront(linear_scan_limit=8)
    last = 0.0
    for _ in range(30):
        batch = rng.random((20, 2)) * 2
        front.update(batch, [None] * 20)
        hv = hypervolume(front.points())
        assert hv >= last - 1e-12
        last = hv


def archive_invariant(arc):
    pts = arc.points()
    for i, u in enumerate(pts):
        for j, w in enumerate(pts):
            if i != j:
                assert not arc.eps_dominates(u, w)


def test_archive_basics():
    arc = EpsilonArchive()
    assert arc.offer([0.5, 0.5], "a")
    assert not arc.offer([0.5, 0.5], "b")
    assert not arc.offer([0.5 + 1e-9, 0.5])
    assert arc.offer([0.4, 0.4], "c")
    assert len(arc) == 1 and arc.individuals == ["c"]


def test_archive_invariant_under_random_offers(rng):
    arc = EpsilonArchive(epsilon_abs=1e-3, epsilon_rel=1e-2)
    for _ in range(1500):
        arc.offer(rng.random(2))
    archive_invariant(arc)
    # a point within epsilon of a member is rejected
    m = arc.points()[0]
    assert not arc.offer(m + 5e-4)


def test_archive_covers_everything_offered(rng):
    arc = EpsilonArchive(epsilon_abs=1e-3, epsilon_rel=0.0)
    seen = rng.random((500, 3))
    arc.offer_many(seen, range(500))
    pts = arc.points()
    # each offered point is epsilon-dominated by a member, up to chains of removals
    for p in seen:
        assert np.any(np.all(pts <= p + 1e-3 * 3, axis=1))


def test_hypervolume_hand_values():
    assert hypervolume([[1.0, 1.0]]) == pytest.approx(1.0)
    assert hypervolume([[0.0, 1.0], [1.0, 0.0]]) == pytest.approx(3.0)
    assert hypervolume([[0.5]], ref=[2.0]) == pytest.approx(1.5)
    assert hypervolume([[1.0, 1.0, 1.0]]) == pytest.approx(1.0)
    assert hypervolume([[3.0, 0.0]]) == 0.0
    assert hypervolume(np.empty((0, 2))) == 0.0


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 8), st.integers(2, 4)), elements=st.floats(0, 2.5, width=16)))
def test_hypervolume_matches_inclusion_exclusion(pts):
    ref = [2.0] * pts.shape[1]
    assert hypervolume(pts) == pytest.approx(inclusion_exclusion_hv(pts.tolist(), ref), abs=1e-9)


def test_hypervolume_is_monotone_under_adding_points(rng):
    pts = rng.random((30, 3)) * 2
    vals = [hypervolume(pts[:k]) for k in range(1, 31)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
