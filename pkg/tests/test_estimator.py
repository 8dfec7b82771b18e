import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from causalfront.bell import generate_frequencies
from causalfront.estimator import IslandSearch, ParetoSearch, check_frequency_table
from causalfront.metrics import FrequencyTable


def test_check_frequency_table_forms(rng):
    f = generate_frequencies(0.5)
    assert check_frequency_table(f) is f
    np.testing.assert_allclose(check_frequency_table(f.values * 40).values, f.values)
    events = rng.integers(0, 2, size=(1000, 4))
    t = check_frequency_table(events)
    assert t.values.shape == (2, 2, 2, 2) and t.values.sum() == pytest.approx(1.0)
    assert t.values[tuple(events[0])] > 0
    with pytest.raises(ValueError):
        check_frequency_table(np.ones((2, 2)))
    with pytest.raises(ValueError):
        check_frequency_table(np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValueError):
        check_frequency_table(np.full((1, 4), 2), shape=(2, 2, 2, 2))
    unnormalized = FrequencyTable(("a",), np.array([1.0, 3.0]), normalized=False)
    np.testing.assert_allclose(check_frequency_table(unnormalized).values, [0.25, 0.75])


def test_params_follow_sklearn_conventions():
    est = ParetoSearch(mu=12, generations=3)
    assert est.get_params()["mu"] == 12
    est.set_params(generations=4)
    assert clone(est).get_params() == est.get_params()
    assert set(IslandSearch().get_params()) >= {"plan", "scale", "repeat", "random_state"}


def test_fit_score_and_attributes():
    est = ParetoSearch(mu=16, lambda_=16, generations=5, random_state=3)
    with pytest.raises(NotFittedError):
        est.score()
    est.fit(generate_frequencies(0.984))
    assert est.front_.shape[1] == 2 and est.objective_names_ == ("tvd", "C[a->b]")
    assert len(est.archive_individuals_) == len(est.archive_)
    assert 0 < est.score() <= 4
    again = clone(est).fit(generate_frequencies(0.984))
    assert again.archive_.tobytes() == est.archive_.tobytes()


def test_local_graph_search_is_single_objective():
    est = ParetoSearch(penalized_edges=(), mu=10, lambda_=10, generations=3, random_state=0)
    est.fit(generate_frequencies(0.2))
    assert est.front_.shape == (1, 1)


def test_island_search_runs():
    est = IslandSearch(scale=0.02, random_state=1).fit(generate_frequencies(0.984))
    assert est.archive_.shape[1] == 2 and est.n_evaluations_ > 0 and est.log_
