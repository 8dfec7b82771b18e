import numpy as np
import pytest

from causalfront.bell import (BELL_VARS, CHSH_THRESHOLD, MeasurementSettings, chsh, correlators,
                              exact_frequencies, gamma_state, generate_frequencies)
from causalfront.metrics import FrequencyTable
from oracles import bell_probability


@pytest.mark.parametrize("gamma", [0.0, 0.3, 0.6, 0.984, 1.0])
def test_table_matches_closed_form(gamma):
    s = MeasurementSettings()
    t = exact_frequencies(gamma)
    for a, b, x, y in np.ndindex(2, 2, 2, 2):
        want = 0.25 * bell_probability(gamma, s.alice[x], s.bob[y], a, b)
        assert t[a, b, x, y] == pytest.approx(want, abs=1e-14)


@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_chsh_is_linear_in_gamma(gamma):
    assert chsh(generate_frequencies(gamma)) == pytest.approx(np.sqrt(2) * (1 + gamma), abs=1e-12)


def test_chsh_anchors():
    assert abs(chsh(generate_frequencies(1.0)) - 2 * np.sqrt(2)) <= 1e-9
    assert abs(chsh(generate_frequencies(CHSH_THRESHOLD)) - 2) <= 1e-9


def test_state_is_a_density_matrix():
    for gamma in (0.0, 0.5, 1.0):
        rho = gamma_state(gamma)
        np.testing.assert_allclose(rho, rho.conj().T)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.linalg.eigvalsh(rho).min() >= -1e-12
    with pytest.raises(ValueError):
        gamma_state(1.2)


def test_uniform_settings_and_marginals():
    f = generate_frequencies(0.7)
    np.testing.assert_allclose(f.values.sum(axis=(0, 1)), 0.25)
    np.testing.assert_allclose(f.marginal(("a", "x")), 0.25)
    assert f.observable_vars == BELL_VARS


def test_sampled_table_converges_and_is_seeded():
    a = generate_frequencies(0.984, shots=10_000, rng=3)
    b = generate_frequencies(0.984, shots=10_000, rng=3)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.values.sum() == pytest.approx(1.0)
    big = generate_frequencies(0.984, shots=1_000_000, rng=4)
    assert abs(chsh(big) - np.sqrt(2) * 1.984) < 0.02
    with pytest.raises(ValueError):
        generate_frequencies(0.5, shots=0)


def test_correlators_need_mass_on_every_setting():
    v = np.zeros((2, 2, 2, 2))
    v[0, 0, 0, 0] = 1
    with pytest.raises(ValueError):
        correlators(FrequencyTable(BELL_VARS, v))
