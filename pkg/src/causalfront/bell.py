"""Synthetic two-qubit polarization Bell data.

The source state is

    rho(gamma) = (1 + gamma)/2 |Phi+><Phi+| + (1 - gamma)/2 |Phi-><Phi-|,
    |Phi+-> = (|HV> +- |VH>) / sqrt(2),

and each party measures linear polarization at one of two analyser angles.
Outcome 0 is the transmitted port (``H`` after the wave plates), outcome 1
the reflected port.  Settings are chosen uniformly, so every ``(x, y)`` pair
carries weight 1/4 in the frequency table ``F[a, b, x, y]``.

With the default angles the CHSH value is ``S(gamma) = sqrt(2) (1 + gamma)``:
2 sqrt(2) for the Bell state, 2 at ``gamma = sqrt(2) - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import FrequencyTable

BELL_VARS = ("a", "b", "x", "y")
CHSH_THRESHOLD = np.sqrt(2.0) - 1.0


def gamma_state(gamma: float) -> np.ndarray:
    """4x4 density matrix in the ``|HH>, |HV>, |VH>, |VV>`` basis."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    hv = np.zeros(4, complex)
    hv[1] = 1.0
    vh = np.zeros(4, complex)
    vh[2] = 1.0
    plus = (hv + vh) / np.sqrt(2)
    minus = (hv - vh) / np.sqrt(2)
    return (1 + gamma) / 2 * np.outer(plus, plus.conj()) + (1 - gamma) / 2 * np.outer(minus, minus.conj())


@dataclass(frozen=True)
class MeasurementSettings:
    """Analyser angles (radians, polarization plane) per party and setting."""

    alice: tuple[float, float] = (0.0, np.pi / 4)
    bob: tuple[float, float] = (-3 * np.pi / 8, 3 * np.pi / 8)

    def to_dict(self) -> dict:
        return {"alice": list(map(float, self.alice)), "bob": list(map(float, self.bob))}


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def wave_plate_unitary(theta_a: float, theta_b: float) -> np.ndarray:
    """Unitary mapping the analyser bases onto the computational ``H/V`` basis."""
    return np.kron(_rotation(theta_a).conj().T, _rotation(theta_b).conj().T)


def exact_frequencies(gamma: float, settings: MeasurementSettings | None = None) -> np.ndarray:
    settings = settings or MeasurementSettings()
    rho = gamma_state(gamma)
    table = np.zeros((2, 2, 2, 2))
    for x, ta in enumerate(settings.alice):
        for y, tb in enumerate(settings.bob):
            u = wave_plate_unitary(ta, tb)
            probs = np.real(np.diag(u @ rho @ u.conj().T)).reshape(2, 2)
            table[:, :, x, y] = 0.25 * np.clip(probs, 0.0, None)
    return table / table.sum()


def generate_frequencies(
    gamma: float,
    settings: MeasurementSettings | None = None,
    shots: int | None = None,
    rng: np.random.Generator | int | None = None,
) -> FrequencyTable:
    """Frequency table ``F[a, b, x, y]`` for the gamma state.

    Without `shots` the exact Born-rule table is returned.  With `shots`,
    that many events are drawn from it multinomially and normalized.
    """
    table = exact_frequencies(gamma, settings)
    if shots is not None:
        if shots <= 0:
            raise ValueError("shots must be positive")
        rng = np.random.default_rng(rng)
        counts = rng.multinomial(int(shots), table.reshape(-1))
        table = counts.reshape(table.shape) / shots
    return FrequencyTable(BELL_VARS, table, True)


def correlators(freq: FrequencyTable) -> np.ndarray:
    """``E[x, y] = F(00|xy) - F(01|xy) - F(10|xy) + F(11|xy)``."""
    f = freq.aligned(BELL_VARS)
    if f.shape != (2, 2, 2, 2):
        raise ValueError("CHSH needs binary a, b, x, y")
    weight = f.sum(axis=(0, 1))
    if np.any(weight <= 0):
        raise ValueError("every setting pair needs non-zero frequency")
    cond = f / weight
    return cond[0, 0] - cond[0, 1] - cond[1, 0] + cond[1, 1]


def chsh(freq: FrequencyTable) -> float:
    """``S = E[x1 y1] - E[x2 y1] + E[x1 y2] + E[x2 y2]``."""
    e = correlators(freq)
    return float(e[0, 0] - e[1, 0] + e[0, 1] + e[1, 1])
