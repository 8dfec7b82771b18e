"""Analytic bound relating fit quality to causal influence, and front audits.

For any model whose TVD to the data is at most ``tau`` and ``tau < 2 f*``,

    |C(F) - C(M)| <= 2 tau (4 f* - tau) / (f* (2 f* - tau)),

where ``f*`` is the smallest empirical frequency ``F(a, y)`` over joint
assignments of the edge source ``a`` and the conditioning set ``y``.

Note: some statements of this bound take ``f* = min_a F(a)``; the proof only
goes through with the joint minimum over ``(a, y)``, which is what is used here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Edge
from .metrics import FrequencyTable, causal_influence_empirical, influence_conditioning
from .model import Individual, contract, observable_joint

AUDIT_SLACK = 1e-9


class BoundInapplicable(ValueError):
    """The TVD budget is too large for the bound (``tau >= 2 f*``)."""


def theorem_bound(tau: float, f_star: float) -> float:
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    if not 0 < f_star <= 1:
        raise ValueError(f"f_star must lie in (0, 1], got {f_star}")
    if tau >= 2 * f_star:
        raise BoundInapplicable(f"tau={tau} >= 2 f*={2 * f_star}")
    return 2 * tau * (4 * f_star - tau) / (f_star * (2 * f_star - tau))


def min_marginal_frequency(freq: FrequencyTable, a: str, y: Sequence[str] = ()) -> float:
    """``min over (a, y) of F(a, y)``."""
    return float(freq.marginal((a,) + tuple(y)).min())


def harmonic_mean(x1: float, x2: float) -> float:
    if x1 <= 0 or x2 <= 0:
        raise ValueError("harmonic mean needs positive arguments")
    return 2 * x1 * x2 / (x1 + x2)


def fixed_model_bound(individual: Individual, freq: FrequencyTable, edge: Edge) -> float:
    """Model-dependent bound ``4 TVD(M) / min H(Pr(a, y | M), F(a, y))``.

    The minimum runs over assignments where both frequencies are positive.
    Returns ``inf`` when no such assignment exists.
    """
    graph = individual.graph
    cond = influence_conditioning(graph, edge)
    keep = (edge[0],) + cond
    model_marg = contract(graph, individual.tensors, keep)
    data_marg = freq.marginal(keep)
    ok = (model_marg > 0) & (data_marg > 0)
    if not np.any(ok):
        return math.inf
    p, q = model_marg[ok], data_marg[ok]
    h = (2 * p * q / (p + q)).min()
    joint = observable_joint(individual)
    t = float(np.abs(joint.values - freq.aligned(joint.target_vars)).sum())
    return 4 * t / h


@dataclass
class AuditRow:
    tau: float
    C_model: float
    C_empirical: float
    bound: float | None
    ok: bool | None
    status: str  # "ok", "violation" or "inapplicable"

    def to_dict(self) -> dict:
        return asdict(self)


def audit_front(
    points: Iterable[tuple[float, float]],
    freq: FrequencyTable,
    edge: Edge,
    conditioning: Sequence[str] = (),
    slack: float = AUDIT_SLACK,
) -> list[AuditRow]:
    """Check each ``(tau, C_model)`` point against the bound.

    Points with ``tau >= 2 f*`` are reported as inapplicable rather than failed.
    """
    points = list(points)
    if not points:
        return []
    c_emp = causal_influence_empirical(freq, edge, conditioning)
    f_star = min_marginal_frequency(freq, edge[0], conditioning)
    rows = []
    for tau, c_model in points:
        tau, c_model = float(tau), float(c_model)
        try:
            bound = theorem_bound(tau, f_star)
        except (BoundInapplicable, ValueError):
            rows.append(AuditRow(tau, c_model, c_emp, None, None, "inapplicable"))
            continue
        ok = abs(c_emp - c_model) <= bound + slack
        rows.append(AuditRow(tau, c_model, c_emp, bound, ok, "ok" if ok else "violation"))
    return rows
