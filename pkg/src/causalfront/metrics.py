"""Fitness functions: total variational distance and causal influence.

Both objectives are minimized.  A fitness vector is a float array whose first
entry is the TVD and whose remaining entries are the causal influences along
the penalized edges, in the order the graph lists them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .graph import CausalGraph, Edge, GraphError
from .model import FEASIBILITY_THRESHOLD, DistributionTensor, Individual, contract


@dataclass(frozen=True)
class FrequencyTable:
    """Empirical joint frequencies over observable variables."""

    observable_vars: tuple[str, ...]
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "observable_vars", tuple(self.observable_vars))
        object.__setattr__(self, "values", values)
        if values.ndim != len(self.observable_vars):
            raise ValueError(
                f"table has {values.ndim} axes but {len(self.observable_vars)} variables"
            )
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("frequencies must be finite and non-negative")
        if self.normalized and abs(values.sum() - 1.0) > 1e-9:
            raise ValueError(f"normalized table sums to {values.sum()!r}, not 1")

    def normalize(self) -> "FrequencyTable":
        total = self.values.sum()
        if total <= 0:
            raise ValueError("cannot normalize an all-zero table")
        return FrequencyTable(self.observable_vars, self.values / total, True)

    def aligned(self, order: Sequence[str]) -> np.ndarray:
        """Values transposed to `order` (which must be a permutation of the variables)."""
        order = tuple(order)
        if sorted(order) != sorted(self.observable_vars):
            raise ValueError(f"variables {order} do not match table variables {self.observable_vars}")
        return np.transpose(self.values, [self.observable_vars.index(v) for v in order])

    def marginal(self, keep: Sequence[str]) -> np.ndarray:
        keep = tuple(keep)
        drop = tuple(k for k, v in enumerate(self.observable_vars) if v not in keep)
        rest = [v for v in self.observable_vars if v in keep]
        if len(rest) != len(keep):
            raise ValueError(f"{keep} not all in {self.observable_vars}")
        return np.transpose(self.values.sum(axis=drop), [rest.index(v) for v in keep])

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256(",".join(self.observable_vars).encode())
        h.update(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        return h.hexdigest()


def tvd(model_joint: DistributionTensor | np.ndarray, freq: FrequencyTable) -> float:
    """L1 distance between a model joint and the empirical frequencies (range [0, 2])."""
    if isinstance(model_joint, DistributionTensor):
        if model_joint.condition_vars:
            raise ValueError("TVD needs a joint distribution, not a conditional")
        target = freq.aligned(model_joint.target_vars)
        values = model_joint.values
    else:
        values = np.asarray(model_joint, float)
        target = freq.values
    if values.shape != target.shape:
        raise ValueError(f"shape mismatch: model {values.shape} vs frequencies {target.shape}")
    if not freq.normalized:
        raise ValueError("frequency table must be normalized")
    return float(np.abs(values - target).sum())


class Influence(NamedTuple):
    value: float
    witness: tuple | None  # (x_i, x_i', conditioning assignment) of the maximum
    degenerate: bool


def influence_conditioning(graph: CausalGraph, edge: Edge) -> tuple[str, ...]:
    """Parents of the target that are conditioned on (and maximized over).

    Parents of the target that are also grandparents of it are summed out,
    as is the source itself.
    """
    src, dst = edge
    if not graph.has_edge(edge):
        raise GraphError(f"{src}->{dst} is not an edge of the graph")
    grand = graph.grandparents(dst)
    return tuple(p for p in graph.parents(dst) if p != src and p not in grand)


def _max_column_distance(joint: np.ndarray, n_batch: int):
    """Max L1 distance between conditional columns ``Pr(t | s, k)`` vs ``Pr(t | s', k)``.

    `joint` is laid out ``[batch..., t, s, k...]``.  Returns per-batch
    ``(value, argmax flat index or -1, degenerate)``.
    """
    batch_shape = joint.shape[:n_batch]
    dt, ds = joint.shape[n_batch], joint.shape[n_batch + 1]
    j = joint.reshape(batch_shape + (dt, ds, -1))
    marg = j.sum(axis=n_batch)  # [batch, s, k]
    feasible = marg >= FEASIBILITY_THRESHOLD
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = j / np.where(feasible, marg, 1.0)[..., None, :, :]
    # [batch, t, s, s', k] -> sum over t
    dist = np.abs(cond[..., :, :, None, :] - cond[..., :, None, :, :]).sum(axis=n_batch)
    ok = feasible[..., :, None, :] & feasible[..., None, :, :]
    ok &= ~np.eye(ds, dtype=bool)[:, :, None]
    dist = np.where(ok, dist, -np.inf)
    flat = dist.reshape(batch_shape + (-1,))
    best = flat.max(axis=-1)
    degenerate = ~np.isfinite(best)
    arg = np.where(degenerate, -1, flat.argmax(axis=-1))
    return np.where(degenerate, 0.0, best), arg, degenerate


def _witness(arg: int, ds: int, cond_shape: tuple[int, ...]):
    if arg < 0:
        return None
    s, s2, k = np.unravel_index(arg, (ds, ds, int(np.prod(cond_shape, dtype=int))))
    return int(s), int(s2), tuple(int(v) for v in np.unravel_index(k, cond_shape))


def influence_details(individual: Individual, edge: Edge) -> Influence:
    graph = individual.graph
    cond = influence_conditioning(graph, edge)
    src, dst = edge
    joint = contract(graph, individual.tensors, (dst, src) + cond)
    value, arg, degenerate = _max_column_distance(joint, 0)
    shape = tuple(graph.cardinality(c) for c in cond)
    return Influence(float(value), _witness(int(arg), graph.cardinality(src), shape), bool(degenerate))


def causal_influence_model(individual: Individual, edge: Edge) -> float:
    """Causal influence of ``edge = (source, target)`` in a model.

    The largest L1 distance between ``Pr(target | source=s, K)`` and
    ``Pr(target | source=s', K)`` over feasible ``s != s'`` and assignments of
    ``K`` (the target's parents that are not its grandparents).  Every other
    variable is marginalized.
    """
    return influence_details(individual, edge).value


def empirical_influence_details(freq: FrequencyTable, edge: Edge, conditioning: Sequence[str] = ()) -> Influence:
    src, dst = edge
    conditioning = tuple(conditioning)
    joint = freq.marginal((dst, src) + conditioning)
    value, arg, degenerate = _max_column_distance(joint, 0)
    shape = tuple(joint.shape[2:])
    return Influence(float(value), _witness(int(arg), joint.shape[1], shape), bool(degenerate))


def causal_influence_empirical(freq: FrequencyTable, edge: Edge, conditioning: Sequence[str] = ()) -> float:
    """The same influence measure evaluated on empirical frequencies."""
    return empirical_influence_details(freq, edge, conditioning).value


def objective_names(graph: CausalGraph) -> tuple[str, ...]:
    return ("tvd",) + tuple(f"C[{s}->{d}]" for s, d in graph.penalized_edges)


def batch_fitness(
    graph: CausalGraph,
    stacked: Sequence[np.ndarray],
    target: np.ndarray,
    edges: Sequence[Edge],
) -> np.ndarray:
    """Fitness matrix ``(N, 1 + len(edges))`` for tensors stacked along axis 0.

    `target` is the frequency table aligned to ``graph.observables``.
    """
    joint = contract(graph, stacked, graph.observables)
    n = joint.shape[0]
    out = np.empty((n, 1 + len(edges)))
    out[:, 0] = np.abs(joint - target).reshape(n, -1).sum(axis=1)
    for k, edge in enumerate(edges):
        cond = influence_conditioning(graph, edge)
        j = contract(graph, stacked, (edge[1], edge[0]) + cond)
        out[:, 1 + k] = _max_column_distance(j, 1)[0]
    return out


def dominates_or_equal(f1, f2) -> bool:
    """True when ``f1`` is no worse than ``f2`` in every objective."""
    f1, f2 = np.asarray(f1), np.asarray(f2)
    if f1.shape != f2.shape:
        raise ValueError("fitness vectors differ in length")
    return bool(np.all(f1 <= f2))


def strictly_dominates(f1, f2) -> bool:
    """Pareto dominance: no worse everywhere and strictly better somewhere."""
    f1, f2 = np.asarray(f1), np.asarray(f2)
    return dominates_or_equal(f1, f2) and bool(np.any(f1 < f2))
