"""Survivor selection: NSGA-II and lexicographic ordering.

Both selectors work on a fitness matrix of shape ``(n, k)`` (minimization)
and return the indices of the selected rows.
"""

from __future__ import annotations

from functools import cmp_to_key

import numpy as np

LEXICOGRAPHIC_TOL = 1e-9


def dominance_matrix(fitness: np.ndarray) -> np.ndarray:
    """``dom[i, j]`` is True when row ``i`` dominates row ``j``."""
    f = np.asarray(fitness, float)
    n = len(f)
    le = np.ones((n, n), bool)
    lt = np.zeros((n, n), bool)
    for col in f.T:
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    return le & lt


def non_dominated_sort(fitness: np.ndarray, limit: int | None = None) -> list[np.ndarray]:
    """Partition row indices into Pareto ranks (rank 0 first).

    With `limit`, stop once at least that many rows have been ranked.
    """
    f = np.asarray(fitness, float)
    n = len(f)
    if n == 0:
        return []
    dom = dominance_matrix(f)
    count = dom.sum(axis=0)
    fronts = []
    ranked = 0
    current = np.flatnonzero(count == 0)
    while current.size:
        fronts.append(current)
        ranked += current.size
        if limit is not None and ranked >= limit:
            break
        count = count - dom[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
    return fronts


def crowding_distance(fitness: np.ndarray) -> np.ndarray:
    """Crowding distance of each row within one rank; extremes get ``inf``."""
    f = np.asarray(fitness, float)
    n, k = f.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for m in range(k):
        order = np.argsort(f[:, m], kind="stable")
        lo, hi = f[order[0], m], f[order[-1], m]
        dist[order[0]] = dist[order[-1]] = np.inf
        if hi == lo:
            continue
        gaps = (f[order[2:], m] - f[order[:-2], m]) / (hi - lo)
        dist[order[1:-1]] += gaps
    return dist


def nsga2_select(fitness: np.ndarray, mu: int) -> np.ndarray:
    """Indices of ``mu`` survivors by Pareto rank, then descending crowding distance."""
    f = np.asarray(fitness, float)
    if mu > len(f):
        raise ValueError(f"cannot select {mu} from {len(f)}")
    chosen = []
    for front in non_dominated_sort(f, limit=mu):
        room = mu - len(chosen)
        if room <= 0:
            break
        if len(front) <= room:
            chosen.extend(front.tolist())
            continue
        cd = crowding_distance(f[front])
        order = np.argsort(-cd, kind="stable")
        chosen.extend(front[order[:room]].tolist())
    return np.asarray(chosen, dtype=int)


def lexicographic_compare(f1, f2, tol: float = LEXICOGRAPHIC_TOL) -> int:
    """Compare on the first objective; values within `tol` fall through to the next."""
    for k, (u, v) in enumerate(zip(f1, f2)):
        last = k == len(f1) - 1
        if not last and abs(u - v) < tol:
            continue
        if u < v:
            return -1
        if u > v:
            return 1
    return 0


def lexicographic_order(fitness: np.ndarray, tol: float = LEXICOGRAPHIC_TOL) -> np.ndarray:
    f = np.asarray(fitness, float)
    # presort by the exact key so near-ties end up adjacent
    pre = np.lexsort(f.T[::-1])
    key = cmp_to_key(lambda i, j: lexicographic_compare(f[i], f[j], tol))
    return np.asarray(sorted(pre.tolist(), key=key), dtype=int)


def lexicographic_select(fitness: np.ndarray, mu: int, tol: float = LEXICOGRAPHIC_TOL) -> np.ndarray:
    """Best ``mu`` rows under the tolerant lexicographic order."""
    return lexicographic_order(fitness, tol)[:mu]
