"""Pareto front, epsilon-dominance archive and dominated hypervolume.

The global front answers "is this point weakly dominated by a member?"
with a k-d tree once it is large enough; the query is an orthant-emptiness
search pruned by each subtree's componentwise minimum.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .selection import dominance_matrix

LINEAR_SCAN_LIMIT = 64


class _Node:
    __slots__ = ("point", "axis", "left", "right", "lo")

    def __init__(self, point: np.ndarray, axis: int):
        self.point = point
        self.axis = axis
        self.left = None
        self.right = None
        self.lo = point.copy()


class DominanceKDTree:
    """k-d tree over fitness vectors supporting weak-dominance queries."""

    def __init__(self, points: np.ndarray | None = None):
        self.root = None
        self.size = 0
        self.k = None
        if points is not None and len(points):
            pts = np.asarray(points, float)
            self.k = pts.shape[1]
            self.root = self._build(pts, 0)
            self.size = len(pts)

    def _build(self, pts: np.ndarray, depth: int):
        if len(pts) == 0:
            return None
        axis = depth % self.k
        order = np.argsort(pts[:, axis], kind="stable")
        mid = len(pts) // 2
        node = _Node(pts[order[mid]].copy(), axis)
        node.left = self._build(pts[order[:mid]], depth + 1)
        node.right = self._build(pts[order[mid + 1:]], depth + 1)
        for child in (node.left, node.right):
            if child is not None:
                np.minimum(node.lo, child.lo, out=node.lo)
        return node

    def insert(self, point) -> None:
        p = np.asarray(point, float).copy()
        if self.root is None:
            self.k = len(p)
            self.root = _Node(p, 0)
            self.size = 1
            return
        node = self.root
        while True:
            np.minimum(node.lo, p, out=node.lo)
            side = "left" if p[node.axis] < node.point[node.axis] else "right"
            child = getattr(node, side)
            if child is None:
                setattr(node, side, _Node(p, (node.axis + 1) % self.k))
                break
            node = child
        self.size += 1

    def any_weakly_dominating(self, f) -> bool:
        """True if some stored point is <= `f` in every coordinate."""
        f = np.asarray(f, float)
        stack = [self.root] if self.root is not None else []
        while stack:
            node = stack.pop()
            if np.any(node.lo > f):
                continue
            if np.all(node.point <= f):
                return True
            if node.left is not None:
                stack.append(node.left)
            # the right subtree holds values >= the split value on this axis
            if node.right is not None and node.point[node.axis] <= f[node.axis]:
                stack.append(node.right)
        return False


class ParetoFront:
    """Non-dominated set of ``(fitness, individual)`` pairs.

    Points leave the front only when a member strictly dominates them, so
    stale tree entries never change a query answer: whatever dominated the
    removed point still dominates anything it would have blocked.
    """

    def __init__(self, linear_scan_limit: int = LINEAR_SCAN_LIMIT):
        self.linear_scan_limit = linear_scan_limit
        self.fitness: list[np.ndarray] = []
        self.individuals: list = []
        self._tree: DominanceKDTree | None = None
        self._since_build = 0
        self._fresh: list[int] = []

    def __len__(self):
        return len(self.fitness)

    def __iter__(self):
        return iter(zip(self.fitness, self.individuals))

    def points(self) -> np.ndarray:
        if not self.fitness:
            return np.empty((0, 0))
        return np.vstack(self.fitness)

    def is_dominated(self, f) -> bool:
        """True if a member is no worse than `f` in every objective."""
        if not self.fitness:
            return False
        f = np.asarray(f, float)
        if self._tree is None:
            return bool(np.any(np.all(self.points() <= f, axis=1)))
        return self._tree.any_weakly_dominating(f)

    def _add(self, f: np.ndarray, ind) -> None:
        self._fresh.append(len(self.fitness))
        self.fitness.append(f)
        self.individuals.append(ind)
        if self._tree is not None:
            self._tree.insert(f)
            self._since_build += 1

    def offer(self, f, ind=None) -> bool:
        """Add a point unless it is weakly dominated; call `prune` afterwards."""
        f = np.asarray(f, float)
        if self.is_dominated(f):
            return False
        self._add(f, ind)
        return True

    def prune(self) -> int:
        """Drop members strictly dominated by another member; returns the count removed.

        Only points added since the last prune can dominate anything: older
        members already survived each other, and every newcomer passed the
        dominance check against them.
        """
        fresh, self._fresh = self._fresh, []
        if len(self.fitness) < 2 or not fresh:
            return 0
        pts = self.points()
        new = pts[fresh]
        le = np.all(new[:, None, :] <= pts[None, :, :], axis=2)
        lt = np.any(new[:, None, :] < pts[None, :, :], axis=2)
        dominated = np.any(le & lt, axis=0)
        if not dominated.any():
            return 0
        keep = np.flatnonzero(~dominated)
        self.fitness = [self.fitness[i] for i in keep]
        self.individuals = [self.individuals[i] for i in keep]
        return int(dominated.sum())

    def rebalance(self) -> None:
        n = len(self.fitness)
        if n < self.linear_scan_limit:
            self._tree = None
            self._since_build = 0
        elif self._tree is None or self._since_build > n / 2 or self._tree.size > 2 * n:
            self._tree = DominanceKDTree(self.points())
            self._since_build = 0

    def update(self, fitness: Iterable, individuals: Iterable) -> int:
        """Offer a batch, then prune and rebalance if anything was added."""
        added = 0
        for f, ind in zip(fitness, individuals):
            added += self.offer(f, ind)
        if added:
            self.prune()
            self.rebalance()
        return added


class EpsilonArchive:
    """Bounded-resolution archive of mutually non-epsilon-dominated points.

    ``u`` epsilon-dominates ``w`` when ``u_k <= w_k + eps_abs + eps_rel |w_k|``
    for every objective.  A candidate is rejected if any member
    epsilon-dominates it; once accepted, members it epsilon-dominates leave.
    """

    def __init__(self, epsilon_abs: float = 1e-8, epsilon_rel: float = 1e-5):
        self.epsilon_abs = epsilon_abs
        self.epsilon_rel = epsilon_rel
        self._f = None
        self.individuals: list = []

    def __len__(self):
        return len(self.individuals)

    def __iter__(self):
        return iter(zip(self.points(), self.individuals))

    def points(self) -> np.ndarray:
        return np.empty((0, 0)) if self._f is None else self._f.copy()

    def slack(self, w) -> np.ndarray:
        return self.epsilon_abs + self.epsilon_rel * np.abs(w)

    def eps_dominates(self, u, w) -> bool:
        u, w = np.asarray(u, float), np.asarray(w, float)
        return bool(np.all(u <= w + self.slack(w)))

    def offer(self, f, ind=None) -> bool:
        f = np.asarray(f, float)
        if self._f is None:
            self._f = f[None, :].copy()
            self.individuals = [ind]
            return True
        if np.any(np.all(self._f <= f + self.slack(f), axis=1)):
            return False
        gone = np.all(f <= self._f + self.slack(self._f), axis=1)
        if gone.any():
            keep = np.flatnonzero(~gone)
            self._f = self._f[keep]
            self.individuals = [self.individuals[i] for i in keep]
        self._f = np.vstack([self._f, f[None, :]])
        self.individuals.append(ind)
        return True

    def offer_many(self, fitness: Iterable, individuals: Iterable) -> int:
        return sum(self.offer(f, ind) for f, ind in zip(fitness, individuals))


def non_dominated_mask(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, float)
    if len(pts) == 0:
        return np.zeros(0, bool)
    return ~dominance_matrix(pts).any(axis=0)


def _hv2d(pts: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    p = pts[order]
    best = np.minimum.accumulate(p[:, 1])
    keep = np.ones(len(p), bool)
    keep[1:] = p[1:, 1] < best[:-1]
    p = p[keep]
    right = np.append(p[1:, 0], ref[0])
    return float(np.sum((right - p[:, 0]) * (ref[1] - p[:, 1])))


def _hv(pts: np.ndarray, ref: np.ndarray) -> float:
    k = pts.shape[1]
    if len(pts) == 0:
        return 0.0
    if k == 1:
        return float(ref[0] - pts[:, 0].min())
    if k == 2:
        return _hv2d(pts, ref)
    order = np.argsort(pts[:, -1], kind="stable")
    p = pts[order]
    z = np.append(p[:, -1], ref[-1])
    total = 0.0
    for i in range(len(p)):
        depth = z[i + 1] - z[i]
        if depth > 0:
            total += depth * _hv(p[: i + 1, :-1], ref[:-1])
    return total


def hypervolume(points, ref: Sequence[float] | None = None) -> float:
    """Volume dominated by `points` and bounded above by `ref` (minimization).

    The default reference point is 2 in every objective, the upper end of
    both the TVD and the causal-influence ranges.
    """
    pts = np.asarray(points, float)
    if pts.size == 0:
        return 0.0
    pts = pts.reshape(len(pts), -1)
    ref = np.full(pts.shape[1], 2.0) if ref is None else np.asarray(ref, float)
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    pts = pts[non_dominated_mask(pts)]
    return _hv(np.unique(pts, axis=0), ref)
