"""Causal graphs over discrete random variables.

A graph is a fixed DAG whose nodes carry a cardinality, an observability
flag and an ordered parent list.  Some edges are marked *penalized*: the
optimizer reports a causal-influence objective for each of them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

Edge = tuple[str, str]

HIDDEN = "lambda"


class GraphError(ValueError):
    """Raised when a graph violates a structural invariant."""


@dataclass(frozen=True)
class NodeSpec:
    name: str
    cardinality: int
    observable: bool = True
    parents: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[NodeSpec, ...]
    penalized_edges: tuple[Edge, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "penalized_edges", tuple((str(i), str(j)) for i, j in self.penalized_edges)
        )
        object.__setattr__(self, "_index", {n.name: k for k, n in enumerate(self.nodes)})

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    @property
    def observables(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.observable)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise GraphError(f"unknown node {name!r}") from None

    def node(self, name: str) -> NodeSpec:
        return self.nodes[self.index(name)]

    def parents(self, name: str) -> tuple[str, ...]:
        return self.node(name).parents

    def cardinality(self, name: str) -> int:
        return self.node(name).cardinality

    def tensor_shape(self, name: str) -> tuple[int, ...]:
        """Shape of the conditional tensor of `name`: own value first, then parents."""
        node = self.node(name)
        return (node.cardinality,) + tuple(self.cardinality(p) for p in node.parents)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple((p, n.name) for n in self.nodes for p in n.parents)

    def has_edge(self, edge: Edge) -> bool:
        src, dst = edge
        return dst in self._index and src in self.node(dst).parents

    def grandparents(self, name: str) -> set[str]:
        """Parents of any parent of `name`."""
        return {g for p in self.parents(name) for g in self.parents(p)}

    def without_edges(self, edges: Iterable[Edge]) -> "CausalGraph":
        """Copy of the graph with the given edges deleted (and unpenalized)."""
        drop = {tuple(e) for e in edges}
        for e in drop:
            if not self.has_edge(e):
                raise GraphError(f"edge {e[0]}->{e[1]} is not in the graph")
        nodes = tuple(
            NodeSpec(n.name, n.cardinality, n.observable,
                     tuple(p for p in n.parents if (p, n.name) not in drop))
            for n in self.nodes
        )
        penalized = tuple(e for e in self.penalized_edges if e not in drop)
        return CausalGraph(nodes, penalized)

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"name": n.name, "cardinality": n.cardinality,
                 "observable": n.observable, "parents": list(n.parents)}
                for n in self.nodes
            ],
            "penalized_edges": [list(e) for e in self.penalized_edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CausalGraph":
        nodes = tuple(
            NodeSpec(str(d["name"]), int(d["cardinality"]), bool(d.get("observable", True)),
                     tuple(str(p) for p in d.get("parents", ())))
            for d in data["nodes"]
        )
        return cls(nodes, tuple(tuple(e) for e in data.get("penalized_edges", ())))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def topological_order(graph: CausalGraph) -> list[str] | None:
    """Kahn's algorithm; returns None when the graph has a cycle.

    Dangling parent references are ignored here (validate_graph reports them).
    """
    known = set(graph.names)
    indegree = {n.name: sum(p in known for p in n.parents) for n in graph.nodes}
    children: dict[str, list[str]] = {name: [] for name in graph.names}
    for n in graph.nodes:
        for p in n.parents:
            if p in known:
                children[p].append(n.name)
    ready = [name for name in graph.names if indegree[name] == 0]
    order = []
    while ready:
        name = ready.pop(0)
        order.append(name)
        for c in children[name]:
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
    return order if len(order) == len(graph.nodes) else None


def validate_graph(graph: CausalGraph) -> list[str]:
    """List every violated structural invariant; an empty list means valid."""
    problems = []
    names = [n.name for n in graph.nodes]
    seen = set()
    for name in names:
        if name in seen:
            problems.append(f"duplicate node name {name!r}")
        seen.add(name)
    for n in graph.nodes:
        if n.cardinality < 1:
            problems.append(f"node {n.name!r} has cardinality {n.cardinality} < 1")
        if len(set(n.parents)) != len(n.parents):
            problems.append(f"node {n.name!r} lists a parent twice")
        if n.name in n.parents:
            problems.append(f"node {n.name!r} is its own parent")
        for p in n.parents:
            if p not in seen:
                problems.append(f"node {n.name!r} has undeclared parent {p!r}")
    if topological_order(graph) is None:
        problems.append("graph contains a cycle")
    for src, dst in graph.penalized_edges:
        if dst not in seen or src not in graph.node(dst).parents:
            problems.append(f"penalized edge {src}->{dst} is not an edge of the graph")
    return problems


def check_graph(graph: CausalGraph) -> CausalGraph:
    problems = validate_graph(graph)
    if problems:
        raise GraphError("; ".join(problems))
    return graph


def load_graph(path: str | Path) -> CausalGraph:
    with open(path) as fh:
        return check_graph(CausalGraph.from_dict(json.load(fh)))


def save_graph(graph: CausalGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(graph.to_dict(), fh, indent=2)
        fh.write("\n")


def bell_graph(
    extra_edges: Sequence[Edge] = (),
    penalized: Sequence[Edge] | None = None,
    hidden_cardinality: int = 4,
) -> CausalGraph:
    """Two-party Bell scenario with settings x, y, outcomes a, b and hidden ``lambda``.

    The local hidden-variable graph has ``lambda -> a``, ``lambda -> b``,
    ``x -> a`` and ``y -> b``.  `extra_edges` are appended to the parent
    lists (for instance ``("a", "b")`` for outcome signalling or
    ``("x", "lambda")`` for measurement dependence) and are penalized unless
    `penalized` says otherwise.

    Nodes are declared in the order a, b, x, y, lambda so the observable
    joint is indexed ``[a, b, x, y]``.
    """
    parents = {"a": ["x", HIDDEN], "b": ["y", HIDDEN], "x": [], "y": [], HIDDEN: []}
    for src, dst in extra_edges:
        if src in parents[dst]:
            raise GraphError(f"edge {src}->{dst} already present")
        parents[dst].append(src)
    nodes = (
        NodeSpec("a", 2, True, tuple(parents["a"])),
        NodeSpec("b", 2, True, tuple(parents["b"])),
        NodeSpec("x", 2, True, tuple(parents["x"])),
        NodeSpec("y", 2, True, tuple(parents["y"])),
        NodeSpec(HIDDEN, hidden_cardinality, False, tuple(parents[HIDDEN])),
    )
    if penalized is None:
        penalized = extra_edges
    return check_graph(CausalGraph(nodes, tuple(tuple(e) for e in penalized)))
