"""Reading and writing frequency tables, fronts, genomes and run manifests.

Floats are written with ``repr`` so every file round-trips exactly.
"""

from __future__ import annotations

import csv
import itertools
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import CausalGraph
from .metrics import FrequencyTable
from .model import Individual, individual_from_arrays

FREQUENCY_COLUMN = "frequency"


def save_frequencies(freq: FrequencyTable, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*freq.observable_vars, FREQUENCY_COLUMN])
        for idx in itertools.product(*(range(n) for n in freq.values.shape)):
            w.writerow([*idx, repr(float(freq.values[idx]))])


def load_frequencies(path: str | Path, shape: Sequence[int] | None = None) -> FrequencyTable:
    """Load a table written by `save_frequencies` (or by hand, in the same layout).

    Missing rows count as zero.  Cardinalities come from `shape` when given,
    otherwise from the largest index seen per column.  Tables that do not
    sum to one (raw counts) are normalized.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-1] != FREQUENCY_COLUMN:
        raise ValueError(f"{path}: last column must be {FREQUENCY_COLUMN!r}")
    names = tuple(rows[0][:-1])
    body = [r for r in rows[1:] if r]
    idx = np.array([[int(v) for v in r[:-1]] for r in body], dtype=int).reshape(len(body), len(names))
    vals = np.array([float(r[-1]) for r in body])
    if shape is None:
        shape = tuple(int(m) + 1 for m in idx.max(axis=0)) if len(body) else (0,) * len(names)
    table = np.zeros(tuple(shape))
    np.add.at(table, tuple(idx.T), vals)
    freq = FrequencyTable(names, table, normalized=False)
    return freq if abs(table.sum() - 1.0) <= 1e-9 else freq.normalize()


def save_points(path: str | Path, names: Sequence[str], points: np.ndarray) -> None:
    """One row per member: an ``id`` column, then one column per objective."""
    pts = np.asarray(points, float).reshape(-1, len(names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", *names])
        for k, row in enumerate(pts):
            w.writerow([k, *(repr(float(v)) for v in row)])


def load_points(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = tuple(rows[0][1:])
    pts = np.array([[float(v) for v in r[1:]] for r in rows[1:] if r], dtype=float)
    return names, pts.reshape(-1, len(names))


def genomes_to_dict(graph: CausalGraph, members: Iterable[Individual]) -> dict:
    """Graph, tensor axis order and per-member tensors (row ids match the CSV)."""
    return {
        "graph": graph.to_dict(),
        "index_order": {n.name: [n.name, *n.parents] for n in graph.nodes},
        "members": [
            {
                "id": k,
                "fitness": None if ind.fitness is None else [float(v) for v in ind.fitness],
                "tensors": {name: ind.tensor(name).tolist() for name in graph.names},
            }
            for k, ind in enumerate(members)
        ],
    }


def genomes_from_dict(data: dict) -> tuple[CausalGraph, list[Individual]]:
    graph = CausalGraph.from_dict(data["graph"])
    out = []
    for m in data["members"]:
        ind = individual_from_arrays(graph, {k: np.asarray(v, float) for k, v in m["tensors"].items()})
        if m.get("fitness") is not None:
            f = np.asarray(m["fitness"], float)
            f.flags.writeable = False
            ind.fitness = f
        out.append(ind)
    return graph, out


def write_json(path: str | Path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text())


def save_genomes(path: str | Path, graph: CausalGraph, members: Iterable[Individual]) -> None:
    write_json(path, genomes_to_dict(graph, members))


def load_genomes(path: str | Path) -> tuple[CausalGraph, list[Individual]]:
    return genomes_from_dict(read_json(path))


def export_members(directory: str | Path, stem: str, graph: CausalGraph, names: Sequence[str],
                   pairs: Iterable[tuple[np.ndarray, Individual]]) -> None:
    """Write ``<stem>.csv`` and its genome sidecar ``<stem>_genomes.json``."""
    pairs = list(pairs)
    directory = Path(directory)
    pts = np.vstack([f for f, _ in pairs]) if pairs else np.empty((0, len(names)))
    save_points(directory / f"{stem}.csv", names, pts)
    save_genomes(directory / f"{stem}_genomes.json", graph, [ind for _, ind in pairs])
