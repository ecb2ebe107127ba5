"""Canonical forms for candidate sets of the group-testing search.

A single-set state is a graph whose edges are the surviving defective pairs; a
two-set state is a bipartite graph between the two element sets. Both are
labelled by colour refinement followed by individualization, branching only on
one vertex per twin class inside the first non-singleton cell.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Hashable, Iterable, Mapping

Certificate = tuple[tuple[int, int], ...]
GraphForm = tuple[int, Certificate]
BipartiteForm = tuple[int, int, Certificate]


def _refine(
    vertices: tuple[Hashable, ...],
    adjacency: Mapping[Hashable, frozenset[Hashable]],
    colours: dict[Hashable, float],
) -> dict[Hashable, int]:
    current: dict[Hashable, float | int] = dict(colours)
    distinct = len(set(current.values()))
    while True:
        signatures = {
            vertex: (current[vertex], tuple(sorted(current[neighbour] for neighbour in adjacency[vertex])))
            for vertex in vertices
        }
        ranks = {signature: rank for rank, signature in enumerate(sorted(set(signatures.values())))}
        refined = {vertex: ranks[signatures[vertex]] for vertex in vertices}
        if len(ranks) == distinct:
            return refined
        current = refined
        distinct = len(ranks)


def _twin_representatives(
    cell: list[Hashable],
    adjacency: Mapping[Hashable, frozenset[Hashable]],
) -> list[Hashable]:
    representatives: list[Hashable] = []
    for vertex in cell:
        is_twin = any(
            adjacency[vertex] - {chosen} == adjacency[chosen] - {vertex} for chosen in representatives
        )
        if not is_twin:
            representatives.append(vertex)
    return representatives


def _certificate(
    vertices: tuple[Hashable, ...],
    adjacency: Mapping[Hashable, frozenset[Hashable]],
    colours: dict[Hashable, float],
) -> Certificate:
    refined = _refine(vertices, adjacency, colours)
    cells: dict[int, list[Hashable]] = {}
    for vertex in vertices:
        cells.setdefault(refined[vertex], []).append(vertex)

    target = next((cells[colour] for colour in sorted(cells) if len(cells[colour]) > 1), None)
    if target is None:
        edges = {
            (min(refined[u], refined[v]), max(refined[u], refined[v]))
            for u in vertices
            for v in adjacency[u]
        }
        return tuple(sorted(edges))

    best: Certificate | None = None
    for vertex in _twin_representatives(target, adjacency):
        individualized: dict[Hashable, float] = dict(refined)
        individualized[vertex] = refined[vertex] - 0.5
        candidate = _certificate(vertices, adjacency, individualized)
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


def _adjacency(edges: Iterable[tuple[Hashable, Hashable]]) -> dict[Hashable, frozenset[Hashable]]:
    neighbours: dict[Hashable, set[Hashable]] = {}
    for u, v in edges:
        neighbours.setdefault(u, set()).add(v)
        neighbours.setdefault(v, set()).add(u)
    return {vertex: frozenset(adjacent) for vertex, adjacent in neighbours.items()}


@lru_cache(maxsize=1 << 16)
def canonical_graph(edges: frozenset[tuple[int, int]]) -> GraphForm:
    adjacency = _adjacency(edges)
    vertices = tuple(sorted(adjacency))
    return len(vertices), _certificate(vertices, adjacency, {vertex: 0.0 for vertex in vertices})


@lru_cache(maxsize=1 << 16)
def canonical_bipartite(pairs: frozenset[tuple[int, int]]) -> BipartiteForm:
    adjacency = _adjacency(((0, w1), (1, w2)) for w1, w2 in pairs)
    vertices = tuple(sorted(adjacency))
    rows = sum(1 for side, _ in vertices if side == 0)
    colours = {vertex: float(vertex[0]) for vertex in vertices}
    return rows, len(vertices) - rows, _certificate(vertices, adjacency, colours)
