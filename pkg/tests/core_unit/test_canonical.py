from __future__ import annotations

from itertools import combinations, permutations

import pytest

from addercap.coding import canonical_bipartite, canonical_graph

pytestmark = pytest.mark.core_unit


def _relabel(edges: frozenset[tuple[int, int]], mapping: tuple[int, ...]) -> frozenset[tuple[int, int]]:
    return frozenset(tuple(sorted((mapping[u], mapping[v]))) for u, v in edges)  # type: ignore[misc]


def test_graph_form_is_invariant_under_every_relabeling() -> None:
    path = frozenset({(0, 1), (1, 2), (2, 3), (3, 4)})
    expected = canonical_graph(path)
    for mapping in permutations(range(5)):
        assert canonical_graph(_relabel(path, mapping)) == expected


def test_graph_form_separates_non_isomorphic_graphs() -> None:
    star = frozenset({(0, 1), (0, 2), (0, 3)})
    path = frozenset({(0, 1), (1, 2), (2, 3)})
    triangle_plus = frozenset({(0, 1), (1, 2), (0, 2), (3, 4)})
    forms = {canonical_graph(star), canonical_graph(path), canonical_graph(triangle_plus)}
    assert len(forms) == 3


def test_regular_graphs_need_individualization() -> None:
    hexagon = frozenset({(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)})
    two_triangles = frozenset({(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)})
    assert canonical_graph(hexagon) != canonical_graph(two_triangles)
    assert canonical_graph(hexagon) == canonical_graph(_relabel(hexagon, (3, 0, 4, 1, 5, 2)))


def test_complete_graph_form_counts_vertices() -> None:
    complete = frozenset(combinations(range(4), 2))
    vertices, certificate = canonical_graph(complete)
    assert vertices == 4
    assert len(certificate) == 6


def test_bipartite_form_is_invariant_under_side_relabeling() -> None:
    pairs = frozenset({(0, 0), (0, 1), (1, 1), (2, 0)})
    expected = canonical_bipartite(pairs)
    for rows in permutations(range(3)):
        for columns in permutations(range(2)):
            relabeled = frozenset((rows[w1], columns[w2]) for w1, w2 in pairs)
            assert canonical_bipartite(relabeled) == expected


def test_bipartite_form_keeps_the_sides_apart() -> None:
    pairs = frozenset({(0, 0), (0, 1), (0, 2)})
    transposed = frozenset((w2, w1) for w1, w2 in pairs)
    assert canonical_bipartite(pairs)[:2] == (1, 3)
    assert canonical_bipartite(pairs) != canonical_bipartite(transposed)
