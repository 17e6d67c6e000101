from __future__ import annotations

import random

import networkx as nx
import pytest

from srgsearch.graph import (
    Graph,
    Graph6Error,
    are_isomorphic,
    automorphism_group,
    canonical_form,
    canonical_key,
    emit_graph6,
    group_order,
    is_automorphism,
    ordered_edge_orbits,
    orbits,
    parse_graph6,
)


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.order))
    h.add_edges_from(g.edges())
    return h


def from_nx(h: nx.Graph) -> Graph:
    h = nx.convert_node_labels_to_integers(h)
    return Graph.from_edges(h.number_of_nodes(), h.edges())


def random_graph(rng: random.Random, n: int, p: float) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])


def test_graph6_decodes_star():
    g = parse_graph6("D?{")
    assert g.order == 5
    assert g.edges() == [(0, 4), (1, 4), (2, 4), (3, 4)]


def test_graph6_header_is_accepted():
    assert parse_graph6(">>graph6<<D?{") == parse_graph6("D?{")


def test_graph6_round_trip_matches_networkx():
    rng = random.Random(7)
    for _ in range(60):
        g = random_graph(rng, rng.randint(1, 30), rng.random())
        text = emit_graph6(g)
        assert text == nx.to_graph6_bytes(to_nx(g), header=False).decode().strip()
        assert parse_graph6(text) == g
        assert from_nx(nx.from_graph6_bytes(text.encode())).edges() == g.edges()


@pytest.mark.parametrize("text", ["", "D?", "D?{{", "D?\x7f"])
def test_graph6_rejects_malformed(text):
    with pytest.raises(Graph6Error):
        parse_graph6(text)


def test_graph6_rejects_large_orders():
    big = nx.to_graph6_bytes(nx.cycle_graph(64), header=False).decode().strip()
    with pytest.raises(Graph6Error):
        parse_graph6(big)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(2, (0b10, 0))  # asymmetric
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])


@pytest.mark.parametrize("graph, order", [
    (petersen(), 120),
    (from_nx(nx.complete_graph(4)), 24),
    (from_nx(nx.complete_bipartite_graph(3, 3)), 72),
    (from_nx(nx.hypercube_graph(3)), 48),
    (from_nx(nx.cycle_graph(7)), 14),
    (from_nx(nx.path_graph(5)), 2),
])
def test_automorphism_group_order(graph, order):
    gens = automorphism_group(graph)
    assert all(is_automorphism(graph, p) for p in gens)
    assert group_order(graph.order, gens) == order


def test_automorphism_group_matches_networkx_count():
    rng = random.Random(3)
    for _ in range(15):
        g = random_graph(rng, 7, 0.4)
        expected = sum(1 for _ in nx.algorithms.isomorphism.GraphMatcher(to_nx(g), to_nx(g)).isomorphisms_iter())
        assert group_order(g.order, automorphism_group(g)) == expected


def test_setwise_stabiliser():
    # automorphisms of K4 fixing {0, 1} setwise: swap inside, swap outside
    k4 = from_nx(nx.complete_graph(4))
    assert group_order(4, automorphism_group(k4, [[0, 1]])) == 4


def test_canonical_form_is_relabelling_invariant():
    rng = random.Random(11)
    for _ in range(30):
        g = random_graph(rng, rng.randint(3, 16), 0.35)
        perm = list(range(g.order))
        rng.shuffle(perm)
        h = g.relabel(perm)
        assert canonical_key(g) == canonical_key(h)
        cf, lab = canonical_form(g)
        assert cf == g.relabel(lab)


def test_isomorphism_agrees_with_networkx_on_cubic_graphs():
    rng = random.Random(5)
    graphs = [from_nx(nx.random_regular_graph(3, 12, seed=rng.randrange(10**6))) for _ in range(12)]
    for a in graphs:
        for b in graphs:
            assert are_isomorphic(a, b) == nx.is_isomorphic(to_nx(a), to_nx(b))


def test_arc_orbits():
    assert ordered_edge_orbits(petersen()) == [(0, 1)]
    assert len(ordered_edge_orbits(from_nx(nx.complete_graph(4)))) == 1
    assert ordered_edge_orbits(from_nx(nx.path_graph(3))) == [(0, 1), (1, 0)]


def test_orbits_union_find():
    assert orbits(6, [(1, 0, 2, 3, 4, 5), (0, 1, 3, 4, 2, 5)]) == [[0, 1], [2, 3, 4], [5]]
