from __future__ import annotations

from collections import Counter

import pytest

from srgsearch.graph import are_isomorphic, automorphism_group, group_elements
from srgsearch.segments import (
    EXPECTED_QUADS,
    Segment,
    all_segments,
    extract_segment,
    reconstruct_good_graph,
    segment_census,
)


@pytest.fixture(scope="module")
def every_segment(goods):
    return all_segments(goods)


def test_segment_census(every_segment):
    census = segment_census(every_segment)
    assert census["total"] == census["distinct"] == 478
    assert census["by_type"] == {(6, 6): 19, (6, 4): 78, (4, 6): 78, (4, 4): 303}
    assert {q: census["quads"].get(q, 0) for q in EXPECTED_QUADS} == EXPECTED_QUADS
    assert sum(census["quads"].values()) == 478


def test_quad_table_has_no_2006_segment(every_segment):
    assert not any(s.quad.as_tuple() == (2, 0, 0, 6) for s in every_segment)


def test_working_list(segments):
    assert len(segments) == 400
    assert [s.id for s in segments] == list(range(400))
    assert Counter(s.type for s in segments) == {(6, 6): 19, (6, 4): 78, (4, 4): 303}
    # blocks in type order: all (6,6), then (6,4), then (4,4)
    order = [s.type for s in segments]
    assert order == sorted(order, key=[(6, 6), (6, 4), (4, 4)].index)


def test_segments_reconstruct_their_good_graph(goods, segments):
    for s in segments[::7]:
        assert are_isomorphic(reconstruct_good_graph(s), goods[s.source_good_graph].graph)


def test_segment_structure(segments):
    for s in segments:
        g = s.graph
        assert g.order == 12
        assert [g.degree(v) for v in range(4)] == [2, 2, 2, 2]
        assert all(g.degree(v) == 3 for v in range(4, 12))
        for which, handle, edge in ((1, (0, 1), s.first_is_edge), (2, (2, 3), s.second_is_edge)):
            core = s.core(which)
            assert len(core) == (6 if edge else 4)
            hmask = (1 << handle[0]) | (1 << handle[1])
            assert all(not g.adj[v] & hmask for v in core)
            assert all(g.adj[v] & hmask for v in range(4, 12) if v not in core)


def test_swappable_matches_group_elements(segments):
    for s in segments[::5]:
        elems = group_elements(12, automorphism_group(s.graph, [(0, 1), (2, 3)]) or [tuple(range(12))])
        assert s.swappable == any(p[0] == 1 for p in elems)


def test_favourites(goods, segments):
    favs = [s for s in segments if s.favourite]
    assert favs
    assert all(s.type in ((4, 4), (6, 4)) for s in favs)
    keys = {s.key for s in favs}
    for h in goods:
        assert extract_segment(h, h.favourite_edge).key in keys


def test_record_round_trip(segments):
    for s in segments[::50]:
        assert Segment.from_record(s.to_record()) == s


def test_extract_segment_rejects_bad_edges(goods):
    h = goods[0].graph
    non_edge = next((u, v) for u in range(14) for v in range(u + 1, 14) if not h.has_edge(u, v))
    with pytest.raises(ValueError):
        extract_segment(h, non_edge)
