"""Segments: a good graph with one triangle-free edge yz removed, plus its two handles.

Every segment is stored with its 12 vertices in block order

    handle1 (2) | handle2 (2) | none (n) | right (r) | left (l) | both (b)

where *left* is the core for handle1 only, *right* the core for handle2 only,
*both* the intersection of the two cores and *none* the rest.  Within each
block vertices follow the canonical labelling of the handle-coloured
segment, so the stored form depends only on the isomorphism class.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .cubic import GoodGraph
from .graph import (
    Graph,
    automorphism_group,
    canonical_form,
    canonical_key,
    ordered_edge_orbits,
    orbits,
)

EXPECTED_SEGMENTS = 478
EXPECTED_BY_TYPE = {(6, 6): 19, (6, 4): 78, (4, 6): 78, (4, 4): 303}
WORKING_TYPES = ((6, 6), (6, 4), (4, 4))
EXPECTED_WORKING = 400

# Table of quad-type counts; the (2,0,0,6) row is realised by no segment.
EXPECTED_QUADS = {
    (2, 0, 0, 6): 0,
    (1, 1, 1, 5): 5,
    (0, 2, 2, 4): 14,
    (2, 0, 2, 4): 9,
    (1, 1, 3, 3): 35,
    (0, 2, 4, 2): 34,
    (4, 0, 0, 4): 4,
    (3, 1, 1, 3): 23,
    (2, 2, 2, 2): 146,
    (1, 3, 3, 1): 102,
    (0, 4, 4, 0): 28,
}


class SegmentCountError(RuntimeError):
    def __init__(self, message: str, count_name: str):
        super().__init__(message)
        self.count_name = count_name


@dataclass(frozen=True)
class QuadType:
    n: int
    r: int
    l: int
    b: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n, self.r, self.l, self.b)


@dataclass(frozen=True)
class Segment:
    graph: Graph  # 12 vertices, block order
    quad: QuadType
    source_good_graph: int
    source_edge: tuple[int, int]
    key: str
    swappable: bool = False  # some handle-preserving automorphism swaps handle1's vertices
    favourite: bool = False
    id: int | None = None

    handle1: tuple[int, int] = (0, 1)
    handle2: tuple[int, int] = (2, 3)

    @property
    def type(self) -> tuple[int, int]:
        return (6 if self.graph.has_edge(0, 1) else 4, 6 if self.graph.has_edge(2, 3) else 4)

    @property
    def first_is_edge(self) -> bool:
        return self.graph.has_edge(0, 1)

    @property
    def second_is_edge(self) -> bool:
        return self.graph.has_edge(2, 3)

    def block(self, name: str) -> list[int]:
        n, r, l, b = self.quad.as_tuple()
        start = {"none": 4, "right": 4 + n, "left": 4 + n + r, "both": 4 + n + r + l}[name]
        size = {"none": n, "right": r, "left": l, "both": b}[name]
        return list(range(start, start + size))

    def core(self, which_handle: int) -> list[int]:
        """Core for handle 1 (left + both) or handle 2 (right + both), in stored order."""
        if which_handle == 1:
            return self.block("left") + self.block("both")
        if which_handle == 2:
            return self.block("right") + self.block("both")
        raise ValueError("which_handle must be 1 or 2")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "good_graph": self.source_good_graph,
            "edge": list(self.source_edge),
            "type": list(self.type),
            "quad": list(self.quad.as_tuple()),
            "favourite": self.favourite,
            "swappable": self.swappable,
            "adj": list(self.graph.adj),
            "key": self.key,
        }

    @classmethod
    def from_record(cls, rec: dict) -> Segment:
        g = Graph(12, tuple(rec["adj"]))
        return cls(
            graph=g,
            quad=QuadType(*rec["quad"]),
            source_good_graph=rec["good_graph"],
            source_edge=tuple(rec["edge"]),
            key=rec["key"],
            swappable=rec["swappable"],
            favourite=rec["favourite"],
            id=rec["id"],
        )


def core_of(g: Graph, rest: list[int], handle: tuple[int, int]) -> list[int]:
    hmask = (1 << handle[0]) | (1 << handle[1])
    return [v for v in rest if not g.adj[v] & hmask]


def extract_segment(h: GoodGraph | Graph, edge: tuple[int, int], good_id: int = -1) -> Segment:
    H = h.graph if isinstance(h, GoodGraph) else h
    if isinstance(h, GoodGraph):
        good_id = h.id
    y, z = edge
    if not H.has_edge(y, z):
        raise ValueError(f"{edge} is not an edge")
    if H.common_neighbours(y, z):
        raise ValueError(f"edge {edge} lies in a triangle")
    keep = [v for v in range(H.order) if v not in (y, z)]
    S = H.induced(keep)
    pos = {v: i for i, v in enumerate(keep)}
    h1 = tuple(pos[w] for w in H.neighbours(y) if w != z)
    h2 = tuple(pos[w] for w in H.neighbours(z) if w != y)
    _, canon = canonical_form(S, [h1, h2])
    rest = [v for v in range(S.order) if v not in h1 and v not in h2]
    c1 = set(core_of(S, rest, h1))
    c2 = set(core_of(S, rest, h2))
    blocks = [
        list(h1),
        list(h2),
        [v for v in rest if v not in c1 and v not in c2],
        [v for v in rest if v in c2 and v not in c1],
        [v for v in rest if v in c1 and v not in c2],
        [v for v in rest if v in c1 and v in c2],
    ]
    order = [v for blk in blocks for v in sorted(blk, key=lambda u: canon[u])]
    quad = QuadType(*(len(blk) for blk in blocks[2:]))
    stored = S.induced(order)
    key = canonical_key(stored, [(0, 1), (2, 3)])
    gens = automorphism_group(stored, [(0, 1), (2, 3)])
    swappable = _same_orbit(gens, 0, 1)
    return Segment(stored, quad, good_id, (y, z), key, swappable)


def _same_orbit(gens, a: int, b: int) -> bool:
    if not gens:
        return False
    for orb in orbits(len(gens[0]), gens):
        if a in orb:
            return b in orb
    return False


def reconstruct_good_graph(seg: Segment) -> Graph:
    """Add back y (joined to handle1) and z (joined to y and handle2)."""
    y, z = 12, 13
    edges = seg.graph.edges() + [(y, 0), (y, 1), (z, 2), (z, 3), (y, z)]
    return Graph.from_edges(14, edges)


def all_segments(goods: list[GoodGraph]) -> list[Segment]:
    """One segment per Aut(H)-orbit of triangle-free arcs, over all good graphs H."""
    out = []
    for h in goods:
        for y, z in ordered_edge_orbits(h.graph):
            if h.graph.common_neighbours(y, z) == 0:
                out.append(extract_segment(h, (y, z)))
    return out


def segment_census(segs: list[Segment]) -> dict:
    return {
        "total": len(segs),
        "distinct": len({s.key for s in segs}),
        "by_type": dict(Counter(s.type for s in segs)),
        "quads": dict(Counter(s.quad.as_tuple() for s in segs)),
    }


def build_segment_list(goods: list[GoodGraph], check_counts: bool = True) -> list[Segment]:
    segs = all_segments(goods)
    census = segment_census(segs)
    if check_counts:
        if census["total"] != EXPECTED_SEGMENTS or census["distinct"] != EXPECTED_SEGMENTS:
            raise SegmentCountError(
                f"expected {EXPECTED_SEGMENTS} distinct segments, got {census['total']} "
                f"({census['distinct']} distinct)", "478 segments")
        for t, want in EXPECTED_BY_TYPE.items():
            if census["by_type"].get(t, 0) != want:
                raise SegmentCountError(f"expected {want} segments of type {t}", f"{want} segments of type {t}")
    favourite_keys = {
        extract_segment(h, h.favourite_edge).key for h in goods
    }
    working = []
    for t in WORKING_TYPES:
        block = sorted((s for s in segs if s.type == t), key=lambda s: s.key)
        working.extend(block)
    return [
        Segment(s.graph, s.quad, s.source_good_graph, s.source_edge, s.key, s.swappable,
                s.key in favourite_keys, i)
        for i, s in enumerate(working)
    ]
