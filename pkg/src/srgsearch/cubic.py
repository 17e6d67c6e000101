"""Cubic graphs of order 14 and the good ones among them.

A cubic graph is *good* when every two non-adjacent vertices share at most
one neighbour.  These are the only possible neighbourhood graphs in an
srg(85,14,3,2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .graph import Graph, canonical_form, canonical_key, emit_graph6, read_graph6_file

LOCAL_ORDER = 14
SMALL_ORDERS = (4, 6, 8, 10)
EXPECTED_CONNECTED = 509
EXPECTED_DISCONNECTED = 31
EXPECTED_TOTAL = 540
EXPECTED_GOOD = 39
EXPECTED_GOOD_CONNECTED = 36


class CatalogueError(RuntimeError):
    """A catalogue does not match a published count."""

    def __init__(self, message: str, count_name: str):
        super().__init__(message)
        self.count_name = count_name


def default_catalogue_dir() -> Path:
    return Path(str(resources.files("srgsearch") / "data" / "catalogue"))


def load_catalogue(directory: str | Path) -> dict[int, list[Graph]]:
    """Read ``cubic_N.g6`` files (connected cubic graphs of order N)."""
    directory = Path(directory)
    out = {}
    for n in (*SMALL_ORDERS, LOCAL_ORDER):
        path = directory / f"cubic_{n}.g6"
        if not path.exists():
            raise CatalogueError(f"missing catalogue file {path}", f"cubic_{n}")
        graphs = read_graph6_file(path)
        for g in graphs:
            if g.order != n or not g.is_regular(3) or not g.is_connected():
                raise CatalogueError(f"{path} holds a graph that is not connected cubic of order {n}", f"cubic_{n}")
        out[n] = graphs
    return out


def _partitions(n: int, parts: tuple[int, ...]) -> list[list[int]]:
    """Partitions of n into at least two non-increasing parts from ``parts``."""
    out = []

    def rec(rest: int, largest: int, acc: list[int]) -> None:
        if rest == 0:
            if len(acc) >= 2:
                out.append(list(acc))
            return
        for p in parts:
            if p <= min(rest, largest):
                acc.append(p)
                rec(rest - p, p, acc)
                acc.pop()

    rec(n, n, [])
    return out


def disconnected_cubic(small: dict[int, list[Graph]], n: int = LOCAL_ORDER) -> list[Graph]:
    """All disconnected cubic graphs of order n, assembled from connected components."""
    out = []
    for part in _partitions(n, tuple(sorted(small, reverse=True))):
        # multisets of components: non-decreasing catalogue index within equal orders
        choices = []
        for order, group in itertools.groupby(part):
            m = len(list(group))
            choices.append(list(itertools.combinations_with_replacement(small[order], m)))
        for combo in itertools.product(*choices):
            g = None
            for block in combo:
                for comp in block:
                    g = comp if g is None else g.disjoint_union(comp)
            out.append(g)
    return out


def is_good(g: Graph) -> bool:
    if not g.is_regular(3):
        raise ValueError("is_good expects a cubic graph")
    for u in range(g.order):
        for v in range(u + 1, g.order):
            if not g.has_edge(u, v) and g.common_neighbours(u, v) > 1:
                return False
    return True


def triangle_free_arcs(g: Graph) -> list[tuple[int, int]]:
    """Ordered edges (y, z) lying in no triangle."""
    return [(u, v) for u in range(g.order) for v in g.neighbours(u) if g.common_neighbours(u, v) == 0]


def handle_types(g: Graph, y: int, z: int) -> tuple[int, int]:
    """Core sizes (6 for an edge handle, 4 for a non-edge) of the segment g minus yz."""
    h1 = [w for w in g.neighbours(y) if w != z]
    h2 = [w for w in g.neighbours(z) if w != y]
    return (6 if g.has_edge(*h1) else 4, 6 if g.has_edge(*h2) else 4)


@dataclass(frozen=True)
class GoodGraph:
    id: int
    graph: Graph  # canonically labelled
    connected: bool
    favourite_edge: tuple[int, int]

    @property
    def g6(self) -> str:
        return emit_graph6(self.graph)


def maximal_3clique_edges(h: GoodGraph | Graph) -> list[tuple[int, int]]:
    g = h.graph if isinstance(h, GoodGraph) else h
    return triangle_free_arcs(g)


def choose_favourite_edge(g: Graph) -> tuple[int, int]:
    """Least triangle-free arc giving a (4,4) segment, else the least giving (6,4)."""
    arcs = sorted(triangle_free_arcs(g))
    for wanted in ((4, 4), (6, 4)):
        for y, z in arcs:
            if handle_types(g, y, z) == wanted:
                return (y, z)
    raise ValueError("graph has no (4,4) or (6,4) segment")


def build_good_list(catalogue: dict[int, list[Graph]], check_counts: bool = True) -> list[GoodGraph]:
    connected = catalogue[LOCAL_ORDER]
    small = {n: catalogue[n] for n in SMALL_ORDERS}
    disconnected = disconnected_cubic(small)
    if check_counts:
        if len(connected) != EXPECTED_CONNECTED:
            raise CatalogueError(
                f"expected {EXPECTED_CONNECTED} connected cubic graphs on 14 vertices, got {len(connected)}",
                "509 connected cubic graphs")
        if len(disconnected) != EXPECTED_DISCONNECTED:
            raise CatalogueError(
                f"expected {EXPECTED_DISCONNECTED} disconnected cubic graphs on 14 vertices, got {len(disconnected)}",
                "31 disconnected cubic graphs")
        if len(connected) + len(disconnected) != EXPECTED_TOTAL:
            raise CatalogueError("candidate pool is not 540 graphs", "540 cubic graphs")
    keyed = []
    for g in connected + disconnected:
        if is_good(g):
            cf, _ = canonical_form(g)
            keyed.append((not cf.is_connected(), emit_graph6(cf), cf))
    keyed.sort(key=lambda t: (t[0], t[1]))
    goods = [
        GoodGraph(i, cf, not disc, choose_favourite_edge(cf))
        for i, (disc, _, cf) in enumerate(keyed)
    ]
    if check_counts:
        n_conn = sum(g.connected for g in goods)
        if len(goods) != EXPECTED_GOOD or n_conn != EXPECTED_GOOD_CONNECTED:
            raise CatalogueError(
                f"expected {EXPECTED_GOOD} good graphs ({EXPECTED_GOOD_CONNECTED} connected), "
                f"got {len(goods)} ({n_conn} connected)", "39 good graphs")
    return goods


def load_good_graphs(directory: str | Path | None = None) -> list[GoodGraph]:
    return build_good_list(load_catalogue(directory or default_catalogue_dir()))


# -- brute-force cross-check for small orders ---------------------------------


def generate_cubic(n: int, connected: bool = True) -> list[Graph]:
    """All cubic graphs of order n up to isomorphism, by orderly edge-by-edge search.

    Vertex 0 is matched first, then the least vertex with a free slot; each
    partial graph is extended in every admissible way and complete graphs are
    reduced to canonical form.  Symmetry is broken only by requiring the
    neighbours added to a vertex to be increasing, so this is practical for
    n <= 10 only.
    """
    if n % 2 or n < 4:
        return []
    found: dict[str, Graph] = {}
    deg = [0] * n
    adj = [0] * n

    def rec() -> None:
        v = next((i for i in range(n) if deg[i] < 3), None)
        if v is None:
            g = Graph(n, tuple(adj))
            if connected and not g.is_connected():
                return
            found.setdefault(canonical_key(g), g)
            return
        last = adj[v].bit_length() - 1 if adj[v] else v
        # new neighbours of v are added in increasing order beyond v
        for w in range(max(last, v) + 1, n):
            if deg[w] < 3 and not adj[v] >> w & 1:
                # untouched vertices are interchangeable: only try the first one
                if deg[w] == 0 and any(deg[u] == 0 for u in range(v + 1, w)):
                    continue
                adj[v] |= 1 << w
                adj[w] |= 1 << v
                deg[v] += 1
                deg[w] += 1
                rec()
                adj[v] ^= 1 << w
                adj[w] ^= 1 << v
                deg[v] -= 1
                deg[w] -= 1

    rec()
    return sorted(found.values(), key=emit_graph6)
