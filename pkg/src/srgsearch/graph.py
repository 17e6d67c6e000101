"""Small simple graphs as adjacency bitsets, graph6 I/O, and isomorphism tools.

Canonical labelling and automorphism groups use individualization-refinement:
equitable partition refinement, a search tree over individualized vertices,
orbit pruning with the automorphisms found so far, and backjumping when a
leaf reproduces the first or the best leaf.  Everything here is sized for
graphs of at most 40 vertices.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

MAX_ORDER = 40
GRAPH6_HEADER = ">>graph6<<"

Permutation = tuple[int, ...]


class Graph6Error(ValueError):
    pass


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..order-1``."""

    order: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.adj) != self.order:
            raise ValueError("adjacency length does not match order")
        full = (1 << self.order) - 1
        for i, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError(f"vertex {i} has a neighbour out of range")
            if row >> i & 1:
                raise ValueError(f"loop at vertex {i}")
            for j in _bits(row):
                if not self.adj[j] >> i & 1:
                    raise ValueError(f"asymmetric adjacency between {i} and {j}")

    @classmethod
    def from_edges(cls, order: int, edges: Iterable[tuple[int, int]]) -> Graph:
        adj = [0] * order
        for u, v in edges:
            if u == v:
                raise ValueError("loops are not allowed")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(order, tuple(adj))

    @classmethod
    def empty(cls, order: int) -> Graph:
        return cls(order, (0,) * order)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbours(self, v: int) -> list[int]:
        return list(_bits(self.adj[v]))

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.adj]

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.order) for j in _bits(self.adj[i]) if i < j]

    @property
    def size(self) -> int:
        return sum(self.degrees()) // 2

    def common_neighbours(self, u: int, v: int) -> int:
        return (self.adj[u] & self.adj[v]).bit_count()

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Graph in which old vertex ``v`` becomes ``perm[v]``."""
        adj = [0] * self.order
        for v, row in enumerate(self.adj):
            new = 0
            for w in _bits(row):
                new |= 1 << perm[w]
            adj[perm[v]] = new
        return Graph(self.order, tuple(adj))

    def induced(self, vertices: Sequence[int]) -> Graph:
        """Induced subgraph; ``vertices[i]`` becomes vertex ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        adj = []
        for v in vertices:
            new = 0
            for w in _bits(self.adj[v]):
                if w in index:
                    new |= 1 << index[w]
            adj.append(new)
        return Graph(len(vertices), tuple(adj))

    def disjoint_union(self, other: Graph) -> Graph:
        shift = self.order
        adj = self.adj + tuple(row << shift for row in other.adj)
        return Graph(self.order + other.order, adj)

    def components(self) -> list[list[int]]:
        seen = 0
        out = []
        for v in range(self.order):
            if seen >> v & 1:
                continue
            comp = 1 << v
            frontier = comp
            while frontier:
                nxt = 0
                for w in _bits(frontier):
                    nxt |= self.adj[w]
                frontier = nxt & ~comp
                comp |= nxt
            seen |= comp
            out.append(list(_bits(comp)))
        return out

    def is_connected(self) -> bool:
        return self.order <= 1 or len(self.components()) == 1

    def is_regular(self, k: int) -> bool:
        return all(d == k for d in self.degrees())


# -- graph6 -------------------------------------------------------------------


def parse_graph6(text: str) -> Graph:
    s = text.strip()
    if s.startswith(GRAPH6_HEADER):
        s = s[len(GRAPH6_HEADER):]
    if not s:
        raise Graph6Error("empty graph6 string")
    data = [ord(c) - 63 for c in s]
    if any(not 0 <= x <= 63 for x in data):
        raise Graph6Error("graph6 byte out of printable range")
    if data[0] == 63:
        if len(data) < 4 or data[1] == 63:
            raise Graph6Error("unsupported or malformed graph6 header")
        n = (data[1] << 12) | (data[2] << 6) | data[3]
        payload = data[4:]
    else:
        n = data[0]
        payload = data[1:]
    if n > MAX_ORDER:
        raise Graph6Error(f"order {n} exceeds the supported maximum {MAX_ORDER}")
    nbits = n * (n - 1) // 2
    if len(payload) != (nbits + 5) // 6:
        raise Graph6Error(f"payload of {len(payload)} bytes does not fit order {n}")
    adj = [0] * n
    k = 0
    for j in range(1, n):
        for i in range(j):
            if payload[k // 6] >> (5 - k % 6) & 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
            k += 1
    return Graph(n, tuple(adj))


def emit_graph6(g: Graph) -> str:
    n = g.order
    if n > 62:
        raise Graph6Error("emit_graph6 supports orders up to 62")
    out = [chr(63 + n)]
    acc = 0
    nacc = 0
    for j in range(1, n):
        for i in range(j):
            acc = (acc << 1) | (g.adj[i] >> j & 1)
            nacc += 1
            if nacc == 6:
                out.append(chr(63 + acc))
                acc = nacc = 0
    if nacc:
        out.append(chr(63 + (acc << (6 - nacc))))
    return "".join(out)


def read_graph6_file(path) -> list[Graph]:
    with open(path, encoding="ascii") as fh:
        return [parse_graph6(line) for line in fh if line.strip()]


# -- permutations -------------------------------------------------------------


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply ``p`` first, then ``q``."""
    return tuple(q[x] for x in p)


def invert(p: Permutation) -> Permutation:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def is_automorphism(g: Graph, p: Permutation) -> bool:
    return g.relabel(p) == g


def orbits(n: int, gens: Iterable[Permutation]) -> list[list[int]]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in gens:
        for i, x in enumerate(p):
            a, b = find(i), find(x)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def group_elements(n: int, gens: Sequence[Permutation], limit: int = 200_000) -> set[Permutation]:
    """All elements of the group generated by ``gens`` (breadth-first closure)."""
    identity = tuple(range(n))
    elements = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for e in frontier:
            for s in gens:
                h = compose(e, s)
                if h not in elements:
                    elements.add(h)
                    nxt.append(h)
                    if len(elements) > limit:
                        raise ValueError("group too large for closure")
        frontier = nxt
    return elements


def group_order(n: int, gens: Sequence[Permutation]) -> int:
    return len(group_elements(n, gens))


# -- individualization-refinement ---------------------------------------------


def _refine(adj: Sequence[int], cells: list[list[int]]) -> list[list[int]]:
    """Coarsest equitable refinement of an ordered partition."""
    while True:
        for splitter in cells:
            smask = 0
            for v in splitter:
                smask |= 1 << v
            new_cells: list[list[int]] = []
            split = False
            for cell in cells:
                if len(cell) == 1:
                    new_cells.append(cell)
                    continue
                groups: dict[int, list[int]] = {}
                for v in cell:
                    groups.setdefault((adj[v] & smask).bit_count(), []).append(v)
                if len(groups) == 1:
                    new_cells.append(cell)
                else:
                    split = True
                    new_cells.extend(groups[k] for k in sorted(groups))
            if split:
                cells = new_cells
                break
        else:
            return cells


def _initial_cells(n: int, colours: Sequence[Iterable[int]]) -> list[list[int]]:
    coloured: set[int] = set()
    cells = []
    for c in colours:
        cell = sorted(c)
        if coloured.intersection(cell):
            raise ValueError("colour classes must be disjoint")
        coloured.update(cell)
        cells.append(cell)
    rest = [v for v in range(n) if v not in coloured]
    return [c for c in [rest, *cells] if c]


class _Search:
    def __init__(self, g: Graph, colours: Sequence[Iterable[int]]):
        self.g = g
        self.gens: list[Permutation] = []
        self.first: tuple[tuple[int, ...], list[int], list[int]] | None = None
        self.best: tuple[tuple[int, ...], list[int], list[int]] | None = None
        if g.order == 0:
            self.best = ((), [], [])
            return
        self._node(_initial_cells(g.order, colours), [])

    def _code(self, lab: list[int]) -> tuple[int, ...]:
        pos = [0] * len(lab)
        for i, v in enumerate(lab):
            pos[v] = i
        code = []
        for v in lab:
            row = 0
            for w in _bits(self.g.adj[v]):
                row |= 1 << pos[w]
            code.append(row)
        return tuple(code)

    def _leaf(self, cells: list[list[int]], path: list[int]) -> int:
        lab = [c[0] for c in cells]
        code = self._code(lab)
        if self.first is None:
            self.first = self.best = (code, path, lab)
            return len(path) - 1
        for ref_code, ref_path, ref_lab in (self.first, self.best):
            if code == ref_code:
                gamma = [0] * len(lab)
                for a, b in zip(ref_lab, lab):
                    gamma[a] = b
                self.gens.append(tuple(gamma))
                common = 0
                while common < len(path) and path[common] == ref_path[common]:
                    common += 1
                return common
        if code > self.best[0]:
            self.best = (code, path, lab)
        return len(path) - 1

    def _node(self, cells: list[list[int]], path: list[int]) -> int:
        cells = _refine(self.g.adj, cells)
        if len(cells) == self.g.order:
            return self._leaf(cells, path)
        depth = len(path)
        ti = next(i for i, c in enumerate(cells) if len(c) > 1)
        target = cells[ti]
        explored: list[int] = []
        for v in target:
            if explored:
                fixing = [p for p in self.gens if all(p[x] == x for x in path)]
                if fixing:
                    orbit_of = {}
                    for orb in orbits(self.g.order, fixing):
                        for x in orb:
                            orbit_of[x] = orb[0]
                    if any(orbit_of[u] == orbit_of[v] for u in explored):
                        continue
            explored.append(v)
            child = cells[:ti] + [[v], [u for u in target if u != v]] + cells[ti + 1:]
            back = self._node(child, path + [v])
            if back < depth:
                return back
        return depth - 1


def canonical_form(g: Graph, colours: Sequence[Iterable[int]] = ()) -> tuple[Graph, Permutation]:
    """Canonical relabelling of ``g`` (optionally vertex-coloured).

    Returns the canonical graph and the permutation ``perm`` with
    ``g.relabel(perm) == canonical``.  Coloured graphs are canonical with
    respect to colour-preserving isomorphisms, colour classes taken in order.
    """
    s = _Search(g, colours)
    _, _, lab = s.best
    perm = [0] * g.order
    for i, v in enumerate(lab):
        perm[v] = i
    perm_t = tuple(perm)
    return g.relabel(perm_t), perm_t


def canonical_key(g: Graph, colours: Sequence[Iterable[int]] = ()) -> str:
    """Hashable canonical string: graph6 of the canonical form plus colour sizes."""
    cf, perm = canonical_form(g, colours)
    sizes = ",".join(str(len(list(c))) for c in colours)
    return f"{emit_graph6(cf)}|{sizes}" if colours else emit_graph6(cf)


def automorphism_group(g: Graph, fixed_setwise: Sequence[Iterable[int]] = ()) -> list[Permutation]:
    """Generators of the subgroup of Aut(g) stabilizing each set in ``fixed_setwise``."""
    return _Search(g, fixed_setwise).gens


def are_isomorphic(g: Graph, h: Graph) -> bool:
    if g.order != h.order or sorted(g.degrees()) != sorted(h.degrees()):
        return False
    return canonical_form(g)[0] == canonical_form(h)[0]


def ordered_edge_orbits(g: Graph, gens: Sequence[Permutation] | None = None) -> list[tuple[int, int]]:
    """One representative (the lexicographically least) per Aut(g)-orbit of arcs."""
    if gens is None:
        gens = automorphism_group(g)
    arcs = [(u, v) for u in range(g.order) for v in _bits(g.adj[u])]
    index = {a: i for i, a in enumerate(arcs)}
    arc_gens = [tuple(index[(p[u], p[v])] for u, v in arcs) for p in gens]
    return sorted(arcs[orb[0]] for orb in orbits(len(arcs), arc_gens))


def arc_orbit_sizes(g: Graph, gens: Sequence[Permutation] | None = None) -> list[int]:
    if gens is None:
        gens = automorphism_group(g)
    arcs = [(u, v) for u in range(g.order) for v in _bits(g.adj[u])]
    index = {a: i for i, a in enumerate(arcs)}
    arc_gens = [tuple(index[(p[u], p[v])] for u, v in arcs) for p in gens]
    return [len(orb) for orb in orbits(len(arcs), arc_gens)]
