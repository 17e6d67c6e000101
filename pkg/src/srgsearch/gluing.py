"""Segment pairs (double cosets on the glued handle) and the enumeration trees.

Trees are flat arrays in the node-record layout (level, payload, brother,
son) with 1-based node indices; index 0 means "none".  Small trees choose,
level by level, the partner in the left core for each vertex of the right
core.  Big trees assign each of the eight non-handle vertices of the third
segment its extra neighbours: none, one in the S_y core (right), one in the
S_x core (left), or one of each (both).
"""

from __future__ import annotations

import hashlib
from array import array
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

from .segments import Segment

EXPECTED_PAIRS = 86333
EXPECTED_PAIRS_BY_TYPE = {
    ((6, 6), (6, 6)): 281,
    ((6, 6), (6, 4)): 2249,
    ((6, 4), (6, 4)): 4851,
    ((4, 4), (4, 4)): 78952,
}
EXPECTED_BIG_LEAVES = {(6, 6): 518400, (6, 4): 17280, (4, 4): 576}


@dataclass(frozen=True)
class SegmentPair:
    case_id: int  # 1-based
    sx_id: int
    sy_id: int
    gluing: int  # 0 identity, 1 swap of the glued handle

    def pair_type(self, segments: list[Segment]) -> tuple[tuple[int, int], tuple[int, int]]:
        a, b = segments[self.sx_id].type, segments[self.sy_id].type
        return (a, b) if (a, b) in EXPECTED_PAIRS_BY_TYPE else (b, a)

    def to_record(self, segments: list[Segment]) -> dict:
        return {
            "case": self.case_id,
            "sx": self.sx_id,
            "sy": self.sy_id,
            "gluing": self.gluing,
            "types": [list(segments[self.sx_id].type), list(segments[self.sy_id].type)],
        }


def double_coset_count(sx: Segment, sy: Segment) -> int:
    """Double cosets of the two handle stabilizers in Sym(handle), a group of order 2."""
    return 1 if sx.swappable or sy.swappable else 2


def enumerate_segment_pairs(segments: list[Segment]) -> list[SegmentPair]:
    out = []
    for i, sx in enumerate(segments):
        for j in range(i, len(segments)):
            sy = segments[j]
            if sx.first_is_edge != sy.first_is_edge:
                continue
            for glue in range(double_coset_count(sx, sy)):
                out.append(SegmentPair(len(out) + 1, i, j, glue))
    return out


def pair_census(pairs: list[SegmentPair], segments: list[Segment]) -> dict:
    return dict(Counter(p.pair_type(segments) for p in pairs))


def merged_pair_graph(sx: Segment, sy: Segment, gluing: int):
    """The 22-vertex union with the first handles identified (no matching yet)."""
    from .graph import Graph

    ymap = pair_positions(gluing)
    edges = list(sx.graph.edges())
    edges += [(ymap[a], ymap[b]) for a, b in sy.graph.edges()]
    return Graph.from_edges(22, set(tuple(sorted(e)) for e in edges))


def pair_positions(gluing: int) -> list[int]:
    """Position in T of each S_y vertex: handle1 -> 0,1 (maybe swapped), the rest -> 12..21."""
    head = [1, 0] if gluing else [0, 1]
    return head + list(range(12, 22))


# -- trees ---------------------------------------------------------------------


class Tree:
    """Flat node arrays; node 0 is a dummy so that 0 can mean 'none'."""

    def __init__(self, depth: int):
        self.depth = depth
        self.level = array("b", [0])
        self.left = array("b", [0])   # small tree: the chosen neighbour m
        self.right = array("b", [0])
        self.bro = array("i", [0])
        self.son = array("i", [0])

    def _new(self, level: int, left: int, right: int) -> int:
        self.level.append(level)
        self.left.append(left)
        self.right.append(right)
        self.bro.append(0)
        self.son.append(0)
        return len(self.level) - 1

    @property
    def root(self) -> int:
        return 1 if len(self.level) > 1 else 0

    def __len__(self) -> int:
        return len(self.level) - 1

    def leaves(self) -> int:
        return sum(1 for i in range(1, len(self.level)) if self.level[i] == self.depth)

    def paths(self):
        """Yield every root-to-leaf path as a list of node indices."""
        stack = []
        node = self.root
        while True:
            while node:
                stack.append(node)
                if self.level[node] == self.depth:
                    yield list(stack)
                    break
                node = self.son[node]
            while stack:
                top = stack.pop()
                if self.bro[top]:
                    node = self.bro[top]
                    break
            else:
                return

    def preorder(self) -> list[int]:
        out = []
        stack = [self.root] if self.root else []
        while stack:
            node = stack.pop()
            out.append(node)
            if self.bro[node]:
                stack.append(self.bro[node])
            if self.son[node]:
                stack.append(self.son[node])
        return out

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.level, self.left, self.right, self.bro, self.son):
            h.update(arr.tobytes())
        return h.hexdigest()


def _build(tree: Tree, choices_at, depth: int) -> None:
    """Generic builder: ``choices_at(level, used)`` lists (left, right, used') per child."""

    def rec(level: int, used) -> int:
        first = prev = 0
        for left, right, nxt in choices_at(level, used):
            node = tree._new(level, left, right)
            if prev:
                tree.bro[prev] = node
            else:
                first = node
            if level < depth:
                tree.son[node] = rec(level + 1, nxt)
            prev = node
        return first

    rec(1, (0, 0))


@lru_cache(maxsize=None)
def build_small_tree(core_size: int) -> Tree:
    if core_size not in (4, 6):
        raise ValueError("core size must be 4 or 6")
    tree = Tree(core_size)

    def choices(level, used):
        mask = used[0]
        for m in range(1, core_size + 1):
            if not mask >> m & 1:
                yield m, 0, (mask | 1 << m, 0)

    _build(tree, choices, core_size)
    return tree


@lru_cache(maxsize=None)
def build_big_tree(quad: tuple[int, int, int, int]) -> Tree:
    """Tree over the 8 non-handle vertices of S_z with quad type ``quad``.

    ``left`` payloads index the S_x core (1-based), ``right`` the S_y core.
    """
    n, r, l, b = quad
    if n + r + l + b != 8 or l + b not in (4, 6) or r + b not in (4, 6):
        raise ValueError(f"unrealisable quad type {quad}")
    groups = ["none"] * n + ["right"] * r + ["left"] * l + ["both"] * b
    lsize, rsize = l + b, r + b
    tree = Tree(8)

    def choices(level, used):
        lmask, rmask = used
        kind = groups[level - 1]
        lopts = [0] if kind in ("none", "right") else [m for m in range(1, lsize + 1) if not lmask >> m & 1]
        ropts = [0] if kind in ("none", "left") else [m for m in range(1, rsize + 1) if not rmask >> m & 1]
        for lm in lopts:
            for rm in ropts:
                yield lm, rm, (lmask | (1 << lm if lm else 0), rmask | (1 << rm if rm else 0))

    _build(tree, choices, 8)
    return tree


def big_tree_leaf_count(quad: tuple[int, int, int, int]) -> int:
    n, r, l, b = quad
    return factorial(l + b) * factorial(r + b)
