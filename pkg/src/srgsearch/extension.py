"""Steps 3 and 4: extra neighbours of t outside Q + T, and the local graph at t.

A candidate extra vertex u is described by ``d``, its neighbour set in T,
as a bitmask over the 30 positions.  Candidate sets are bitmasks over the
candidate list, so restricting to the compatible ones is a single AND.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import lcm

from gmpy2 import mpq

from .layout import SX_MASK, SY_MASK, SZ_MASK, T_SIZE, T_VERTEX, bits, q_common
from .ldlt import GramState, is_psd_by_ldlt
from .srg import ADJ, EMBED_DIM, NONADJ, ONE

EXPECTED_DOWNS = 2080
EXTRA_NEIGHBOURS = 8  # 14 minus y, z and two neighbours of t in each of S_y, S_z
LAM, MU = 3, 2


def build_downs() -> list[int]:
    """Every possible neighbour set in T of an extra neighbour of t.

    Such a vertex is adjacent to t, to exactly two vertices of each segment
    (its common neighbours with x, y and z) and to nothing else in T.
    """
    others = [p for p in range(T_SIZE) if p != T_VERTEX]
    out = []
    for size in range(0, 5):
        for extra in combinations(others, size):
            d = 1 << T_VERTEX
            for p in extra:
                d |= 1 << p
            if all(bin(d & m).count("1") == 2 for m in (SX_MASK, SY_MASK, SZ_MASK)):
                out.append(d)
    out.sort(key=lambda m: bits(m))
    return out


# -- Step 3 --------------------------------------------------------------------


def demand_matrix(adj: list[int]) -> list[int] | None:
    """Flat 30x30 table of still-missing common neighbours, or None if some entry is negative."""
    n = T_SIZE
    dem = [0] * (n * n)
    for i in range(n):
        for j in range(i + 1, n):
            want = LAM if adj[i] >> j & 1 else MU
            v = want - bin(adj[i] & adj[j]).count("1") - q_common(i, j)
            if v < 0:
                return None
            dem[i * n + j] = dem[j * n + i] = v
    return dem


@dataclass
class CandidateVertex:
    """A possible extra neighbour u of t.

    With r = (rho / 14) where rho is 4 on d and -1 elsewhere, and
    P = Pint / D, the projection p = r P equals pint / (14 D) and every dot
    product between projections is an integer over ``scale`` = 196 D.
    """

    d: int
    halo: int
    pint: list[int]
    sq_int: int  # rho . pint, so that r . p = sq_int / scale
    scale: int
    pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def members(self) -> list[int]:
        return bits(self.d)

    @property
    def r(self) -> list:
        return r_vector(self.d)

    @property
    def p(self) -> list:
        den = self.scale // 14
        return [mpq(x, den) for x in self.pint]

    @property
    def sq_len(self):
        return mpq(self.sq_int, self.scale)

    @property
    def pint_sum(self) -> int:
        return sum(self.pint)


@dataclass
class ProjectionData:
    """Everything about W = span(T) that the candidate tests need, over the integers."""

    Pint: list[list[int]]  # P * denom
    denom: int
    null_rows: list[list[int]]  # each null row scaled to integers
    p_colsum: list[int]
    null_sums: list[int]

    @classmethod
    def from_state(cls, state: GramState) -> ProjectionData:
        return cls.from_matrices(state.projection_matrix(), state.null_rows())

    @classmethod
    def from_matrices(cls, P: list[list], nulls: list[list]) -> ProjectionData:
        n = len(P)
        denom = 1
        for row in P:
            for x in row:
                denom = lcm(denom, int(mpq(x).denominator))
        Pint = [[int(mpq(x) * denom) for x in row] for row in P]
        inull = []
        for c in nulls:
            den = 1
            for x in c:
                den = lcm(den, int(mpq(x).denominator))
            inull.append([int(mpq(x) * den) for x in c])
        colsum = [sum(Pint[i][j] for i in range(n)) for j in range(n)]
        return cls(Pint, denom, inull, colsum, [sum(c) for c in inull])

    @property
    def P(self) -> list[list]:
        return [[mpq(x, self.denom) for x in row] for row in self.Pint]


def r_vector(d: int) -> list:
    return [ADJ if d >> i & 1 else NONADJ for i in range(T_SIZE)]


@lru_cache(maxsize=4)
def _down_table(downs: tuple[int, ...]) -> list[tuple]:
    """Per d: members, pairs, flat demand indices of the pairs, and the non-members."""
    n = T_SIZE
    table = []
    for d in downs:
        members = bits(d)
        pairs = list(combinations(members, 2))
        table.append((d, members, pairs, [i * n + j for i, j in pairs],
                      [i for i in range(n) if not d >> i & 1]))
    return table


def filter_downs(adj: list[int], demand: list[int], proj: ProjectionData, downs: list[int]) -> list[CandidateVertex]:
    """Candidates surviving the zero-demand, mu-overflow, null-space and length tests, in order."""
    n = T_SIZE
    out = []
    Pint, colsum = proj.Pint, proj.p_colsum
    scale = 196 * proj.denom
    total = sum(colsum)
    nulls = list(zip(proj.null_rows, proj.null_sums))
    for d, members, pairs, flat, others in _down_table(tuple(downs)):
        if not all(demand[k] for k in flat):
            continue
        halo = 0
        bad = False
        for i in others:
            known = bin(adj[i] & d).count("1")
            if known >= MU:
                if known > MU:
                    bad = True
                    break
                halo |= 1 << i
        if bad:
            continue
        # rho = -1 everywhere plus 5 on d
        if any(5 * sum(c[i] for i in members) != s for c, s in nulls):
            continue
        # rho P rho^T expanded, so that only survivors need the full row p
        sq = total - 10 * sum(colsum[i] for i in members) + 25 * sum(Pint[i][j] for i in members for j in members)
        if sq > scale:
            continue
        rows = [Pint[i] for i in members]
        pint = [5 * sum(r[j] for r in rows) - colsum[j] for j in range(n)]
        out.append(CandidateVertex(d, halo, pint, sq, scale, pairs))
    return out


def _cross_int(u: CandidateVertex, v: CandidateVertex, v_sum: int | None = None) -> int:
    pv = v.pint
    s = sum(pv) if v_sum is None else v_sum
    return 5 * sum(pv[i] for i in bits(u.d)) - s


def cross_term(u: CandidateVertex, v: CandidateVertex):
    """r_u . p_v, the inner product of the projections of u and v onto W."""
    return mpq(_cross_int(u, v), u.scale)


def _cs_int(target_num: int, uv: int, u: CandidateVertex, v: CandidateVertex) -> bool:
    """(target - uv/S)^2 <= (1 - su/S)(1 - sv/S), multiplied through by S^2; target = target_num/14."""
    S = u.scale
    gap = target_num * (S // 14) - uv
    return gap * gap <= (S - u.sq_int) * (S - v.sq_int)


_ADJ_NUM, _NONADJ_NUM = 4, -1  # 2/7 and -1/14 in fourteenths


def edge_compatible(u: CandidateVertex, v: CandidateVertex, uv: int | None = None) -> bool:
    if bin(u.d & v.d).count("1") > LAM:
        return False
    if u.halo & v.d or v.halo & u.d:
        return False
    return _cs_int(_ADJ_NUM, _cross_int(u, v) if uv is None else uv, u, v)


def nonedge_compatible(u: CandidateVertex, v: CandidateVertex, uv: int | None = None) -> bool:
    if bin(u.d & v.d).count("1") > MU:
        return False
    return _cs_int(_NONADJ_NUM, _cross_int(u, v) if uv is None else uv, u, v)


def compatible(u: CandidateVertex, v: CandidateVertex, as_: str | None = None) -> bool:
    """``as_`` is 'edge', 'non-edge' or None for either."""
    uv = _cross_int(u, v)
    if as_ == "edge":
        return edge_compatible(u, v, uv)
    if as_ == "non-edge":
        return nonedge_compatible(u, v, uv)
    if as_ is not None:
        raise ValueError(as_)
    return edge_compatible(u, v, uv) or nonedge_compatible(u, v, uv)


def compatibility_masks(verts: list[CandidateVertex]) -> tuple[list[int], list[int]]:
    """Per candidate, bitmasks of the candidates it may be adjacent / non-adjacent to."""
    m = len(verts)
    e_ok = [0] * m
    n_ok = [0] * m
    sums = [sum(v.pint) for v in verts]
    for a in range(m):
        u = verts[a]
        ud, uh, mem = u.d, u.halo, bits(u.d)
        for b in range(a + 1, m):
            v = verts[b]
            common = bin(ud & v.d).count("1")
            if common > LAM:
                continue
            pv = v.pint
            uv = 5 * sum(pv[i] for i in mem) - sums[b]
            if not (uh & v.d or v.halo & ud) and _cs_int(_ADJ_NUM, uv, u, v):
                e_ok[a] |= 1 << b
                e_ok[b] |= 1 << a
            if common <= MU and _cs_int(_NONADJ_NUM, uv, u, v):
                n_ok[a] |= 1 << b
                n_ok[b] |= 1 << a
    return e_ok, n_ok


@dataclass
class Step3Stats:
    calls: int = 0
    exact_sets: int = 0


class Step3Search:
    """Recursive selection of the eight extra neighbours of t.

    Forcing by offer/demand uses only the pairs (t, t_i): a common neighbour
    of t and t_i outside Q + T is an extra neighbour of t and therefore a
    candidate, while common neighbours of other pairs need not be.
    Non-negativity and zero-demand pruning use every pair.
    """

    def __init__(self, verts: list[CandidateVertex], demand: list[int], on_exact=None,
                 target: int = EXTRA_NEIGHBOURS):
        self.verts = verts
        self.demand0 = demand
        self.target = target
        self.on_exact = on_exact
        self.stats = Step3Stats()
        e_ok, n_ok = compatibility_masks(verts)
        self.edge_ok, self.nonedge_ok = e_ok, n_ok
        self.compat = [a | b for a, b in zip(e_ok, n_ok)]
        self.containing = [0] * T_SIZE
        self.pair_mask: dict[tuple[int, int], int] = {}
        for idx, u in enumerate(verts):
            for i in u.members:
                self.containing[i] |= 1 << idx
            for pr in u.pairs:
                self.pair_mask[pr] = self.pair_mask.get(pr, 0) | 1 << idx
        self.exact_sets: list[list[int]] = []

    def run(self) -> list[list[int]]:
        live = (1 << len(self.verts)) - 1
        self._recurse(live, list(self.demand0), [])
        return self.exact_sets

    def _add(self, idx: int, live: int, demand: list[int]) -> int | None:
        """Commit candidate ``idx``: update demand in place, return the pruned live set."""
        n = T_SIZE
        u = self.verts[idx]
        live &= self.compat[idx]
        live &= ~(1 << idx)
        for i, j in u.pairs:
            k = i * n + j
            v = demand[k] - 1
            if v < 0:
                return None
            demand[k] = demand[j * n + i] = v
            if v == 0:
                live &= ~self.pair_mask[(i, j)]
        return live

    def _recurse(self, live: int, demand: list[int], further: list[int]) -> None:
        self.stats.calls += 1
        n = T_SIZE
        t = T_VERTEX
        forced = 0
        for i in range(n):
            if i == t:
                continue
            need = demand[t * n + i]
            if need == 0:
                continue
            have = live & self.containing[i]
            offer = bin(have).count("1")
            if offer < need:
                return
            if offer == need:
                forced |= have
        if forced:
            idxs = bits(forced)
            if len(further) + len(idxs) > self.target:
                return
            for a, b in combinations(idxs, 2):
                if not self.compat[a] >> b & 1:
                    return
            demand = list(demand)
            for a in idxs:
                live = self._add(a, live, demand)
                if live is None:
                    return
            further = further + idxs
            if len(further) == self.target:
                self._exact(further, demand)
            else:
                self._recurse(live, demand, further)
            return
        best = None
        for i in range(n):
            if i == t:
                continue
            need = demand[t * n + i]
            if need and (best is None or need < demand[t * n + best]):
                best = i
        if best is None:
            return  # t still needs extra neighbours but no pair with t can host them
        choices = bits(live & self.containing[best])
        for a in choices:
            dem = list(demand)
            nxt = self._add(a, live, dem)
            live &= ~(1 << a)
            if nxt is None:
                continue
            grown = further + [a]
            if len(grown) == self.target:
                self._exact(grown, dem)
            else:
                self._recurse(nxt, dem, grown)

    def _exact(self, further: list[int], demand: list[int]) -> None:
        n = T_SIZE
        t = T_VERTEX
        # all neighbours of t are now known, so no demand with t can remain
        if any(demand[t * n + i] for i in range(n) if i != t):
            return
        chosen = sorted(further)
        self.stats.exact_sets += 1
        self.exact_sets.append(chosen)
        if self.on_exact is not None:
            self.on_exact(chosen)


def step3_recursor(verts: list[CandidateVertex], demand: list[int], further: list[int] | None = None,
                   target: int = EXTRA_NEIGHBOURS) -> list[list[int]]:
    """All exact sets of ``target`` extra neighbours of t (as candidate indices)."""
    search = Step3Search(verts, demand, target=target)
    live = (1 << len(verts)) - 1
    dem = list(demand)
    chosen: list[int] = []
    for a in further or []:
        live = search._add(a, live, dem)
        if live is None:
            return []
        chosen.append(a)
    search._recurse(live, dem, chosen)
    return search.exact_sets


# -- Step 4 --------------------------------------------------------------------

EDGE, NONEDGE, UNKNOWN = 1, 0, 2
C_SIZE = 14


@dataclass
class Step4Stats:
    branches: int = 0
    resolved: int = 0
    not_good: int = 0
    minor_kills: int = 0
    rank_kills: int = 0


@dataclass
class Certificate:
    """A fully resolved local graph at t that passed every test."""

    further: list[int]
    c_edges: list[tuple[int, int]]
    rank_M: int
    rank_N: int

    def to_record(self, verts: list[CandidateVertex] | None = None) -> dict:
        rec = {"further": self.further, "c_edges": [list(e) for e in self.c_edges],
               "rank_M": self.rank_M, "rank_N": self.rank_N}
        if verts is not None:
            rec["downs"] = [bits(verts[a].d) for a in self.further]
        return rec


def t_neighbours(adj: list[int]) -> tuple[list[int], list[int]]:
    """Neighbours of t inside S_y and inside S_z."""
    a = adj[T_VERTEX]
    ny = bits(a & SY_MASK)
    nz = bits(a & SZ_MASK)
    if len(ny) != 2 or len(nz) != 2 or set(ny) & set(nz):
        raise AssertionError("t must have two neighbours in each of S_y and S_z")
    return ny, nz


def initial_edge_matrix(adj: list[int], further: list[CandidateVertex], e_ok: list[bool], n_ok: list[bool]):
    """14x14 status table for C = neighbourhood of t; ``e_ok``/``n_ok`` index pairs of ``further``."""
    ny, nz = t_neighbours(adj)
    tpos = ny + nz  # c3..c6
    E = [[NONEDGE] * C_SIZE for _ in range(C_SIZE)]

    def put(i, j, s):
        E[i][j] = E[j][i] = s

    put(0, 1, EDGE)
    for k in (2, 3):
        put(0, k, EDGE)
    for k in (4, 5):
        put(1, k, EDGE)
    for a in range(4):
        for b in range(a + 1, 4):
            if adj[tpos[a]] >> tpos[b] & 1:
                put(2 + a, 2 + b, EDGE)
    for a in range(4):
        for f, u in enumerate(further):
            if u.d >> tpos[a] & 1:
                put(2 + a, 6 + f, EDGE)
    k = 0
    for f in range(len(further)):
        for g in range(f + 1, len(further)):
            e, ne = e_ok[k], n_ok[k]
            k += 1
            put(6 + f, 6 + g, UNKNOWN if e and ne else EDGE if e else NONEDGE)
    return E


class _Contradiction(Exception):
    pass


def _propagate(E: list[list[int]]) -> None:
    """Apply the three deduction rules until nothing changes; raise on contradiction."""
    n = C_SIZE
    changed = True
    while changed:
        changed = False
        for i in range(n):
            row = E[i]
            deg = sum(1 for j in range(n) if j != i and row[j] == EDGE)
            sup = sum(1 for j in range(n) if j != i and row[j] == UNKNOWN)
            need = 3 - deg
            if need < 0 or sup < need:
                raise _Contradiction
            if sup and need == 0:
                for j in range(n):
                    if j != i and row[j] == UNKNOWN:
                        E[i][j] = E[j][i] = NONEDGE
                changed = True
            elif sup and need == sup:
                for j in range(n):
                    if j != i and row[j] == UNKNOWN:
                        E[i][j] = E[j][i] = EDGE
                changed = True
        for i in range(n):
            for j in range(i + 1, n):
                common = [k for k in range(n) if k != i and k != j and E[i][k] == EDGE and E[j][k] == EDGE]
                e = len(common)
                s = E[i][j]
                if e >= 3:
                    raise _Contradiction
                if e == 2 and s == NONEDGE:
                    raise _Contradiction
                if e == 2 and s == UNKNOWN:
                    E[i][j] = E[j][i] = EDGE
                    changed = True
                    s = EDGE
                if (e == 2 and s == EDGE) or (e == 1 and s == NONEDGE):
                    for k in range(n):
                        if k in (i, j):
                            continue
                        if E[i][k] == EDGE and E[j][k] == UNKNOWN:
                            E[j][k] = E[k][j] = NONEDGE
                            changed = True
                        elif E[i][k] == UNKNOWN and E[j][k] == EDGE:
                            E[i][k] = E[k][i] = NONEDGE
                            changed = True


def exact_rank(rows: list[list]) -> int:
    """Rank by fraction-exact Gaussian elimination."""
    A = [[mpq(x) for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(A)) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        pr = A[rank]
        for r in range(len(A)):
            if r != rank and A[r][c] != 0:
                f = A[r][c] / pr[c]
                A[r] = [a - f * b for a, b in zip(A[r], pr)]
        rank += 1
    return rank


def determinant(rows: list[list]):
    A = [[mpq(x) for x in r] for r in rows]
    n = len(A)
    det = mpq(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return mpq(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            if A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return det


def principal_minors_nonnegative(N: list[list]) -> bool:
    n = len(N)
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            if determinant([[N[a][b] for b in idx] for a in idx]) < 0:
                return False
    return True


def is_good_cubic_table(E: list[list[int]]) -> bool:
    n = len(E)
    for i in range(n):
        if sum(1 for j in range(n) if j != i and E[i][j] == EDGE) != 3:
            return False
    for i in range(n):
        for j in range(i + 1, n):
            if E[i][j] != EDGE:
                common = sum(1 for k in range(n) if E[i][k] == EDGE and E[j][k] == EDGE)
                if common > 1:
                    return False
    return True


def enumerate_completions(E: list[list[int]], visit, stats: Step4Stats | None = None) -> bool:
    """Branch on unknown pairs of E (edge first), calling visit on each fully resolved table.

    Propagation only discards tables that cannot be cubic and good.  Stops early and
    returns True as soon as visit returns True.
    """
    stats = stats if stats is not None else Step4Stats()

    def resolve(E) -> bool:
        stats.branches += 1
        try:
            _propagate(E)
        except _Contradiction:
            return False
        for i in range(C_SIZE):
            for j in range(i + 1, C_SIZE):
                if E[i][j] == UNKNOWN:
                    for choice in (EDGE, NONEDGE):
                        F = [row[:] for row in E]
                        F[i][j] = F[j][i] = choice
                        if resolve(F):
                            return True
                    return False
        stats.resolved += 1
        return bool(visit(E))

    return resolve([row[:] for row in E])


def step4_complete(adj: list[int], rank_M: int, further: list[CandidateVertex],
                   stats: Step4Stats | None = None) -> Certificate | None:
    """Enumerate the local graph at t; None means every completion was eliminated."""
    stats = stats if stats is not None else Step4Stats()
    e_ok, n_ok = [], []
    for f in range(len(further)):
        for g in range(f + 1, len(further)):
            uv = _cross_int(further[f], further[g])
            e_ok.append(edge_compatible(further[f], further[g], uv))
            n_ok.append(nonedge_compatible(further[f], further[g], uv))
    E = initial_edge_matrix(adj, further, e_ok, n_ok)
    found: list[Certificate] = []

    def check(E) -> bool:
        if not is_good_cubic_table(E):
            stats.not_good += 1
            return False
        m = len(further)
        N = [[(ONE if a == b else ADJ if E[6 + a][6 + b] == EDGE else NONADJ) - cross_term(further[a], further[b])
              for b in range(m)] for a in range(m)]
        # equivalent to non-negativity of every principal minor, at a fraction of the cost
        if not is_psd_by_ldlt(N):
            stats.minor_kills += 1
            return False
        rank_N = exact_rank(N)
        if rank_M + rank_N > EMBED_DIM:
            stats.rank_kills += 1
            return False
        edges = [(i, j) for i in range(C_SIZE) for j in range(i + 1, C_SIZE) if E[i][j] == EDGE]
        found.append(Certificate([], edges, rank_M, rank_N))
        return True

    enumerate_completions(E, check, stats)
    return found[0] if found else None
