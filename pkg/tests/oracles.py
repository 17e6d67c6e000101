"""Independent reference implementations used to check the package.

Nothing here imports the code under test except plain data types, and every
routine uses a different method from the one it checks: Fraction arithmetic
instead of gmpy2, full pivoting instead of row-by-row LDLT, brute force
instead of pruned search.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

T_SIZE = 30
T_VERTEX = 12
SX = set(range(12))
SY = {0, 1, 12, 13, *range(14, 22)}
SZ = {2, 3, 12, 13, *range(22, 30)}
ONE, ADJ, NONADJ = Fraction(1), Fraction(2, 7), Fraction(-1, 14)


def frac_matrix(rows) -> list[list[Fraction]]:
    return [[Fraction(int(x.numerator), int(x.denominator)) if hasattr(x, "numerator") else Fraction(x)
             for x in row] for row in rows]


def is_psd_pivoting(rows) -> bool:
    """Semi-definiteness by symmetric elimination on the largest diagonal entry.

    A symmetric matrix is PSD iff the largest diagonal entry d is >= 0, and
    either d > 0 and the Schur complement is PSD, or d == 0 and the whole
    matrix vanishes.
    """
    A = frac_matrix(rows)
    idx = list(range(len(A)))
    while idx:
        k = max(idx, key=lambda i: A[i][i])
        d = A[k][k]
        if d < 0:
            return False
        if d == 0:
            return all(A[i][j] == 0 for i in idx for j in idx)
        rest = [i for i in idx if i != k]
        for i in rest:
            f = A[i][k] / d
            if f:
                for j in rest:
                    A[i][j] -= f * A[k][j]
        idx = rest
    return True


def det(rows) -> Fraction:
    A = frac_matrix(rows)
    n = len(A)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            out = -out
        out *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return out


def is_psd_minors(rows) -> bool:
    """Every principal minor non-negative (exponential; small matrices only)."""
    n = len(rows)
    return all(det([[rows[a][b] for b in idx] for a in idx]) >= 0
               for size in range(1, n + 1) for idx in combinations(range(n), size))


def rank(rows) -> int:
    A = frac_matrix(rows)
    r = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
    return r


def matmul(A, B) -> list[list[Fraction]]:
    A, B = frac_matrix(A), frac_matrix(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def gram_from_adjacency(adj: list[int]) -> list[list[Fraction]]:
    n = len(adj)
    return [[ONE if i == j else ADJ if adj[i] >> j & 1 else NONADJ for j in range(n)] for i in range(n)]


# -- Step 3 references -------------------------------------------------------------


def demand_by_definition(adj: list[int]) -> list[list[int]] | None:
    """Build T plus its three clique vertices x, y, z explicitly and count what is missing."""
    n = T_SIZE
    nbrs = [{j for j in range(n) if adj[i] >> j & 1} for i in range(n)]
    for i in range(n):
        for tag, seg in (("x", SX), ("y", SY), ("z", SZ)):
            if i in seg:
                nbrs[i].add(tag)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            want = 3 if j in nbrs[i] else 2
            v = want - len(nbrs[i] & nbrs[j])
            if v < 0:
                return None
            out[i][j] = out[j][i] = v
    return out


def downs_by_brute_force() -> set[frozenset[int]]:
    """Neighbour sets in T containing t and exactly two vertices of each segment."""
    others = [p for p in range(T_SIZE) if p != T_VERTEX]
    out = set()
    for size in range(0, 7):
        for extra in combinations(others, size):
            d = {T_VERTEX, *extra}
            if len(d & SX) == 2 and len(d & SY) == 2 and len(d & SZ) == 2:
                out.add(frozenset(d))
    return out


def extra_vertex_row(d: frozenset[int]) -> list[Fraction]:
    return [ADJ if i in d else NONADJ for i in range(T_SIZE)]


def candidate_admissible(adj: list[int], demand: list[list[int]], d: frozenset[int]) -> bool:
    """Whether an extra neighbour of t with T-neighbourhood d passes the per-T tests.

    Pairs inside d must still need a common neighbour; a vertex of T outside d
    may not already share more than mu = 2 neighbours with u (u lies outside
    Q, so only T counts); and the 31-vertex Gram matrix of T + u must be PSD.
    """
    members = sorted(d)
    for a, b in combinations(members, 2):
        if demand[a][b] == 0:
            return False
    for i in range(T_SIZE):
        if i not in d and sum(1 for j in d if adj[i] >> j & 1) > 2:
            return False
    G = gram_from_adjacency(adj)
    row = extra_vertex_row(d)
    full = [G[i] + [row[i]] for i in range(T_SIZE)] + [row + [ONE]]
    return is_psd_pivoting(full)


def exact_sets_by_brute_force(verts, demand: list[list[int]], compatible, target: int = 8) -> set[tuple[int, ...]]:
    """All target-subsets of pairwise compatible candidates meeting demand(t, i) exactly
    and never exceeding any other demand.

    ``verts`` are neighbour sets in T.  Plain lexicographic subset enumeration,
    cut off only when a pair count already exceeds its demand (counts never
    decrease, so nothing is lost).
    """
    n = len(verts)
    ok = [[i != j and compatible(i, j) for j in range(n)] for i in range(n)]
    pairs = [list(combinations(sorted(v), 2)) for v in verts]
    counts = [[0] * T_SIZE for _ in range(T_SIZE)]
    out = set()

    def extend(chosen: list[int], start: int) -> None:
        if len(chosen) == target:
            if all(counts[min(i, T_VERTEX)][max(i, T_VERTEX)] == demand[i][T_VERTEX]
                   for i in range(T_SIZE) if i != T_VERTEX):
                out.add(tuple(chosen))
            return
        for k in range(start, n):
            if not all(ok[c][k] for c in chosen):
                continue
            for a, b in pairs[k]:
                counts[a][b] += 1
            if all(counts[a][b] <= demand[a][b] for a, b in pairs[k]):
                chosen.append(k)
                extend(chosen, k + 1)
                chosen.pop()
            for a, b in pairs[k]:
                counts[a][b] -= 1

    extend([], 0)
    return out


# -- Step 4 reference ---------------------------------------------------------------


def good_completions(E: list[list[int]], edge: int, nonedge: int, unknown: int) -> set[tuple]:
    """Every assignment of the unknown pairs giving a cubic graph in which
    non-adjacent vertices share at most one neighbour (and adjacent ones at most two)."""
    n = len(E)
    free = [(i, j) for i in range(n) for j in range(i + 1, n) if E[i][j] == unknown]
    out = set()
    for bits in range(1 << len(free)):
        F = [row[:] for row in E]
        for k, (i, j) in enumerate(free):
            v = edge if bits >> k & 1 else nonedge
            F[i][j] = F[j][i] = v
        nb = [{j for j in range(n) if j != i and F[i][j] == edge} for i in range(n)]
        if any(len(s) != 3 for s in nb):
            continue
        bad = False
        for i in range(n):
            for j in range(i + 1, n):
                c = len(nb[i] & nb[j])
                if (j in nb[i] and c > 2) or (j not in nb[i] and c > 1):
                    bad = True
                    break
            if bad:
                break
        if not bad:
            out.add(tuple(tuple(r) for r in F))
    return out
