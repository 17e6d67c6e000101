"""Incremental exact LDLT with semi-definiteness rejection, and projections.

``GramState`` grows a Gram matrix one row at a time.  Each accepted row
extends L, D and the symmetric matrix M; rejection means the extended matrix
is not positive semi-definite (either a negative pivot, or a zero pivot whose
column is inconsistent, which can only happen for an indefinite form).
Backtracking is ``pop()``: the arrays are preallocated and the last row is
simply forgotten.

Rows of R = L^-1 are computed lazily, the first time they are asked for,
and invalidated on ``pop``.
"""

from __future__ import annotations

from collections.abc import Sequence

from gmpy2 import mpq

CAPACITY = 40
_ZERO = mpq(0)
_ONE = mpq(1)


class CapacityError(RuntimeError):
    pass


class GramState:
    def __init__(self, capacity: int = CAPACITY):
        self.capacity = capacity
        self.n = 0
        self.M = [[_ZERO] * capacity for _ in range(capacity)]
        self.L = [[_ZERO] * capacity for _ in range(capacity)]
        # LD[i][j] = L[i][j] * D[j], kept to save a multiplication per term
        self.LD = [[_ZERO] * capacity for _ in range(capacity)]
        self.D = [_ZERO] * capacity
        self._R: list[list | None] = [None] * capacity

    def add_one(self, row: Sequence) -> bool:
        """Try to extend by one vector whose dot products with vectors 0..n are ``row``.

        ``row[n]`` is the squared length of the new vector.  Returns False
        (leaving the state unchanged) if the extended Gram matrix is not
        positive semi-definite.
        """
        n = self.n
        if n >= self.capacity:
            raise CapacityError(f"GramState is full ({self.capacity})")
        if len(row) != n + 1:
            raise ValueError(f"expected a row of length {n + 1}, got {len(row)}")
        L, LD, D = self.L, self.LD, self.D
        Ln, LDn = L[n], LD[n]
        for i in range(n):
            Li = L[i]
            s = row[i]
            for j in range(i):
                s -= LDn[j] * Li[j]
            d = D[i]
            if d == 0:
                if s != 0:
                    return False
                Ln[i] = _ZERO
                LDn[i] = _ZERO
            else:
                Ln[i] = s / d
                LDn[i] = s
        s = row[n]
        for j in range(n):
            s -= LDn[j] * Ln[j]
        if s < 0:
            return False
        Ln[n] = _ONE
        LDn[n] = s
        D[n] = s
        Mn = self.M[n]
        for i in range(n + 1):
            v = mpq(row[i])
            Mn[i] = v
            self.M[i][n] = v
        self._R[n] = None
        self.n = n + 1
        return True

    def pop(self) -> None:
        """Forget the last accepted row."""
        if self.n == 0:
            raise IndexError("pop from empty GramState")
        self.n -= 1
        self._R[self.n] = None

    def truncate(self, n: int) -> None:
        while self.n > n:
            self.pop()

    def R_row(self, i: int) -> list:
        """Row ``i`` of R = L^-1 (length ``n``), via R_i = e_i - sum_j L[i][j] R_j."""
        if i >= self.n:
            raise IndexError(i)
        cached = self._R[i]
        if cached is not None and len(cached) >= i + 1:
            return cached
        Li = self.L[i]
        r = [_ZERO] * (i + 1)
        r[i] = _ONE
        for j in range(i):
            c = Li[j]
            if c:
                Rj = self.R_row(j)
                for k in range(j + 1):
                    r[k] -= c * Rj[k]
        self._R[i] = r
        return r

    def R(self) -> list[list]:
        n = self.n
        return [self.R_row(i) + [_ZERO] * (n - i - 1) for i in range(n)]

    def matrix(self) -> list[list]:
        return [self.M[i][: self.n] for i in range(self.n)]

    def diag(self) -> list:
        return self.D[: self.n]

    def lower(self) -> list[list]:
        return [self.L[i][: i + 1] + [_ZERO] * (self.n - i - 1) for i in range(self.n)]

    def rank(self) -> int:
        return sum(1 for d in self.D[: self.n] if d != 0)

    def null_rows(self) -> list[list]:
        """Rows R_i with D_i = 0; together a basis of the radical of M."""
        n = self.n
        return [self.R_row(i) + [_ZERO] * (n - i - 1) for i in range(n) if self.D[i] == 0]

    def projection_matrix(self) -> list[list]:
        """P = sum over nonzero pivots of R_i^T R_i / D_i."""
        n = self.n
        P = [[_ZERO] * n for _ in range(n)]
        for i in range(n):
            d = self.D[i]
            if d == 0:
                continue
            Ri = self.R_row(i)
            scaled = [x / d for x in Ri]
            for a, ra in enumerate(Ri):
                if ra:
                    Pa = P[a]
                    for b, sb in enumerate(scaled):
                        Pa[b] += ra * sb
        return P


def is_psd_by_ldlt(rows: Sequence[Sequence]) -> bool:
    """Feed a symmetric matrix row by row into a fresh GramState."""
    st = GramState(max(len(rows), 1))
    return all(st.add_one([mpq(x) for x in row[: i + 1]]) for i, row in enumerate(rows))


def vec_mat(r: Sequence, P: Sequence[Sequence]) -> list:
    n = len(P)
    out = [_ZERO] * n
    for i, ri in enumerate(r):
        if ri:
            Pi = P[i]
            for j in range(n):
                out[j] += ri * Pi[j]
    return out


def dot(a: Sequence, b: Sequence):
    s = _ZERO
    for x, y in zip(a, b):
        s += x * y
    return s
