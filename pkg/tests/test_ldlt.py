from __future__ import annotations

import random

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import is_psd_minors, is_psd_pivoting, matmul, rank
from srgsearch.ldlt import CapacityError, GramState, dot, is_psd_by_ldlt, vec_mat


def gram_of(vectors) -> list[list]:
    return [[mpq(sum(a * b for a, b in zip(u, v))) for v in vectors] for u in vectors]


def transpose(A):
    return [list(r) for r in zip(*A)]


def feed(rows) -> tuple[GramState, int]:
    """Add rows until the first rejection; return the state and the accepted count."""
    s = GramState(len(rows) or 1)
    for i, row in enumerate(rows):
        if not s.add_one(row[: i + 1]):
            return s, i
    return s, len(rows)


@st.composite
def symmetric_matrices(draw):
    """Mix of Gram matrices (PSD, often singular), perturbed Grams and plain symmetric matrices."""
    n = draw(st.integers(1, 8))
    kind = draw(st.sampled_from(["gram", "perturbed", "random"]))
    if kind == "random":
        vals = st.fractions(min_value=-3, max_value=3, max_denominator=6)
        A = [[mpq(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                A[i][j] = A[j][i] = mpq(draw(vals))
        return A
    dim = draw(st.integers(1, n))
    vecs = [[draw(st.integers(-3, 3)) for _ in range(dim)] for _ in range(n)]
    A = gram_of(vecs)
    if kind == "perturbed":
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        eps = mpq(draw(st.integers(-2, 2)), draw(st.integers(1, 5)))
        A[i][j] += eps
        if i != j:
            A[j][i] += eps
    return A


@settings(max_examples=250, deadline=None)
@given(symmetric_matrices())
def test_add_one_agrees_with_oracle(A):
    s, accepted = feed(A)
    for k in range(1, len(A) + 1):
        leading = [row[:k] for row in A[:k]]
        assert (accepted >= k) == is_psd_pivoting(leading)
    if accepted == len(A):
        L, D = s.lower(), s.diag()
        LD = [[L[i][j] * D[j] for j in range(len(A))] for i in range(len(A))]
        assert matmul(LD, transpose(L)) == matmul(A, np.eye(len(A), dtype=int).tolist())
        assert s.matrix() == A


def test_oracles_agree_with_each_other_and_numpy():
    rng = random.Random(1)
    for _ in range(100):
        n = rng.randint(1, 6)
        vecs = [[rng.randint(-2, 2) for _ in range(rng.randint(1, n))] for _ in range(n)]
        A = gram_of([v + [0] * (n - len(v)) for v in vecs])
        if rng.random() < 0.5:
            i = rng.randrange(n)
            A[i][i] -= mpq(1, rng.randint(1, 4))
        psd = is_psd_pivoting(A)
        assert psd == is_psd_minors(A) == is_psd_by_ldlt(A)
        eig = np.linalg.eigvalsh(np.array([[float(x) for x in r] for r in A]))
        if psd:
            assert eig.min() > -1e-9
        else:
            assert eig.min() < 1e-9


def test_reject_leaves_state_unchanged():
    s = GramState(4)
    assert s.add_one([1])
    assert s.add_one([mpq(1, 2), 1])
    before = (s.matrix(), s.diag(), s.lower())
    assert not s.add_one([1, -1, 1])  # cosines 1 and -1 with two vectors at 60 degrees
    assert (s.matrix(), s.diag(), s.lower()) == before
    assert s.n == 2


def test_pop_and_truncate():
    s = GramState(5)
    rows = [[1], [0, 1], [1, 0, 1], [0, 0, 0, 1]]
    for r in rows:
        assert s.add_one(r)
    assert s.rank() == 3
    s.pop()
    assert s.n == 3 and s.rank() == 2
    s.truncate(1)
    assert s.n == 1
    with pytest.raises(IndexError):
        GramState(1).pop()


def test_singular_state_requires_consistency():
    s = GramState(3)
    assert s.add_one([1])
    assert s.add_one([1, 1])  # same vector twice
    assert s.rank() == 1
    assert not s.add_one([1, 0, 1])  # would need different products with equal vectors
    assert s.add_one([mpq(1, 3), mpq(1, 3), 1])


def test_capacity_and_row_length():
    s = GramState(1)
    assert s.add_one([1])
    with pytest.raises(CapacityError):
        s.add_one([0, 1])
    with pytest.raises(ValueError):
        GramState(2).add_one([1, 1])


def test_inverse_rows_invert_lower_factor():
    rng = random.Random(4)
    vecs = [[rng.randint(-3, 3) for _ in range(5)] for _ in range(7)]
    A = gram_of(vecs)
    s, accepted = feed(A)
    assert accepted == 7
    R, L = s.R(), s.lower()
    assert matmul(R, L) == [[int(i == j) for j in range(7)] for i in range(7)]


def test_projection_of_spd_gram_is_inverse():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.randint(1, 8)
        vecs = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
        A = gram_of(vecs)
        if rank(A) < n:
            continue
        s, accepted = feed(A)
        assert accepted == n
        P = s.projection_matrix()
        assert matmul(P, A) == [[int(i == j) for j in range(n)] for i in range(n)]


def test_projection_of_rank_deficient_gram():
    rng = random.Random(10)
    for _ in range(40):
        n = rng.randint(2, 8)
        dim = rng.randint(1, n - 1)
        vecs = [[rng.randint(-3, 3) for _ in range(dim)] for _ in range(n)]
        A = gram_of(vecs)
        s, accepted = feed(A)
        assert accepted == n
        assert s.rank() == rank(A)
        P = s.projection_matrix()
        for _ in range(5):
            c = [mpq(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
            r = vec_mat(c, A)  # consistent: r lies in the row space of A
            p = vec_mat(r, P)
            assert vec_mat(p, A) == r
        nulls = s.null_rows()
        assert len(nulls) == n - s.rank()
        for z in nulls:
            assert vec_mat(z, A) == [0] * n


def test_dot_and_vec_mat():
    assert dot([1, 2], [3, 4]) == 11
    assert vec_mat([1, 1], [[1, 2], [3, 4]]) == [4, 6]
