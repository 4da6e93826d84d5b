from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from graphcodes import gf2
from graphcodes.gf2 import BitMatrix, BitVector


def matrices(max_rows=6, max_cols=7):
    return st.integers(0, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r).map(
                lambda rows: BitMatrix.from_rows(rows, c))))


def brute_rank(m: BitMatrix) -> int:
    span = {0}
    for r in m.rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def test_rank_examples():
    assert gf2.rank(BitMatrix.identity(3)) == 3
    assert gf2.rank(BitMatrix.from_lists([[1, 1, 0], [0, 1, 1]])) == 2
    assert gf2.rank(BitMatrix.zeros(3, 4)) == 0


def test_kernel_examples():
    k = gf2.kernel_basis(BitMatrix.from_lists([[1, 1, 0], [0, 1, 1]]))
    assert [v.bits() for v in k] == [(1, 1, 1)]
    assert gf2.kernel_basis(BitMatrix.identity(4)) == []
    assert len(gf2.kernel_basis(BitMatrix.zeros(2, 3))) == 3


def test_solve_examples():
    assert gf2.solve(BitMatrix.identity(2), BitVector.from_bits([1, 1])).bits() == (1, 1)
    x = gf2.solve(BitMatrix.from_lists([[1, 1]]), BitVector.from_bits([1]))
    assert x.bits() in {(1, 0), (0, 1)}
    assert gf2.solve(BitMatrix.from_lists([[1, 1], [1, 1]]), BitVector.from_bits([1, 0])) is None


def test_solve_rejects_wrong_length():
    with pytest.raises(ValueError):
        gf2.solve(BitMatrix.identity(2), BitVector.from_bits([1, 1, 1]))


def test_bitvector_bounds_and_ops():
    v = BitVector.from_support(5, [0, 3])
    assert v[3] == 1 and v[1] == 0 and v.weight() == 2
    with pytest.raises(IndexError):
        v[5]
    w = BitVector.from_support(5, [3, 4])
    assert (v ^ w).support() == [0, 4]
    assert v.dot(w) == 1


@given(matrices())
def test_rank_matches_span_enumeration(m):
    assert gf2.rank(m) == brute_rank(m)


@given(matrices())
def test_rank_nullity(m):
    kernel = gf2.kernel_basis(m)
    assert gf2.rank(m) + len(kernel) == m.ncols
    for v in kernel:
        assert m.apply(v).is_zero()
    assert gf2.rank([v.word for v in kernel]) == len(kernel)


@given(matrices(), st.data())
def test_solve_is_exact(m, data):
    b = data.draw(st.integers(0, (1 << m.nrows) - 1))
    x = gf2.solve(m, b)
    consistent = any(m.apply(c).word == b for c in range(1 << m.ncols))
    assert (x is not None) == consistent
    if x is not None:
        assert m.apply(x).word == b


@given(matrices(), st.randoms(use_true_random=False))
def test_rank_invariant_under_row_operations(m, rnd):
    rows = list(m.rows)
    rnd.shuffle(rows)
    if len(rows) >= 2:
        i, j = rnd.sample(range(len(rows)), 2)
        rows[i] ^= rows[j]
    assert gf2.rank(rows) == gf2.rank(m)


@given(matrices(4, 5), matrices(5, 4))
def test_matmul_matches_lists(a, b):
    if a.ncols != b.nrows:
        return
    prod = (a @ b).to_lists()
    la, lb = a.to_lists(), b.to_lists()
    for i, j in itertools.product(range(a.nrows), range(b.ncols)):
        assert prod[i][j] == sum(la[i][k] * lb[k][j] for k in range(a.ncols)) % 2


@given(matrices())
def test_transpose_twice(m):
    assert m.T.T == m
