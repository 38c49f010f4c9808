import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sprout_forge.exact_linalg import (
    LinalgError, SparseMatrix, check_certificate, rank, residual, solve, support_reduce,
)


def test_scalar_system():
    out = solve(SparseMatrix.from_dense([[2]]), {0: 1})
    assert out.status == "Consistent"
    assert out.particular == {0: Fraction(1, 2)}
    assert out.kernel_basis == []


def test_rank_one_contradiction():
    A = SparseMatrix.from_dense([[1, 1], [2, 2]])
    out = solve(A, {0: 1, 1: 3})
    assert out.status == "Inconsistent"
    assert out.certificate == {0: Fraction(-2), 1: Fraction(1)}
    assert check_certificate(A, {0: 1, 1: 3}, out.certificate)


def test_underdetermined():
    A = SparseMatrix.from_dense([[1, 0, 1], [0, 1, 1]])
    out = solve(A, {0: 1, 1: 1})
    assert out.particular == {0: 1, 1: 1}
    assert out.kernel_basis == [{0: -1, 1: -1, 2: 1}]


@pytest.mark.parametrize("dense,expected", [
    ([[0, 0, 0]] * 3, 0),
    ([[int(i == j) for j in range(4)] for i in range(4)], 4),
    ([[1, 2], [2, 4]], 1),
])
def test_rank(dense, expected):
    assert rank(SparseMatrix.from_dense(dense)) == expected
    assert rank(SparseMatrix.from_dense(dense), "markowitz") == expected


def test_no_zero_entries_stored():
    A = SparseMatrix(2, 2, {(0, 0): 0, (1, 1): Fraction(3, 6)})
    assert A.entries == {(1, 1): Fraction(1, 2)}


def test_index_bounds():
    with pytest.raises(LinalgError):
        SparseMatrix(2, 2, {(2, 0): 1})


def test_dimension_mismatch():
    with pytest.raises(LinalgError):
        solve(SparseMatrix.from_dense([[1, 2]]), {3: 1})


def test_degenerate_shapes():
    out = solve(SparseMatrix(0, 3), {})
    assert out.consistent and out.particular == {} and len(out.kernel_basis) == 3
    out = solve(SparseMatrix(2, 0), {})
    assert out.consistent and out.kernel_basis == []
    out = solve(SparseMatrix(2, 0), {1: 5})
    assert not out.consistent
    assert check_certificate(SparseMatrix(2, 0), {1: 5}, out.certificate)


def test_support_reduce_trivial_cases():
    x = {0: Fraction(1), 2: Fraction(3)}
    assert support_reduce(x, []) == x
    assert support_reduce(x, [dict(x)]) == {}


def _random_matrix(rng, rows, cols, density=0.4):
    entries = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() < density:
                entries[(r, c)] = rng.randint(-3, 3)
    return SparseMatrix(rows, cols, entries)


@settings(max_examples=60, derandomize=True, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 7), st.integers(1, 7), st.sampled_from(["first", "markowitz"]))
def test_solve_contract(seed, rows, cols, rule):
    rng = random.Random(seed)
    A = _random_matrix(rng, rows, cols)
    b = {r: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for r in range(rows)}
    out = solve(A, b, rule)
    if out.consistent:
        assert residual(A, out.particular, b) == {}
        for k in out.kernel_basis:
            assert A.matvec(k) == {}
        assert out.rank + len(out.kernel_basis) == cols
        # particular plus a combination of kernel vectors still solves
        x = dict(out.particular)
        for k in out.kernel_basis:
            t = Fraction(rng.randint(-3, 3), 2)
            for c, v in k.items():
                x[c] = x.get(c, 0) + t * v
        assert residual(A, x, b) == {}
    else:
        assert check_certificate(A, b, out.certificate)


@settings(max_examples=40, derandomize=True, deadline=None)
@given(st.integers(0, 10**6))
def test_synthetic_inconsistent_certificate(seed):
    # a row duplicated with a shifted right-hand side can never be satisfied
    rng = random.Random(seed)
    A0 = _random_matrix(rng, 4, 5, 0.6)
    rows = [A0.row(r) for r in range(4)]
    rows.append({c: 2 * v for c, v in rows[0].items()} or {0: 1})
    if not rows[0]:
        rows[0] = {0: Fraction(1, 2)}
    A = SparseMatrix.from_rows(rows, 5)
    x = {c: rng.randint(-2, 2) for c in range(5)}
    b = A.matvec(x)
    b[4] = b.get(4, 0) + 1
    out = solve(A, b, "markowitz")
    assert out.status == "Inconsistent"
    y = out.certificate
    assert A.rmatvec(y) == {}
    assert sum(v * b.get(r, 0) for r, v in y.items()) != 0


@settings(max_examples=30, derandomize=True, deadline=None)
@given(st.integers(0, 10**6))
def test_pivot_rules_agree(seed):
    # pivot choice changes which columns are free, never the rank or solvability
    rng = random.Random(seed)
    A = _random_matrix(rng, 6, 6, 0.5)
    b = A.matvec({c: rng.randint(-2, 2) for c in range(6)})
    first, mark = solve(A, b, "first"), solve(A, b, "markowitz")
    assert first.rank == mark.rank
    assert first.status == mark.status == "Consistent"


def test_repeatable():
    rng = random.Random(7)
    A = _random_matrix(rng, 12, 15, 0.3)
    b = {r: 1 for r in range(12)}
    runs = [solve(A, b, "markowitz") for _ in range(3)]
    assert all(r.particular == runs[0].particular and r.kernel_basis == runs[0].kernel_basis for r in runs)
