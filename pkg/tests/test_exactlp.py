"""Exact rational linear algebra: solve, select, simplex.

Oracles here are independent Fraction-arithmetic implementations; the
production code answers through modular arithmetic and reconstruction.
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ticontext.exactlp import (
    SingularMatrixError,
    _is_prime_31,
    _prime_stream,
    bland_simplex,
    select_independent_columns,
    solve_square,
)


def fraction_solve(M, rhs):
    """Plain Gauss elimination over Fractions."""
    n = len(rhs)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(rhs[i])]
         for i in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError
        A[c], A[p] = A[p], A[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                k = A[r][c] / A[c][c]
                A[r] = [x - k * y for x, y in zip(A[r], A[c])]
    return [A[i][n] / A[i][i] for i in range(n)]


def fraction_rank(cols):
    rows = [[Fraction(x) for x in col] for col in cols]
    rank = 0
    for c in rows:
        v = list(c)
        for r in rows[:rank]:
            lead = next((i for i, x in enumerate(r) if x != 0), None)
            if lead is not None and v[lead] != 0:
                k = v[lead] / r[lead]
                v = [a - k * b for a, b in zip(v, r)]
        if any(x != 0 for x in v):
            rows[rank] = v
            rank += 1
    return rank


small_int = st.integers(-9, 9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(small_int, min_size=n, max_size=n),
                       min_size=n + 1, max_size=n + 1)))
def test_solve_square_matches_fraction_gauss(rows):
    M, rhs = rows[:-1], rows[-1]
    try:
        expect = fraction_solve(M, rhs)
    except ZeroDivisionError:
        with pytest.raises(SingularMatrixError):
            solve_square(np.array(M, dtype=object), rhs)
        return
    got = solve_square(np.array(M, dtype=object), rhs)
    assert [Fraction(int(x.numerator), int(x.denominator)) for x in got] \
        == expect


def test_solve_square_modular_path_large_system():
    # m >= 40 routes through CRT + rational reconstruction
    rng = np.random.default_rng(0)
    n = 45
    M = rng.integers(-50, 50, size=(n, n))
    M += np.diag([500] * n)  # diagonally dominant: nonsingular
    x = [Fraction(int(a), int(b)) for a, b in
         zip(rng.integers(-20, 20, size=n), rng.integers(1, 12, size=n))]
    rhs = [sum(Fraction(int(M[i, j])) * x[j] for j in range(n))
           for i in range(n)]
    got = solve_square(M, rhs)
    assert [Fraction(int(g.numerator), int(g.denominator)) for g in got] == x


def test_solve_square_huge_entries():
    M = np.array([[10 ** 15, 1], [1, -10 ** 15]], dtype=object)
    rhs = [10 ** 15 + 2, 2 - 10 ** 15]
    got = solve_square(M, rhs)
    assert [Fraction(int(g.numerator), int(g.denominator)) for g in got] \
        == fraction_solve(M.tolist(), rhs)


def test_solve_square_rational_rhs():
    M = np.array([[2, 0], [0, 3]], dtype=object)
    got = solve_square(M, [Fraction(1, 3), Fraction(2, 7)])
    assert [Fraction(int(g.numerator), int(g.denominator)) for g in got] \
        == [Fraction(1, 6), Fraction(2, 21)]


def test_prime_helper_agrees_with_trial_division():
    def slow(n):
        if n < 2:
            return False
        return all(n % k for k in range(2, int(n ** 0.5) + 1))

    for n in list(range(2, 200)) + [2 ** 31 - 1, 2 ** 31 - 3, 10 ** 9 + 7]:
        assert _is_prime_31(n) == slow(n)


def test_prime_stream_yields_distinct_31bit_primes():
    seen = []
    for p in _prime_stream():
        seen.append(p)
        if len(seen) == 60:
            break
    assert len(set(seen)) == 60
    assert all(_is_prime_31(p) and p > 1 << 30 for p in seen)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5).flatmap(
    lambda m: st.lists(
        st.lists(small_int, min_size=m, max_size=m),
        min_size=2, max_size=9)))
def test_select_independent_columns_greedy_over_rationals(cols_list):
    m = len(cols_list[0])
    cols = np.array(cols_list, dtype=np.int64).T  # shape (m, n)
    order = list(range(len(cols_list)))
    if fraction_rank(cols_list) < m:
        with pytest.raises(SingularMatrixError):
            select_independent_columns(cols, m, order)
        return
    basis = select_independent_columns(cols, m, order)
    # greedy oracle over Fractions
    expect, kept = [], []
    for j in order:
        if fraction_rank(kept + [cols_list[j]]) > len(kept):
            kept.append(cols_list[j])
            expect.append(j)
        if len(expect) == m:
            break
    assert basis == expect


def test_select_independent_columns_respects_priority():
    v1 = [1, 0, 0]
    v2 = [0, 1, 0]
    cols = np.array([v1, [2, 0, 0], v2, [1, 1, 0], [0, 0, 1]]).T
    basis = select_independent_columns(cols, 3, [1, 3, 0, 2, 4])
    assert basis == [1, 3, 4]


def test_select_independent_columns_raises_when_short():
    cols = np.array([[1, 2, 3], [0, 0, 0]], dtype=np.int64)
    with pytest.raises(SingularMatrixError):
        select_independent_columns(cols, 2, [0, 1, 2])


def test_bland_simplex_small_lp():
    # min -x1 - 2 x2  s.t.  x1 + x2 + s1 = 4, x2 + s2 = 3, x >= 0
    # optimum at (1, 3): value -7
    A = [[1, 1, 1, 0], [0, 1, 0, 1]]
    b = [4, 3]
    c = [-1, -2, 0, 0]
    res = bland_simplex(A, b, c)
    assert res.status == "optimal"
    assert res.value == Fraction(-7)
    assert list(res.x[:2]) == [Fraction(1), Fraction(3)]


def test_bland_simplex_infeasible():
    res = bland_simplex([[1, 1]], [-1], [1, 1])
    assert res.status == "infeasible"


def test_bland_simplex_unbounded():
    # min -x1 with a constraint that never caps x1
    res = bland_simplex([[1, -1]], [1], [-1, 0])
    assert res.status == "unbounded"
