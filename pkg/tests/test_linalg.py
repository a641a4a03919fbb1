import random
from fractions import Fraction

import pytest

from hhengine.linalg import (Echelon, Inconsistent, Matrix, nullspace_basis,
                             quotient_basis, rank, solve, SpanSolver)


def m(rows):
    return Matrix.from_rows(rows)


def test_rank_examples():
    assert rank(Matrix.identity(2)) == 2
    assert rank(Matrix.zero(2, 2)) == 0
    assert rank(m([[1, 2], [2, 4]])) == 1


def test_nullspace_examples():
    assert nullspace_basis(Matrix.identity(3)).cols == 0
    z = nullspace_basis(Matrix.zero(2, 2))
    assert z.cols == 2 and rank(z) == 2
    n = nullspace_basis(m([[1, 2], [2, 4]]))
    assert n.cols == 1
    v = n.column(0)
    # proportional to (2, -1)
    assert v[0] * Fraction(-1) == v[1] * Fraction(2)


def test_solve_examples():
    assert solve(Matrix.identity(2), [3, 5]) == (Fraction(3), Fraction(5))
    x = solve(m([[1, 2], [2, 4]]), [1, 2])
    assert x[0] + 2 * x[1] == 1
    with pytest.raises(Inconsistent):
        solve(m([[1, 2], [2, 4]]), [1, 1])


def test_quotient_examples():
    p, s = quotient_basis(2, Matrix.from_columns([(1, 0)], 2))
    assert p.rows == 1 and (p * s) == Matrix.identity(1)
    p, s = quotient_basis(3, Matrix.zero(3, 0))
    assert p.rows == 3 and p == Matrix.identity(3)
    p, s = quotient_basis(2, Matrix.from_columns([(1, 1)], 2))
    assert p.rows == 1
    assert p.apply((1, 0)) == tuple(-x for x in p.apply((0, 1)))


def test_rank_nullity_and_solve_roundtrip():
    rng = random.Random(3)
    for _ in range(25):
        rows = rng.randrange(1, 5)
        cols = rng.randrange(1, 5)
        a = Matrix(rows, cols, [Fraction(rng.randrange(-3, 4)) for _ in range(rows * cols)])
        assert rank(a) + nullspace_basis(a).cols == cols
        n = nullspace_basis(a)
        for j in range(n.cols):
            assert all(x == 0 for x in a.apply(n.column(j)))
        x0 = tuple(Fraction(rng.randrange(-3, 4)) for _ in range(cols))
        b = a.apply(x0)
        x = solve(a, b)
        assert a.apply(x) == b


def test_quotient_rank_invariant():
    rng = random.Random(4)
    for _ in range(15):
        amb = rng.randrange(1, 5)
        k = rng.randrange(0, amb + 1)
        sub = Matrix(amb, k, [Fraction(rng.randrange(-2, 3)) for _ in range(amb * k)])
        p, s = quotient_basis(amb, sub)
        assert p.rows == amb - rank(sub)
        assert (p * s) == Matrix.identity(p.rows)
        assert (p * sub).is_zero()


def test_span_solver():
    sv = SpanSolver(3)
    sv.add({0: Fraction(1), 1: Fraction(1)})
    sv.add({1: Fraction(1)})
    assert sv.express({0: Fraction(2), 1: Fraction(3)}) == [Fraction(2), Fraction(1)]
    assert sv.express({2: Fraction(1)}) is None


def test_echelon_insert_reduces_fully():
    e = Echelon(3)
    e.insert({0: Fraction(1), 1: Fraction(2)})
    e.insert({1: Fraction(1), 2: Fraction(1)})
    # first pivot row must have been back-substituted
    assert e.pivot_row[0].get(1) is None
