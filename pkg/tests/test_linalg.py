from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from semple_contact import linalg
from semple_contact.errors import InputError, InvariantError

entry = st.fractions(min_value=-6, max_value=6, max_denominator=5)


def matrices(min_rows=1, max_rows=5, square=False):
    def build(shape):
        r, c = shape
        if square:
            c = r
        return st.lists(st.lists(entry, min_size=c, max_size=c), min_size=r, max_size=r)

    dims = st.tuples(st.integers(min_rows, max_rows), st.integers(1, 5))
    return dims.flatmap(build)


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_bareiss_rank_matches_fraction_elimination(m):
    assert linalg.rank(m) == linalg.rank_by_fractions(m)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_matches_sympy(m):
    assert linalg.rank(m) == sympy.Matrix(m).rank()


@settings(max_examples=60, deadline=None)
@given(matrices(square=True))
def test_determinant_matches_sympy(m):
    expected = sympy.Matrix(m).det()
    got = linalg.determinant(m)
    assert got == Fraction(int(expected.p), int(expected.q))


@settings(max_examples=60, deadline=None)
@given(matrices(square=True))
def test_inverse(m):
    if linalg.determinant(m) == 0:
        with pytest.raises(InvariantError):
            linalg.inverse(m)
        return
    inv = linalg.inverse(m)
    n = len(m)
    for i in range(n):
        for j in range(n):
            assert sum(Fraction(m[i][k]) * inv[k][j] for k in range(n)) == (i == j)


def test_low_rank_examples():
    assert linalg.rank([[1, 2], [2, 4]]) == 1
    assert linalg.rank([[0, 0, 0]]) == 0
    assert linalg.rank([]) == 0
    assert linalg.determinant([]) == 1
    assert linalg.determinant([[Fraction(1, 2), 1], [1, 4]]) == 1


def test_solve():
    assert linalg.solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]


@pytest.mark.parametrize("bad", [[[1, 2], [3]], [[1.5]]])
def test_rank_input_errors(bad):
    with pytest.raises(InputError):
        linalg.rank(bad)


def test_determinant_needs_square():
    with pytest.raises(InputError):
        linalg.determinant([[1, 2]])
