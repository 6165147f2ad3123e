"""Exact linear algebra over the rationals.

Rank and determinant use fraction-free (Bareiss) elimination on integer
rows obtained by clearing denominators row by row; no floating point is
involved anywhere.  ``solve``/``inverse`` use plain Gauss-Jordan over
``Fraction``.
"""
from fractions import Fraction
from math import lcm

from .errors import InputError, InvariantError


def _as_fraction(value):
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise InputError(f"non-numeric matrix entry {value!r}")


def _integer_rows(rows):
    """Scale each row to integers; return (int rows, product of scales)."""
    out = []
    scale = 1
    for row in rows:
        fr = [_as_fraction(v) for v in row]
        m = lcm(*(v.denominator for v in fr)) if fr else 1
        out.append([int(v * m) for v in fr])
        scale *= m
    return out, scale


def _bareiss(mat, ncols):
    """In-place fraction-free row echelon form; returns (rank, sign, pivots)."""
    nrows = len(mat)
    r = 0
    prev = 1
    sign = 1
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            mat[r], mat[piv] = mat[piv], mat[r]
            sign = -sign
        p = mat[r][c]
        for i in range(r + 1, nrows):
            a = mat[i][c]
            row_i = mat[i]
            row_r = mat[r]
            for k in range(c + 1, ncols):
                row_i[k] = (p * row_i[k] - a * row_r[k]) // prev
            row_i[c] = 0
        prev = p
        pivots.append(c)
        r += 1
    return r, sign, pivots


def rank(rows):
    """Exact rank of a matrix given as a sequence of rows."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise InputError("ragged matrix")
    mat, _ = _integer_rows(rows)
    return _bareiss(mat, ncols)[0]


def determinant(rows):
    """Exact determinant of a square matrix (as a Fraction)."""
    rows = [list(r) for r in rows]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise InputError("determinant needs a square matrix")
    if n == 0:
        return Fraction(1)
    mat, scale = _integer_rows(rows)
    rk, sign, _ = _bareiss(mat, n)
    if rk < n:
        return Fraction(0)
    return Fraction(sign * mat[n - 1][n - 1], scale)


def rank_by_fractions(rows):
    """Rank by ordinary rational Gaussian elimination.

    Slower than :func:`rank`; kept as an independent cross-check.
    """
    mat = [[Fraction(v) for v in r] for r in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c] / mat[r][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        r += 1
        if r == len(mat):
            break
    return r


def inverse(rows):
    """Inverse of a square rational matrix; raises InvariantError if singular."""
    n = len(rows)
    aug = [
        [Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(rows)
    ]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise InvariantError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [v / p for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def solve(rows, rhs):
    """Solve ``A x = b`` exactly for square nonsingular ``A``."""
    inv = inverse(rows)
    b = [Fraction(v) for v in rhs]
    return [sum((a * v for a, v in zip(row, b)), Fraction(0)) for row in inv]
