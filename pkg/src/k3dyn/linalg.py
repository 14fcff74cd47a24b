"""Small exact linear algebra over QuadExt (matrices as lists of rows)."""

from __future__ import annotations

from .exactnum import QuadExt


def to_quad_matrix(rows) -> list[list[QuadExt]]:
    return [[QuadExt.coerce(v) for v in row] for row in rows]


def mat_mul(a, b):
    n, m, k = len(a), len(b), len(b[0])
    return [[sum((a[i][t] * b[t][j] for t in range(m)), 0) for j in range(k)] for i in range(n)]


def mat_vec(a, v):
    return [sum((a[i][j] * v[j] for j in range(len(v))), 0) for i in range(len(a))]


def transpose(a):
    return [list(col) for col in zip(*a)]


def identity(n: int):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def rref(rows):
    """Reduced row echelon form; returns ``(matrix, pivot_columns)``."""
    a = [list(map(QuadExt.coerce, r)) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def nullspace(rows) -> list[list[QuadExt]]:
    """Basis of the right kernel, one vector per free column."""
    a, pivots = rref(rows)
    ncols = len(rows[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [QuadExt(0)] * ncols
        v[f] = QuadExt(1)
        for i, p in enumerate(pivots):
            v[p] = -a[i][f]
        basis.append(v)
    return basis


def rank(rows) -> int:
    return len(rref(rows)[1])


def solve(a, b):
    """Solve ``a x = b``; returns None when inconsistent.

    Raises ValueError when the solution is not unique.
    """
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = rref(aug)
    n = len(a[0])
    if n in pivots:
        return None
    if len(pivots) < n:
        raise ValueError("system is underdetermined")
    x = [QuadExt(0)] * n
    for i, p in enumerate(pivots):
        x[p] = red[i][n]
    return x
