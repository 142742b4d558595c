"""Exact rational matrix routines: rank, consistent solve, nullspace, inverse.

Matrices are plain lists of Fraction rows.  Sizes stay in the low hundreds,
so Gaussian elimination is fast enough as long as rank computations clear
rows to integers first (bignum integer arithmetic beats Fraction churn).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Row = list[Fraction]


def _int_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = 1
        for x in row:
            den = lcm(den, x.denominator)
        ints = [int(x * den) for x in row]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if g:
            out.append([v // g for v in ints])
    return out


def rank_rows(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over the rationals via fraction-free integer elimination."""
    work = _int_rows(rows)
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(work)):
            if work[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        prow = work[rank]
        p = prow[col]
        for r in range(rank + 1, len(work)):
            a = work[r][col]
            if not a:
                continue
            row = [p * x - a * y for x, y in zip(work[r], prow)]
            g = 0
            for v in row:
                g = gcd(g, v)
            work[r] = [v // g for v in row] if g else row
        rank += 1
        if rank == len(work):
            break
    return rank


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form and the pivot column indices."""
    work = [list(map(Fraction, row)) for row in rows]
    pivots: list[int] = []
    if not work:
        return work, pivots
    nrows, ncols = len(work), len(work[0])
    r = 0
    for col in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if work[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = 1 / work[r][col]
        work[r] = [x * inv for x in work[r]]
        for i in range(nrows):
            if i != r and work[i][col]:
                f = work[i][col]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    return work, pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int | None = None) -> list[Row]:
    """Basis of the right nullspace, one canonical vector per free column."""
    if not rows:
        if ncols is None:
            raise ValueError("cannot infer the column count of an empty matrix")
        return [
            [Fraction(1) if j == i else Fraction(0) for j in range(ncols)]
            for i in range(ncols)
        ]
    ncols = len(rows[0])
    echelon, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -echelon[r][fc]
        basis.append(vec)
    return basis


def solve_consistent(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Row | None:
    """Solve A x = b for a possibly overdetermined A; None when inconsistent.
    Free variables (if any) are set to zero."""
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    ncols = len(rows[0]) if rows else 0
    echelon, pivots = rref(aug)
    if ncols in pivots:
        return None
    sol = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        sol[pc] = echelon[r][ncols]
    return sol


def invert(matrix: Sequence[Sequence[Fraction]]) -> list[Row]:
    n = len(matrix)
    aug = [
        list(map(Fraction, row)) + [Fraction(1 if i == j else 0) for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    echelon, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in echelon]


def matvec(rows: Sequence[Sequence[Fraction]], vec: Sequence[Fraction]) -> Row:
    return [sum((a * x for a, x in zip(row, vec)), Fraction(0)) for row in rows]
