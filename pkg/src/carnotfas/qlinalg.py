"""Small exact linear algebra over the rationals (row reduction, kernels, solves)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list  # list[list[Fraction]]


def as_fracs(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in r] for r in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    a = as_fracs(rows)
    if not a:
        return a, []
    nr, nc = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{x : A x = 0}``, one vector per free column."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    nc = len(rows[0])
    red, piv = rref(rows)
    free = [c for c in range(nc) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * nc
        v[fc] = Fraction(1)
        for r, pc in enumerate(piv):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def column_space(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    """Independent columns of A (as vectors) spanning its image."""
    if not rows:
        return []
    _, piv = rref(rows)
    return [[Fraction(r[c]) for r in rows] for c in piv]


def transpose(rows: Sequence[Sequence]) -> Matrix:
    return [list(c) for c in zip(*rows)]


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """One solution of ``A x = rhs`` or None when inconsistent."""
    nc = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if nc in piv:
        return None
    x = [Fraction(0)] * nc
    for r, pc in enumerate(piv):
        x[pc] = red[r][nc]
    return x


def det(rows: Sequence[Sequence]) -> Fraction:
    a = as_fracs(rows)
    n = len(a)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d
