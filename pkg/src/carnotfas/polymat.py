"""Determinants and minors of small matrices with Poly entries."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .exactpoly import Poly, PolyError


def _nvars(mat: Sequence[Sequence[Poly]]) -> int:
    for row in mat:
        for p in row:
            return p.n
    raise PolyError("empty matrix has no variable count")


def _check_square(mat) -> int:
    k = len(mat)
    if any(len(r) != k for r in mat):
        raise PolyError("matrix is not square")
    return k


def det_bareiss(mat: Sequence[Sequence[Poly]], n: int | None = None) -> Poly:
    """Fraction-free elimination with row pivoting and exact polynomial division."""
    k = _check_square(mat)
    if k == 0:
        return Poly.const(n or 0, 1)
    nv = _nvars(mat)
    a = [list(r) for r in mat]
    sign = 1
    prev = Poly.const(nv, 1)
    for c in range(k - 1):
        p = next((i for i in range(c, k) if a[i][c]), None)
        if p is None:
            return Poly.zero(nv)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        for i in range(c + 1, k):
            for j in range(c + 1, k):
                num = a[i][j] * piv - a[i][c] * a[c][j]
                a[i][j] = num.exact_div(prev) if prev != 1 else num
            a[i][c] = Poly.zero(nv)
        prev = piv
    d = a[k - 1][k - 1]
    return -d if sign < 0 else d


def det_cofactor(mat: Sequence[Sequence[Poly]], n: int | None = None) -> Poly:
    """Laplace expansion along rows, memoized on the remaining column set."""
    k = _check_square(mat)
    if k == 0:
        return Poly.const(n or 0, 1)
    nv = _nvars(mat)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple) -> Poly:
        if row == k:
            return Poly.const(nv, 1)
        total = Poly.zero(nv)
        for pos, c in enumerate(cols):
            e = mat[row][c]
            if not e:
                continue
            sub = minor(row + 1, cols[:pos] + cols[pos + 1:])
            term = e * sub
            total = total - term if pos % 2 else total + term
        return total

    return minor(0, tuple(range(k)))


def det_poly(mat: Sequence[Sequence[Poly]], check: bool = False) -> Poly:
    """Exact determinant.  With ``check`` the two methods are compared (size <= 5)."""
    d = det_bareiss(mat)
    if check and len(mat) <= 5:
        alt = det_cofactor(mat)
        if alt != d:
            raise AssertionError("Bareiss and cofactor determinants disagree")
    return d


def first_nonzero_minor(mat: Sequence[Sequence[Poly]], size: int):
    """Row and column index tuples of some nonzero ``size``-minor, or None.

    For each row subset the minors over all column subsets are built together
    by expanding along the last row, so shared sub-minors are computed once.
    """
    nr = len(mat)
    nc = len(mat[0]) if nr else 0
    if size == 0:
        return (), ()
    if size > min(nr, nc):
        return None
    nv = _nvars(mat)
    for rows in combinations(range(nr), size):
        level = {(): Poly.const(nv, 1)}
        for t, r in enumerate(rows):
            nxt: dict[tuple, Poly] = {}
            for cols in combinations(range(nc), t + 1):
                acc = Poly.zero(nv)
                for pos, c in enumerate(cols):
                    e = mat[r][c]
                    if not e:
                        continue
                    sub = level.get(cols[:pos] + cols[pos + 1:])
                    if not sub:
                        continue
                    # expansion along the last row: sign (-1)^(t + pos)
                    term = e * sub
                    acc = acc + term if (t + pos) % 2 == 0 else acc - term
                if acc:
                    nxt[cols] = acc
            level = nxt
            if not level:
                break
        for cols, val in level.items():
            if val:
                return rows, cols
    return None


def eval_matrix(mat: Sequence[Sequence[Poly]], point) -> list[list]:
    return [[p.eval(point) for p in row] for row in mat]
