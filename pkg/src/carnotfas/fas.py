"""Layered linear system A Phi = b whose solvability encodes orbital equivalence.

Rows of the stacked system are numbered ``(s - 1) * m + j`` for layer ``s`` and
row ``j`` of that layer; columns are the vertical indices ``m+1 .. n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactpoly import Poly
from .framekit import MetricPairFrame
from .polymat import det_poly

__all__ = [
    "QMatrix", "FasLayers", "MinorSpec", "q_matrix", "layer1", "next_layer", "build_fas",
    "column_reduce", "b1_closed_form", "btilde_mf_closed_form", "candidate_residual",
    "build_minor", "det_poly", "minor_rows",
]


class FasError(ValueError):
    pass


class QMatrix:
    """``q_jk = sum_{i<=m} c^k_ij u_i`` for 1-based j, k."""

    def __init__(self, f: MetricPairFrame):
        n, m = f.n, f.m
        acc: dict[tuple, dict] = {}
        for (i, j, k), v in f.constants_full().items():
            if i <= m:
                acc.setdefault((j, k), {})[((i, 1),)] = v
        self.n = n
        self._q = {jk: Poly(n, t) for jk, t in acc.items()}
        self._zero = Poly.zero(n)

    def __call__(self, j: int, k: int) -> Poly:
        return self._q.get((j, k), self._zero)

    def nonzero(self) -> dict:
        return dict(self._q)


def q_matrix(f: MetricPairFrame) -> QMatrix:
    return QMatrix(f)


def _u(n: int, i: int) -> Poly:
    return Poly.var(n, i)


@dataclass
class FasLayers:
    frame: MetricPairFrame
    A: list = field(default_factory=list)   # A[s-1][j-1][t-1], column t <-> index m+t
    b: list = field(default_factory=list)   # b[s-1][j-1]
    btilde: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.A)

    def row(self, r: int) -> tuple[list, Poly, Poly]:
        """Stacked row ``r``: (A-row, b entry, reduced b entry)."""
        m = self.frame.m
        s, j = divmod(r - 1, m)
        if s >= self.depth:
            raise FasError(f"row {r} needs layer {s + 1}, only {self.depth} built")
        return self.A[s][j], self.b[s][j], self.btilde[s][j]


def layer1(f: MetricPairFrame, q: QMatrix | None = None) -> tuple[list, list]:
    q = q or q_matrix(f)
    n, m = f.n, f.m
    A = [[q(j, m + t) for t in range(1, n - m + 1)] for j in range(1, m + 1)]
    b = []
    for j in range(1, m + 1):
        aj = f.alpha2_of(j)
        acc = Poly.zero(n)
        for k in range(1, n + 1):
            qjk = q(j, k)
            if not qjk:
                continue
            w = aj - f.alpha2_of(k) if k <= m else aj
            if w:
                acc = acc + qjk * _u(n, k) * w
        b.append(acc)
    return A, b


def next_layer(f: MetricPairFrame, A: list, b: list, q: QMatrix | None = None) -> tuple[list, list]:
    q = q or q_matrix(f)
    n, m = f.n, f.m
    h = f.h1
    d = n - m
    # sum_{i<=m} alpha_i^2 u_i q_{ki} for each vertical k
    weights = {}
    for t in range(1, d + 1):
        acc = Poly.zero(n)
        for i in range(1, m + 1):
            qki = q(m + t, i)
            if qki:
                acc = acc + qki * _u(n, i) * f.alpha2_of(i)
        weights[t] = acc
    A2, b2 = [], []
    for j in range(m):
        row = A[j]
        new_row = []
        for t in range(1, d + 1):
            acc = h(row[t - 1])
            for l in range(1, d + 1):
                a_jl = row[l - 1]
                if a_jl:
                    qlk = q(m + l, m + t)
                    if qlk:
                        acc = acc + a_jl * qlk
            new_row.append(acc)
        A2.append(new_row)
        acc = h(b[j])
        for t in range(1, d + 1):
            if row[t - 1] and weights[t]:
                acc = acc - row[t - 1] * weights[t]
        b2.append(acc)
    return A2, b2


def column_reduce(f: MetricPairFrame, A: list, b: list) -> list:
    """``b - sum_t alpha^2(block of m+t) A_{., m+t} u_{m+t}`` for one layer."""
    n, m = f.n, f.m
    out = []
    for row, bj in zip(A, b):
        acc = bj
        for t, a in enumerate(row, start=1):
            if a:
                acc = acc - a * _u(n, m + t) * f.alpha2_of(m + t)
        out.append(acc)
    return out


def build_fas(f: MetricPairFrame, S: int = 4) -> FasLayers:
    if S < 1:
        raise FasError("at least one layer is required")
    q = q_matrix(f)
    A, b = layer1(f, q)
    out = FasLayers(f)
    for s in range(S):
        if s:
            A, b = next_layer(f, A, b, q)
        out.A.append(A)
        out.b.append(b)
        out.btilde.append(column_reduce(f, A, b))
    return out


def candidate_residual(f: MetricPairFrame, layers: FasLayers, S: int | None = None) -> list[tuple]:
    """Nonzero residuals of ``A^s Phi - b^s`` at ``Phi_{m+t} = alpha^2 u_{m+t}``.

    Returns ``(s, j, residual)`` for every nonzero entry; empty means the
    candidate solves all requested layers.
    """
    S = layers.depth if S is None else S
    if S > layers.depth:
        raise FasError(f"only {layers.depth} layers built")
    out = []
    for s in range(S):
        for j, bt in enumerate(layers.btilde[s], start=1):
            if bt:
                out.append((s + 1, j, -bt))
    return out


# -- closed forms ------------------------------------------------------------

def b1_closed_form(f: MetricPairFrame) -> list:
    q = q_matrix(f)
    idx, n = f.idx, f.n
    out = []
    for j in range(1, idx.m + 1):
        i = idx.block_of(j)
        ai = f.alpha2[i - 1]
        acc = Poly.zero(n)
        for l in idx.I2(i):
            acc = acc + q(j, l) * _u(n, l) * ai
        for s in range(1, idx.k + 1):
            if s == i:
                continue
            w = ai - f.alpha2[s - 1]
            for l in idx.I1(s):
                acc = acc + q(j, l) * _u(n, l) * w
        out.append(acc)
    return out


def btilde1_closed_form(f: MetricPairFrame) -> list:
    """Reduced first layer: the cross-block part of the closed form above."""
    q = q_matrix(f)
    idx, n = f.idx, f.n
    out = []
    for j in range(1, idx.m + 1):
        i = idx.block_of(j)
        acc = Poly.zero(n)
        for v in range(1, idx.k + 1):
            if v == i:
                continue
            w = f.alpha2[i - 1] - f.alpha2[v - 1]
            for l in idx.I1(v):
                acc = acc + q(j, l) * _u(n, l) * w
        out.append(acc)
    return out


def btilde_mf_closed_form(f: MetricPairFrame, fidx: int) -> Poly:
    """Reduced second-layer entry for row ``fidx`` of the first block, in closed form."""
    idx, n = f.idx, f.n
    if not 1 <= fidx <= idx.ms[0]:
        raise FasError(f"row {fidx} is not in the first block [1:{idx.ms[0]}]")
    q = q_matrix(f)
    h = f.h1
    a1 = f.alpha2[0]
    total = Poly.zero(n)
    for i in range(2, idx.k + 1):
        w = a1 - f.alpha2[i - 1]
        if not w:
            continue
        acc = Poly.zero(n)
        for wi in idx.I1(i):
            qfw = q(fidx, wi)
            if not qfw:
                continue
            acc = acc + h(qfw) * _u(n, wi)
            for x in range(1, n + 1):
                qwx = q(wi, x)
                if qwx:
                    acc = acc + qfw * qwx * _u(n, x)
        for r in idx.I2(1):
            qfr = q(fidx, r)
            if not qfr:
                continue
            for wi in idx.I1(i):
                acc = acc + qfr * q(r, wi) * _u(n, wi)
            for t in idx.I2(i):
                acc = acc + qfr * q(r, t) * _u(n, t)
        total = total + acc * w
    return total


# -- minors ------------------------------------------------------------------

@dataclass(frozen=True)
class MinorSpec:
    kind: str          # "M", "P" or "N"
    block: int         # i0, 1-based
    reduced: bool = True  # attach b-tilde (True) or b (False)


def minor_rows(f: MetricPairFrame, spec: MinorSpec) -> list[int]:
    idx = f.idx
    k, i0 = idx.k, spec.block
    if not 1 <= i0 <= k:
        raise FasError(f"block {i0} outside [1:{k}]")
    first, d = idx.first, idx.ds
    rows: list[int] = []
    if spec.kind == "M":
        for i in range(1, k + 1):
            top = first(i) + d[i - 1] if i == i0 else first(i) + d[i - 1] - 1
            rows += range(first(i), top + 1)
    elif spec.kind == "P":
        for i in range(1, k + 1):
            if i == i0:
                rows += range(first(i), first(i) + d[i - 1] + 1)
            else:
                rows += range(first(i) + 1, first(i) + d[i - 1] + 1)
    elif spec.kind == "N":
        for i in range(1, k + 1):
            rows += range(first(i), first(i) + d[i - 1])
        rows.append(idx.m + idx.n_(i0 - 1) + 1)
    else:
        raise FasError(f"unknown minor kind {spec.kind!r}")
    return sorted(rows)


def build_minor(f: MetricPairFrame, layers: FasLayers, spec: MinorSpec) -> tuple[list, list[int]]:
    """Square matrix ``[A rows | b column]`` and the stacked row indices used."""
    rows = minor_rows(f, spec)
    need = max(rows)
    if need > layers.depth * f.m:
        raise FasError(f"row {need} exceeds the {layers.depth} built layers")
    mat = []
    for r in rows:
        arow, bj, btj = layers.row(r)
        mat.append(list(arow) + [btj if spec.reduced else bj])
    if len(mat) != f.n - f.m + 1:
        raise FasError("row set does not give a square augmented matrix")
    return mat, rows
