"""Adapted frames for a pair of metrics on a step-2 distribution with split symbol.

A frame is pure data: block sizes, one eigenvalue alpha^2 per block and a
table of constant structure coefficients ``c^k_ij``.  Horizontal indices
``1..m`` are grouped by block, vertical indices ``m+1..n`` likewise.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import qlinalg
from .exactpoly import Derivation, h1_images, rat_str, to_rat
from .ngla import (GradedLieAlgebra, algebra_from_json, algebra_to_json, ad_matrix_at,
                   is_ad_surjective, make_algebra, random_step2_algebra, validate)


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class BlockIndexing:
    ms: tuple
    ds: tuple

    def __post_init__(self):
        object.__setattr__(self, "ms", tuple(int(x) for x in self.ms))
        object.__setattr__(self, "ds", tuple(int(x) for x in self.ds))
        if len(self.ms) != len(self.ds) or not self.ms:
            raise FrameError("need the same positive number of m_i and d_i")
        if any(x < 1 for x in self.ms) or any(x < 0 for x in self.ds):
            raise FrameError("block sizes must satisfy m_i >= 1 and d_i >= 0")

    @property
    def k(self) -> int:
        return len(self.ms)

    def n_(self, i: int) -> int:
        """n_i = m_1 + ... + m_i (n_0 = 0)."""
        return sum(self.ms[:i])

    def e_(self, i: int) -> int:
        return sum(self.ds[:i])

    @property
    def m(self) -> int:
        return self.n_(self.k)

    @property
    def n(self) -> int:
        return self.m + self.e_(self.k)

    def first(self, i: int) -> int:
        return self.n_(i - 1) + 1

    def I1(self, i: int) -> list[int]:
        return list(range(self.n_(i - 1) + 1, self.n_(i) + 1))

    def I2(self, i: int) -> list[int]:
        return list(range(self.m + self.e_(i - 1) + 1, self.m + self.e_(i) + 1))

    def block_of(self, j: int) -> int:
        """Block number (1-based) owning horizontal or vertical index ``j``."""
        if 1 <= j <= self.m:
            for i in range(1, self.k + 1):
                if j <= self.n_(i):
                    return i
        elif self.m < j <= self.n:
            for i in range(1, self.k + 1):
                if j <= self.m + self.e_(i):
                    return i
        raise FrameError(f"index {j} outside [1:{self.n}]")

    def to_json(self) -> dict:
        return {"m": list(self.ms), "d": list(self.ds)}


def canonical_constants(entries: Iterable) -> dict:
    """``(i, j, k, coef)`` entries to the canonical ``i < j`` dictionary."""
    out: dict[tuple, Fraction] = {}
    for i, j, k, c in entries:
        i, j, k, c = int(i), int(j), int(k), to_rat(c)
        if i == j:
            if c:
                raise FrameError(f"c^{k}_{{{i}{i}}} must vanish")
            continue
        key, val = ((i, j, k), c) if i < j else ((j, i, k), -c)
        out[key] = val
    return {kk: v for kk, v in out.items() if v}


@dataclass(frozen=True)
class MetricPairFrame:
    idx: BlockIndexing
    alpha2: tuple
    c: dict = field(compare=False)
    basis_changes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        a2 = tuple(to_rat(x) for x in self.alpha2)
        if len(a2) != self.idx.k:
            raise FrameError(f"expected {self.idx.k} eigenvalues, got {len(a2)}")
        if any(x <= 0 for x in a2):
            raise FrameError("eigenvalues alpha^2 must be positive")
        object.__setattr__(self, "alpha2", a2)
        n = self.idx.n
        for (i, j, k) in self.c:
            if not (1 <= i < j <= n and 1 <= k <= n):
                raise FrameError(f"structure constant index {(i, j, k)} out of range")

    def __eq__(self, other):
        if not isinstance(other, MetricPairFrame):
            return NotImplemented
        return (self.idx, self.alpha2, self.c) == (other.idx, other.alpha2, other.c)

    def __hash__(self):
        return hash((self.idx, self.alpha2, frozenset(self.c.items())))

    @property
    def n(self) -> int:
        return self.idx.n

    @property
    def m(self) -> int:
        return self.idx.m

    @property
    def k(self) -> int:
        return self.idx.k

    def coef(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            return Fraction(0)
        if i < j:
            return self.c.get((i, j, k), Fraction(0))
        return -self.c.get((j, i, k), Fraction(0))

    def constants_full(self) -> dict:
        """Both orders ``(i, j, k)`` and ``(j, i, k)`` of every nonzero constant."""
        full = self.__dict__.get("_full")
        if full is None:
            full = {}
            for (i, j, k), v in self.c.items():
                full[(i, j, k)] = v
                full[(j, i, k)] = -v
            object.__setattr__(self, "_full", full)
        return full

    def alpha2_of(self, j: int) -> Fraction:
        return self.alpha2[self.idx.block_of(j) - 1]

    @cached_property
    def h1(self) -> Derivation:
        return Derivation(self.n, h1_images(self))

    def is_product(self) -> bool:
        """No structure constant couples two different blocks."""
        b = self.idx.block_of
        return all(b(i) == b(j) == b(k) for (i, j, k) in self.c)

    def block_algebra(self, i: int) -> GradedLieAlgebra:
        """Degree -1/-2 bracket table of block ``i`` in the frame's own basis."""
        hor, ver = self.idx.I1(i), self.idx.I2(i)
        pos = {v: p + 1 for p, v in enumerate(hor + ver)}
        triples = [(pos[a], pos[b], pos[c], v) for (a, b, c), v in self.c.items()
                   if a in pos and b in pos and c in pos and a in hor and b in hor and c in ver]
        return make_algebra([len(hor), len(ver)], triples)

    def to_json(self) -> dict:
        return {
            "blocks": self.idx.to_json(),
            "alpha2": [rat_str(a) for a in self.alpha2],
            "constants": [{"i": i, "j": j, "k": k, "coef": rat_str(v)}
                          for (i, j, k), v in sorted(self.c.items())],
        }


# -- construction ---------------------------------------------------------

def default_alpha2(k: int) -> tuple:
    return tuple(Fraction(i * i) for i in range(1, k + 1))


@dataclass
class BasisChange:
    """New basis vectors of one block, as columns in the original coordinates."""
    horizontal: list
    vertical: list

    def to_json(self) -> dict:
        return {"horizontal": [[rat_str(x) for x in v] for v in self.horizontal],
                "vertical": [[rat_str(x) for x in v] for v in self.vertical]}


def _quasi_normal_block(a: GradedLieAlgebra, witness: Sequence) -> tuple[dict, BasisChange]:
    """Structure constants of one block in its quasi-normal basis (local indices)."""
    rep = validate(a)
    if not rep.ok or a.step > 2:
        raise FrameError(f"block algebra is not a valid step <= 2 algebra: {rep.problems}")
    m, d = a.m, a.d
    x = [to_rat(v) for v in witness]
    if len(x) != m:
        raise FrameError(f"witness has {len(x)} coordinates, expected {m}")
    if m and not any(x):
        raise FrameError("witness must be nonzero")
    ad = ad_matrix_at(a, x) if d else []
    if d and qlinalg.rank(ad) < d:
        raise FrameError("witness is not ad-generating (rank of ad X is below dim of degree -2)")
    # complementary generators: lowest original indices with independent ad-images
    chosen: list[int] = []
    images: list[list[Fraction]] = []
    for j in range(m):
        if len(chosen) == d:
            break
        col = [ad[r][j] for r in range(d)]
        if qlinalg.rank(images + [col]) > len(images):
            chosen.append(j)
            images.append(col)
    if len(chosen) < d:
        raise FrameError("rank deficiency while completing the quasi-normal frame")
    hor = [x]
    for j in chosen:
        e = [Fraction(0)] * m
        e[j] = Fraction(1)
        hor.append(e)
    for j in range(m):
        if len(hor) == m:
            break
        e = [Fraction(0)] * m
        e[j] = Fraction(1)
        if qlinalg.rank(hor + [e]) > len(hor):
            hor.append(e)
    ver = images  # Z_p = [X, X_{p+1}] in degree -2 coordinates
    full_h = [v + [Fraction(0)] * d for v in hor]
    # express brackets of new horizontal vectors in the new vertical basis
    vmat = qlinalg.transpose(ver) if d else []
    consts: dict[tuple, Fraction] = {}
    for p in range(m):
        for q in range(p + 1, m):
            br = a.bracket_vec(full_h[p], full_h[q])[m:]
            if not any(br):
                continue
            coords = qlinalg.solve(vmat, br)
            if coords is None:
                raise FrameError("bracket outside the span of the new vertical basis")
            for t, v in enumerate(coords):
                if v:
                    consts[(p + 1, q + 1, m + t + 1)] = v
    return consts, BasisChange(hor, ver)


def build_quasi_normal(blocks: Sequence[tuple], alpha2: Sequence | None = None) -> MetricPairFrame:
    """Product of block algebras with each witness moved to the front of its block."""
    if not blocks:
        raise FrameError("at least one block is required")
    ms, ds, locals_, changes = [], [], [], []
    for a, w in blocks:
        consts, change = _quasi_normal_block(a, w)
        ms.append(a.m)
        ds.append(a.d)
        locals_.append(consts)
        changes.append(change)
    idx = BlockIndexing(tuple(ms), tuple(ds))
    alpha2 = default_alpha2(idx.k) if alpha2 is None else alpha2
    c: dict[tuple, Fraction] = {}
    for b, consts in enumerate(locals_, start=1):
        mb = ms[b - 1]
        hor, ver = idx.I1(b), idx.I2(b)
        glob = lambda j: hor[j - 1] if j <= mb else ver[j - mb - 1]
        for (i, j, k), v in consts.items():
            c.update(canonical_constants([(glob(i), glob(j), glob(k), v)]))
    return MetricPairFrame(idx, tuple(alpha2), c, tuple(changes))


def frame_from_algebras(algebras: Sequence[GradedLieAlgebra], alpha2=None) -> MetricPairFrame:
    """Quasi-normal product frame using the search witness of each block."""
    blocks = []
    for a in algebras:
        ok, w = is_ad_surjective(a)
        if not ok:
            raise FrameError("block algebra is not ad-surjective")
        if a.m and not any(w):
            w = [Fraction(1)] + [Fraction(0)] * (a.m - 1)
        blocks.append((a, w))
    return build_quasi_normal(blocks, alpha2)


def product_frame(frames: Sequence[MetricPairFrame], alpha2: Sequence | None = None) -> MetricPairFrame:
    ms, ds, a2 = [], [], []
    for f in frames:
        ms += f.idx.ms
        ds += f.idx.ds
        a2 += f.alpha2
    idx = BlockIndexing(tuple(ms), tuple(ds))
    if alpha2 is not None:
        a2 = list(alpha2)
    c: dict[tuple, Fraction] = {}
    mb = db = 0
    changes: list = []
    for f in frames:
        def glob(j, f=f, mb=mb, db=db):
            return j + mb if j <= f.m else idx.m + db + (j - f.m)
        for (i, j, k), v in f.c.items():
            c.update(canonical_constants([(glob(i), glob(j), glob(k), v)]))
        mb += f.m
        db += f.n - f.m
        changes += list(f.basis_changes)
    return MetricPairFrame(idx, tuple(a2), c, tuple(changes))


def perturb_frame(f: MetricPairFrame, entries: Iterable) -> MetricPairFrame:
    """Override structure constants ``c^k_ij`` given as ``(i, j, k, coef)``."""
    entries = [(int(i), int(j), int(k), to_rat(v)) for i, j, k, v in entries]
    seen: dict[tuple, Fraction] = {}
    for i, j, k, v in entries:
        if i == j and v:
            raise FrameError(f"c^{k}_{{{i}{i}}} must vanish")
        key, val = ((i, j, k), v) if i < j else ((j, i, k), -v)
        if key in seen and seen[key] != val:
            raise FrameError(f"antisymmetry conflict on c^{k} for the pair ({i}, {j})")
        seen[key] = val
    c = dict(f.c)
    for key, val in seen.items():
        if val:
            c[key] = val
        else:
            c.pop(key, None)
    return MetricPairFrame(f.idx, f.alpha2, c, f.basis_changes)


# -- checks --------------------------------------------------------------------

def check_first_divi(f: MetricPairFrame) -> list[dict]:
    """Violations of the three linear constraints tying cross-block constants to alpha^2."""
    if len(set(f.alpha2)) != len(f.alpha2):
        raise FrameError("block eigenvalues alpha^2 must be pairwise distinct")
    idx, cf, a2 = f.idx, f.coef, f.alpha2_of
    m = idx.m
    blk = idx.block_of
    out = []
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if blk(i) == blk(j):
                continue
            v = cf(j, i, j)
            if v:
                out.append({"item": 1, "triple": [j, i, j], "value": rat_str(v)})
    for j in range(1, m + 1):
        for i in range(1, m + 1):
            if blk(i) == blk(j):
                continue
            for k in idx.I1(blk(i)):
                v = cf(j, k, i) + cf(j, i, k)
                if v and (i <= k):
                    out.append({"item": 2, "triple": [i, j, k], "value": rat_str(v)})
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            for k in range(1, m + 1):
                if len({i, j, k}) < 3 or not (i < k):
                    continue
                v = ((a2(j) - a2(i)) * cf(j, i, k) + (a2(j) - a2(k)) * cf(j, k, i)
                     + (a2(i) - a2(k)) * cf(i, k, j))
                if v:
                    out.append({"item": 3, "triple": [i, j, k], "value": rat_str(v)})
    return out


def quasi_normal_violations(f: MetricPairFrame) -> list[dict]:
    """Entries breaking ``c^l_{first_i, j} = delta`` on the complementary generators."""
    idx = f.idx
    out = []
    for b in range(1, idx.k + 1):
        x = idx.first(b)
        for p in range(1, idx.ds[b - 1] + 1):
            j = x + p
            target = idx.m + idx.e_(b - 1) + p
            for l in range(1, f.n + 1):
                want = Fraction(int(l == target))
                got = f.coef(x, j, l)
                if got != want:
                    out.append({"block": b, "triple": [x, j, l], "value": rat_str(got),
                                "expected": rat_str(want)})
    return out


def is_quasi_normal(f: MetricPairFrame) -> bool:
    return not quasi_normal_violations(f)


def tanaka_violations(f: MetricPairFrame) -> list[tuple]:
    """Nonzero ``c^k_jl`` with j, l in one block and k vertical in another block."""
    idx = f.idx
    out = []
    for (j, l, k), v in sorted(f.c.items()):
        if j > idx.m or l > idx.m or k <= idx.m:
            continue
        if idx.block_of(j) == idx.block_of(l) and idx.block_of(k) != idx.block_of(j):
            out.append((j, l, k))
    return out


def ck_violations(f: MetricPairFrame, block: int) -> list[tuple]:
    """Nonzero ``c^s_{first, l}`` with l in the block and s horizontal outside it."""
    idx = f.idx
    x = idx.first(block)
    inside = set(idx.I1(block))
    out = []
    for l in idx.I1(block):
        for s in range(1, idx.m + 1):
            if s not in inside and f.coef(x, l, s):
                out.append((x, l, s))
    return out


def target2_violations(f: MetricPairFrame, block: int, only_complement: bool = False) -> list[tuple]:
    """Nonzero ``c^s_lr`` with l, r in the block and s horizontal outside it.

    With ``only_complement`` the pair ranges over the complementary generators
    ``first+1 .. first+d`` only.
    """
    idx = f.idx
    inside = set(idx.I1(block))
    if only_complement:
        x = idx.first(block)
        rng = list(range(x + 1, x + idx.ds[block - 1] + 1))
    else:
        rng = idx.I1(block)
    out = []
    for p, l in enumerate(rng):
        for r in rng[p + 1:]:
            for s in range(1, idx.m + 1):
                if s not in inside and f.coef(l, r, s):
                    out.append((l, r, s))
    return out


def check_roundtrip(f: MetricPairFrame, algebras: Sequence[GradedLieAlgebra]) -> bool:
    """Brackets of the recorded basis vectors in each input algebra match the frame table."""
    if len(f.basis_changes) != len(algebras):
        return False
    for b, (a, ch) in enumerate(zip(algebras, f.basis_changes), start=1):
        m, d = a.m, a.d
        loc = f.block_algebra(b)
        hor = [v + [Fraction(0)] * d for v in ch.horizontal]
        for p in range(m):
            for q in range(m):
                br = a.bracket_vec(hor[p], hor[q])[m:]
                want = [Fraction(0)] * d
                for t in range(d):
                    coef = loc.c(p + 1, q + 1, m + t + 1)
                    for r in range(d):
                        want[r] += coef * ch.vertical[t][r]
                if br != want:
                    return False
    return True


# -- serialization ----------------------------------------------------------

def frame_from_json(data: dict) -> MetricPairFrame:
    """Accepts the block form (algebra + witness per block) or an explicit constant table."""
    blocks = data.get("blocks")
    if isinstance(blocks, list):
        parsed = []
        for pos, b in enumerate(blocks):
            if "algebra" not in b:
                raise FrameError(f"block {pos} has no 'algebra'")
            a = algebra_from_json(b["algebra"])
            w = b.get("witness")
            if w is None:
                ok, w = is_ad_surjective(a)
                if not ok:
                    raise FrameError(f"block {pos} is not ad-surjective")
            parsed.append((a, [to_rat(x) for x in w]))
        f = build_quasi_normal(parsed, data.get("alpha2"))
    elif isinstance(blocks, dict):
        idx = BlockIndexing(tuple(blocks["m"]), tuple(blocks["d"]))
        alpha2 = data.get("alpha2") or default_alpha2(idx.k)
        consts = canonical_constants((e["i"], e["j"], e["k"], e.get("coef", "1"))
                                     for e in data.get("constants", []))
        f = MetricPairFrame(idx, tuple(alpha2), consts)
    else:
        raise FrameError("frame JSON needs a 'blocks' list or an explicit block table")
    if data.get("perturb"):
        f = perturb_frame(f, [(e["i"], e["j"], e["k"], e.get("coef", "1")) for e in data["perturb"]])
    return f


def load_frame(path) -> MetricPairFrame:
    with open(path) as fh:
        return frame_from_json(json.load(fh))


def block_frame_json(algebras: Sequence[GradedLieAlgebra], witnesses: Sequence, alpha2: Sequence) -> dict:
    return {"blocks": [{"algebra": algebra_to_json(a), "witness": [rat_str(to_rat(x)) for x in w]}
                       for a, w in zip(algebras, witnesses)],
            "alpha2": [rat_str(to_rat(x)) for x in alpha2]}


# -- random frames ---------------------------------------------------------

def _horizontal_unknowns(idx: BlockIndexing) -> list[tuple]:
    m = idx.m
    return [(i, j, k) for i in range(1, m + 1) for j in range(i + 1, m + 1) for k in range(1, m + 1)]


def _pinned(idx: BlockIndexing) -> set:
    pins = set()
    for b in range(1, idx.k + 1):
        x = idx.first(b)
        for p in range(1, idx.ds[b - 1] + 1):
            for l in range(1, idx.m + 1):
                pins.add((x, x + p, l))
    return pins


_NULLSPACE_CACHE: dict = {}


def first_divi_solution_space(idx: BlockIndexing, alpha2: Sequence, zero: frozenset = frozenset()):
    """Unknown horizontal constants and a basis of the constraint solution space.

    Unknowns are ``c^k_ij`` with ``i < j <= m`` and ``k <= m``.  Constraints are
    the three first-divi families, the quasi-normal pins and the extra
    vanishing set ``zero`` (triples in any order of i, j).
    """
    key = (idx, tuple(alpha2), zero)
    hit = _NULLSPACE_CACHE.get(key)
    if hit is not None:
        return hit
    unknowns = _horizontal_unknowns(idx)
    col = {u: p for p, u in enumerate(unknowns)}
    nv = len(unknowns)
    a2 = lambda j: to_rat(alpha2[idx.block_of(j) - 1])
    blk = idx.block_of
    m = idx.m
    rows: list[list[Fraction]] = []
    seen_rows = set()

    def add_row(terms):
        row = [Fraction(0)] * nv
        for (i, j, k), v in terms:
            if i == j or not v:
                continue
            if i < j:
                row[col[(i, j, k)]] += v
            else:
                row[col[(j, i, k)]] -= v
        if any(row):
            t = tuple(row)
            if t not in seen_rows:
                seen_rows.add(t)
                rows.append(row)

    one = Fraction(1)
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if blk(i) != blk(j):
                add_row([((j, i, j), one)])
                for k in idx.I1(blk(i)):
                    add_row([((j, k, i), one), ((j, i, k), one)])
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            for k in range(i + 1, m + 1):
                if j in (i, k):
                    continue
                add_row([((j, i, k), a2(j) - a2(i)), ((j, k, i), a2(j) - a2(k)),
                         ((i, k, j), a2(i) - a2(k))])
    for t in _pinned(idx) | set(zero):
        i, j, k = t
        if k <= m and i != j:
            add_row([((i, j, k), one)])
    basis = qlinalg.nullspace(rows, nv) if rows else qlinalg.nullspace([], nv)
    _NULLSPACE_CACHE[key] = (unknowns, basis)
    return unknowns, basis


def random_block_algebra(rng: random.Random, m: int, d: int) -> tuple[GradedLieAlgebra, list]:
    """Random ad-surjective step-2 algebra with a witness, or an abelian block."""
    if d == 0:
        a = make_algebra([m, 0], [])
        return a, [Fraction(1)] + [Fraction(0)] * (m - 1)
    for _ in range(200):
        a = random_step2_algebra(rng, m, d, density=0.7)
        if a is None:
            continue
        ok, w = is_ad_surjective(a)
        if ok:
            return a, w
    raise FrameError(f"could not draw an ad-surjective algebra with m={m}, d={d}")


def random_first_divi_frame(rng: random.Random, k: int | None = None, max_m: int = 3,
                            max_d: int = 2, coef_range: int = 2, mixed: float = 0.05,
                            zero: Iterable = (), sizes: Sequence | None = None,
                            alpha2: Sequence | None = None) -> MetricPairFrame:
    """Random quasi-normal frame whose horizontal constants satisfy the first-divi constraints.

    Vertical constants come from random block algebras (so the Tanaka split
    holds).  With ``mixed`` some constants ``c^k_{i,t}`` with ``t > m`` are added;
    they are unconstrained by the checks above but enter the second layer;
    ``mixed`` is the probability of each such constant being nonzero.
    """
    if sizes is None:
        k = k or rng.choice((2, 3))
        sizes = []
        for _ in range(k):
            mi = rng.randint(1, max_m)
            di = rng.randint(0, min(max_d, mi - 1, mi * (mi - 1) // 2))
            sizes.append((mi, di))
    blocks = [random_block_algebra(rng, mi, di) for mi, di in sizes]
    if alpha2 is None:
        pool = [Fraction(p, q) for p in range(1, 13) for q in (1, 2, 3)]
        alpha2 = []
        while len(alpha2) < len(blocks):
            v = rng.choice(pool)
            if v not in alpha2:
                alpha2.append(v)
    base = build_quasi_normal(blocks, alpha2)
    zero = frozenset(tuple(int(x) for x in z) for z in zero)
    unknowns, basis = first_divi_solution_space(base.idx, base.alpha2, zero)
    vals = [Fraction(0)] * len(unknowns)
    for vec in basis:
        w = rng.randint(-coef_range, coef_range)
        if rng.random() < 0.5 or not w:
            continue
        vals = [a + w * b for a, b in zip(vals, vec)]
    entries = [(i, j, kk, v) for (i, j, kk), v in zip(unknowns, vals) if v]
    c = dict(base.c)
    c.update(canonical_constants(entries))
    if mixed:
        m, n = base.m, base.n
        for i in range(1, m + 1):
            for t in range(m + 1, n + 1):
                for kk in range(1, n + 1):
                    if rng.random() >= mixed or (i, t, kk) in zero or (t, i, kk) in zero:
                        continue
                    v = Fraction(rng.choice((-2, -1, 1, 2)))
                    c.update(canonical_constants([(i, t, kk, v)]))
    return MetricPairFrame(base.idx, base.alpha2, c, base.basis_changes)


def ck_zero_set(idx: BlockIndexing, block: int) -> set:
    """Triples forced to vanish by the first-lemma conclusion for ``block``."""
    x = idx.first(block)
    inside = set(idx.I1(block))
    return {(x, l, s) for l in idx.I1(block) if l != x
            for s in range(1, idx.m + 1) if s not in inside}


def _distinct_ranges(idx: BlockIndexing):
    rng = lambda i: range(idx.first(i), idx.first(i) + idx.ds[i - 1] + 1)
    for i0 in range(1, idx.k + 1):
        for r in range(1, idx.k + 1):
            for t in range(1, idx.k + 1):
                if len({i0, r, t}) == 3:
                    for j in rng(r):
                        for l in rng(t):
                            for s in rng(i0):
                                yield j, l, s


def three_distinct_violations(f: MetricPairFrame) -> list[tuple]:
    """Nonzero ``c^s_jl`` with j, l, s in the leading ranges of three distinct blocks."""
    return [(j, l, s) for j, l, s in _distinct_ranges(f.idx) if j < l and f.coef(j, l, s)]


def three_distinct_zero_set(idx: BlockIndexing) -> set:
    return {(j, l, s) for j, l, s in _distinct_ranges(idx) if j < l}


def target2_zero_set(idx: BlockIndexing, block: int, only_complement: bool = False) -> set:
    inside = set(idx.I1(block))
    if only_complement:
        x = idx.first(block)
        rng = list(range(x + 1, x + idx.ds[block - 1] + 1))
    else:
        rng = idx.I1(block)
    return {(l, r, s) for p, l in enumerate(rng) for r in rng[p + 1:]
            for s in range(1, idx.m + 1) if s not in inside}
