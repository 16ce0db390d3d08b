"""Graded nilpotent Lie algebras given by structure constants.

The basis is ordered by ascending degree: the first ``degree_dims[0]`` vectors
span the degree -1 part, the next ``degree_dims[1]`` the degree -2 part, and so
on.  Indices are 1-based everywhere in the public interface.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

from . import qlinalg
from .exactpoly import Poly, rat_str, to_rat
from .polymat import first_nonzero_minor


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class GradedLieAlgebra:
    degree_dims: tuple
    # canonical storage: (i, j, k) with i < j -> coefficient of e_k in [e_i, e_j]
    brackets: dict = field(default_factory=dict, hash=False, compare=False)
    # antisymmetry / diagonal conflicts seen while parsing
    parse_issues: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "degree_dims", tuple(int(x) for x in self.degree_dims))
        if any(x < 0 for x in self.degree_dims):
            raise AlgebraError("degree dimensions must be non-negative")

    def __eq__(self, other):
        if not isinstance(other, GradedLieAlgebra):
            return NotImplemented
        return self.degree_dims == other.degree_dims and self.brackets == other.brackets

    def __hash__(self):
        return hash((self.degree_dims, frozenset(self.brackets.items())))

    @property
    def dim(self) -> int:
        return sum(self.degree_dims)

    @property
    def m(self) -> int:
        return self.degree_dims[0] if self.degree_dims else 0

    @property
    def d(self) -> int:
        return self.degree_dims[1] if len(self.degree_dims) > 1 else 0

    @property
    def step(self) -> int:
        dims = list(self.degree_dims)
        while dims and dims[-1] == 0:
            dims.pop()
        return len(dims)

    def degree(self, i: int) -> int:
        """Depth of basis vector ``i``: 1 for degree -1, 2 for degree -2, ..."""
        acc = 0
        for s, dim in enumerate(self.degree_dims, start=1):
            acc += dim
            if i <= acc:
                return s
        raise AlgebraError(f"basis index {i} out of range")

    def c(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            return Fraction(0)
        if i < j:
            return self.brackets.get((i, j, k), Fraction(0))
        return -self.brackets.get((j, i, k), Fraction(0))

    def bracket_vec(self, x: Sequence, y: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        nzx = [(i + 1, v) for i, v in enumerate(x) if v]
        nzy = [(j + 1, v) for j, v in enumerate(y) if v]
        for i, xv in nzx:
            for j, yv in nzy:
                for k, c in self.table.get((i, j), ()):
                    out[k - 1] += c * xv * yv
        return out

    @property
    def table(self) -> dict:
        """``(i, j) -> [(k, c^k_ij), ...]`` for both orders of i != j."""
        t = self.__dict__.get("_table")
        if t is None:
            t = {}
            for (i, j, k), c in sorted(self.brackets.items()):
                t.setdefault((i, j), []).append((k, c))
                t.setdefault((j, i), []).append((k, -c))
            object.__setattr__(self, "_table", t)
        return t

    def basis_vec(self, i: int) -> list[Fraction]:
        v = [Fraction(0)] * self.dim
        v[i - 1] = Fraction(1)
        return v


def make_algebra(degree_dims: Sequence[int], triples: Iterable) -> GradedLieAlgebra:
    """Build an algebra from ``(i, j, k, coef)`` triples (either order of i, j)."""
    dims = tuple(int(x) for x in degree_dims)
    n = sum(dims)
    store: dict[tuple, Fraction] = {}
    issues = []
    seen: dict[tuple, Fraction] = {}
    for t in triples:
        i, j, k, c = int(t[0]), int(t[1]), int(t[2]), to_rat(t[3])
        for v in (i, j, k):
            if not 1 <= v <= n:
                raise AlgebraError(f"index {v} outside [1:{n}] in triple {(i, j, k)}")
        if i == j:
            if c:
                issues.append(f"[e{i}, e{i}] has nonzero component on e{k}")
            continue
        key = (min(i, j), max(i, j), k)
        val = c if i < j else -c
        if key in seen and seen[key] != val:
            issues.append(f"c^{k}_{{{i}{j}}} conflicts with its antisymmetric partner")
            continue
        seen[key] = val
        if val:
            store[key] = val
    return GradedLieAlgebra(dims, store, tuple(issues))


# -- serialization ------------------------------------------------------------

def algebra_to_json(a: GradedLieAlgebra) -> dict:
    return {
        "degree_dims": list(a.degree_dims),
        "brackets": [{"i": i, "j": j, "k": k, "coef": rat_str(c)}
                     for (i, j, k), c in sorted(a.brackets.items())],
    }


def algebra_from_json(data: dict) -> GradedLieAlgebra:
    if "degree_dims" not in data:
        raise AlgebraError("missing 'degree_dims'")
    triples = []
    for pos, b in enumerate(data.get("brackets", [])):
        try:
            triples.append((b["i"], b["j"], b["k"], b.get("coef", "1")))
        except KeyError as exc:
            raise AlgebraError(f"bracket entry {pos} is missing field {exc}") from None
    return make_algebra(data["degree_dims"], triples)


def load_algebra(path) -> GradedLieAlgebra:
    with open(path) as fh:
        return algebra_from_json(json.load(fh))


# -- validation ----------------------------------------------------------------

@dataclass
class ValidationReport:
    antisymmetry: bool
    grading: bool
    jacobi: bool
    fundamental: bool
    step: int
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.antisymmetry and self.grading and self.jacobi and self.fundamental

    def to_json(self) -> dict:
        return {"antisymmetry": self.antisymmetry, "grading": self.grading,
                "jacobi": self.jacobi, "fundamental": self.fundamental,
                "step": self.step, "ok": self.ok, "problems": list(self.problems)}


def _span_dim(vectors: list) -> int:
    return qlinalg.rank(vectors) if vectors else 0


def is_fundamental(a: GradedLieAlgebra) -> bool:
    if a.dim == 0:
        return True
    gens = [a.basis_vec(i) for i in range(1, a.m + 1)]
    if not gens:
        return False
    layers = [gens]
    span = list(gens)
    while True:
        new = []
        for x in gens:
            for y in layers[-1]:
                v = a.bracket_vec(x, y)
                if any(v):
                    new.append(v)
        if not new:
            break
        r0 = _span_dim(span)
        span = span + new
        if _span_dim(span) == r0:
            break
        layers.append(new)
    return _span_dim(span) == a.dim


def validate(a: GradedLieAlgebra) -> ValidationReport:
    problems = list(a.parse_issues)
    anti = not a.parse_issues
    grading = True
    mu = len(a.degree_dims)
    for (i, j, k), c in sorted(a.brackets.items()):
        target = a.degree(i) + a.degree(j)
        if target > mu or a.degree(k) != target:
            grading = False
            problems.append(f"[e{i}, e{j}] has a component on e{k} of the wrong degree")
    jac = True
    n = a.dim
    tab = a.table

    def bb(p, q):
        return tab.get((p, q), ())

    for i, j, l in combinations(range(1, n + 1), 3):
        acc: dict[int, Fraction] = {}
        for p, q, r in ((i, j, l), (j, l, i), (l, i, j)):
            for s_, c1 in bb(p, q):
                for t, c2 in bb(s_, r):
                    acc[t] = acc.get(t, 0) + c1 * c2
        if any(acc.values()):
            jac = False
            problems.append(f"Jacobi identity fails on (e{i}, e{j}, e{l})")
    fund = is_fundamental(a)
    if not fund:
        problems.append("degree -1 part does not generate the algebra")
    return ValidationReport(anti, grading, jac, fund, a.step, problems)


# -- constructors --------------------------------------------------------------

def heisenberg(dim: int) -> GradedLieAlgebra:
    if dim < 3 or dim % 2 == 0:
        raise AlgebraError("Heisenberg dimension must be odd and at least 3")
    l = (dim - 1) // 2
    z = 2 * l + 1
    return make_algebra([2 * l, 1], [(2 * i - 1, 2 * i, z, 1) for i in range(1, l + 1)])


def free_step2(g: int) -> GradedLieAlgebra:
    if g < 2:
        raise AlgebraError("free step-2 algebra needs at least 2 generators")
    pairs = list(combinations(range(1, g + 1), 2))
    return make_algebra([g, len(pairs)],
                        [(i, j, g + 1 + p, 1) for p, (i, j) in enumerate(pairs)])


def abelian(m: int) -> GradedLieAlgebra:
    return make_algebra([m], [])


def counterexample(beta, delta, lam) -> GradedLieAlgebra:
    """Nine-dimensional step-2 algebra with d = 4 that is not ad-surjective.

    Basis X1..X5 (indices 1..5) and Y1..Y4 (indices 6..9).
    """
    beta, delta, lam = to_rat(beta), to_rat(delta), to_rat(lam)
    if not (beta and delta and lam):
        raise AlgebraError("beta, delta and lambda must all be nonzero")
    y = lambda r: 5 + r
    return make_algebra([5, 4], [
        (1, 2, y(1), 1), (1, 3, y(2), 1), (1, 4, y(3), 1),
        (2, 3, y(4), 1),
        (2, 5, y(3), beta), (3, 5, y(3), delta), (4, 5, y(3), lam),
    ])


def direct_sum(a: GradedLieAlgebra, b: GradedLieAlgebra) -> GradedLieAlgebra:
    """Degreewise direct sum; within each degree the a-part precedes the b-part."""
    mu = max(len(a.degree_dims), len(b.degree_dims))
    da = list(a.degree_dims) + [0] * (mu - len(a.degree_dims))
    db = list(b.degree_dims) + [0] * (mu - len(b.degree_dims))
    dims = [x + y for x, y in zip(da, db)]
    starts = [sum(dims[:s]) for s in range(mu)]

    def remap(alg_dims, other_before):
        table = {}
        idx = 1
        for s, dim in enumerate(alg_dims):
            for t in range(dim):
                table[idx] = starts[s] + other_before[s] + t + 1
                idx += 1
        return table

    ma = remap(da, [0] * mu)
    mb = remap(db, da)
    triples = [(ma[i], ma[j], ma[k], c) for (i, j, k), c in a.brackets.items()]
    triples += [(mb[i], mb[j], mb[k], c) for (i, j, k), c in b.brackets.items()]
    return make_algebra(dims, triples)


# -- ad-matrix and generic rank ---------------------------------------------

def _require_step2(a: GradedLieAlgebra) -> None:
    if a.step > 2:
        raise AlgebraError(f"step {a.step} algebra; only step <= 2 is supported here")


def ad_matrix_parametric(a: GradedLieAlgebra) -> list[list[Poly]]:
    """d x m matrix of ad(sum C_i X_i) restricted to degree -1, entries in C_1..C_m."""
    _require_step2(a)
    m, d = a.m, a.d
    mat = [[Poly.zero(m) for _ in range(m)] for _ in range(d)]
    for j in range(1, m + 1):
        for k in range(1, d + 1):
            terms = {}
            for i in range(1, m + 1):
                c = a.c(i, j, m + k)
                if c:
                    terms[((i, 1),)] = c
            mat[k - 1][j - 1] = Poly(m, terms)
    return mat


def ad_matrix_at(a: GradedLieAlgebra, x: Sequence) -> list[list[Fraction]]:
    """Numeric d x m matrix of ad X for X given in degree -1 coordinates."""
    m, d = a.m, a.d
    if len(x) != m:
        raise AlgebraError(f"X has {len(x)} coordinates, expected {m}")
    x = [to_rat(v) if not isinstance(v, float) else v for v in x]
    mat = [[Fraction(0)] * m for _ in range(d)]
    for (i, j, k), c in a.brackets.items():
        if k <= m or i > m or j > m:
            continue
        # [sum x_p X_p, X_j] gets x_i c^k_{ij}; and [.., X_i] gets x_j c^k_{ji}
        mat[k - m - 1][j - 1] += x[i - 1] * c
        mat[k - m - 1][i - 1] -= x[j - 1] * c
    return mat


def rank_at(a: GradedLieAlgebra, x: Sequence) -> int:
    mat = ad_matrix_at(a, x)
    return qlinalg.rank(mat) if mat else 0


def _deterministic_points(m: int, count: int, seed: int = 0):
    rng = random.Random(seed * 7919 + m)
    for _ in range(count):
        yield [Fraction(rng.randint(-97, 97)) for _ in range(m)]


def generic_rank_random(a: GradedLieAlgebra, trials: int = 50, rng: random.Random | None = None) -> int:
    """Maximum exact rank over random rational evaluations (a lower bound in general)."""
    _require_step2(a)
    if a.d == 0 or a.m == 0:
        return 0
    rng = rng or random.Random(12345)
    best = 0
    for _ in range(trials):
        x = [Fraction(rng.randint(-1000, 1000), rng.randint(1, 50)) for _ in range(a.m)]
        best = max(best, rank_at(a, x))
        if best == min(a.d, a.m):
            break
    return best


def generic_rank(a: GradedLieAlgebra) -> int:
    """Largest s such that some s x s minor of the parametric ad-matrix is nonzero.

    Exact: a few rational evaluations give a certified lower bound (a nonzero
    numeric minor implies a nonzero polynomial minor); the symbolic minor search
    then runs from the largest size down to one above that bound.
    """
    _require_step2(a)
    m, d = a.m, a.d
    if m == 0 or d == 0:
        return 0
    top = min(m, d)
    low = 0
    for x in _deterministic_points(m, 8):
        low = max(low, rank_at(a, x))
        if low == top:
            return top
    mat = ad_matrix_parametric(a)
    for s in range(top, low, -1):
        if first_nonzero_minor(mat, s) is not None:
            return s
    return low


def generic_rank_symbolic(a: GradedLieAlgebra) -> int:
    """Pure minor enumeration, largest first, with no numeric shortcut."""
    _require_step2(a)
    if a.m == 0 or a.d == 0:
        return 0
    mat = ad_matrix_parametric(a)
    for s in range(min(a.m, a.d), 0, -1):
        if first_nonzero_minor(mat, s) is not None:
            return s
    return 0


def _grid(m: int, max_bound: int):
    """Integer points ordered by bound, support size, positions, then values."""
    for bound in range(1, max_bound + 1):
        vals = []
        for v in range(1, bound + 1):
            vals += [v, -v]
        for size in range(1, m + 1):
            for pos in combinations(range(m), size):
                for coefs in product(vals, repeat=size):
                    if max(abs(c) for c in coefs) != bound:
                        continue
                    x = [Fraction(0)] * m
                    for p, c in zip(pos, coefs):
                        x[p] = Fraction(c)
                    yield x


def find_witness(a: GradedLieAlgebra, max_bound: int = 4) -> list[Fraction] | None:
    d = a.d
    for x in _grid(a.m, max_bound):
        if rank_at(a, x) == d:
            return x
    return None


def is_ad_surjective(a: GradedLieAlgebra) -> tuple[bool, list[Fraction] | None]:
    _require_step2(a)
    if a.d == 0:
        return True, [Fraction(0)] * a.m
    if generic_rank(a) < a.d:
        return False, None
    w = find_witness(a)
    if w is None:
        # a nonzero polynomial cannot vanish on the whole grid of bound > its degree
        w = find_witness(a, max_bound=a.d + 1)
    if w is None:
        raise AssertionError("generic rank is full but no witness was found")
    return True, w


def sample_every_x_ad_generating(a: GradedLieAlgebra, samples: int = 200,
                                 rng: random.Random | None = None) -> float:
    """HEURISTIC: fraction of random nonzero X whose ad X is onto degree -2.

    A value of 1.0 does not prove that every nonzero X is ad-generating.
    """
    rng = rng or random.Random(0)
    hits = 0
    for _ in range(samples):
        x = [Fraction(rng.randint(-5, 5)) for _ in range(a.m)]
        if not any(x):
            x[0] = Fraction(1)
        hits += rank_at(a, x) == a.d
    return hits / samples


# -- subspaces ---------------------------------------------------------------

@dataclass
class SubspaceBasis:
    vectors: list

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def to_json(self) -> list:
        return [[rat_str(x) for x in v] for v in self.vectors]


@dataclass
class CenterInfo:
    basis: SubspaceBasis
    dim_m1_intersection: int


def center(a: GradedLieAlgebra) -> CenterInfo:
    n = a.dim
    rows = []
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            row = [a.c(i, j, k) for i in range(1, n + 1)]
            if any(row):
                rows.append(row)
    basis = qlinalg.nullspace(rows, n)
    m = a.m
    rows_m1 = [r[:m] for r in rows]
    inter = qlinalg.nullspace(rows_m1, m) if m else []
    return CenterInfo(SubspaceBasis(basis), len(inter))


def kernel_and_image_of_ad(a: GradedLieAlgebra, x: Sequence) -> tuple[SubspaceBasis, SubspaceBasis]:
    mat = ad_matrix_at(a, x)
    if a.d == 0:
        ker = [a.basis_vec(i)[:a.m] for i in range(1, a.m + 1)]
        return SubspaceBasis(ker), SubspaceBasis([])
    return SubspaceBasis(qlinalg.nullspace(mat, a.m)), SubspaceBasis(qlinalg.column_space(mat))


def check_codim3_hypotheses(a: GradedLieAlgebra) -> bool:
    if a.step > 2:
        return False
    return a.d <= 3 and a.d < a.m and center(a).dim_m1_intersection == 0


# -- decompositions --------------------------------------------------------

def subalgebra(a: GradedLieAlgebra, block: Sequence[int]) -> GradedLieAlgebra | None:
    """The coordinate subalgebra on ``block`` (1-based indices), or None if not closed."""
    block = sorted(block)
    pos = {v: p + 1 for p, v in enumerate(block)}
    inside = set(block)
    triples = []
    for (i, j, k), c in a.brackets.items():
        if i in inside and j in inside:
            if k not in inside:
                return None
            triples.append((pos[i], pos[j], pos[k], c))
    dims = [0] * len(a.degree_dims)
    for v in block:
        dims[a.degree(v) - 1] += 1
    return make_algebra(dims, triples)


def verify_decomposition(a: GradedLieAlgebra, blocks: Sequence[Sequence[int]]) -> bool:
    n = a.dim
    flat = sorted(v for b in blocks for v in b)
    if flat != list(range(1, n + 1)):
        raise AlgebraError("blocks do not partition the basis")
    owner = {v: t for t, b in enumerate(blocks) for v in b}
    for (i, j, k), c in a.brackets.items():
        if owner[i] != owner[j]:
            return False
    for b in blocks:
        if not b:
            return False
        sub = subalgebra(a, b)
        if sub is None or not is_fundamental(sub):
            return False
    return True


def find_coordinate_decomposition(a: GradedLieAlgebra) -> list[list[int]] | None:
    """Brute force over two-block coordinate partitions of the given basis."""
    n = a.dim
    if n > 16:
        raise AlgebraError("coordinate decomposition search is limited to dim <= 16")
    for mask in range(1, 2 ** (n - 1)):
        left = [1] + [v for v in range(2, n + 1) if not (mask >> (v - 2)) & 1]
        right = [v for v in range(2, n + 1) if (mask >> (v - 2)) & 1]
        if verify_decomposition(a, [left, right]):
            return [left, right]
    return None


# -- random generation ------------------------------------------------------

def random_step2_algebra(rng: random.Random, m: int, d: int, density: float = 0.5,
                         max_tries: int = 200) -> GradedLieAlgebra | None:
    """Random fundamental step-2 algebra with coefficients in {-2..2}.

    Step-2 algebras with central degree -2 satisfy Jacobi automatically; only
    fundamentality (brackets spanning degree -2) needs a rejection test.
    """
    pairs = list(combinations(range(1, m + 1), 2))
    if d > len(pairs):
        return None
    for _ in range(max_tries):
        triples = []
        for i, j in pairs:
            if rng.random() > density:
                continue
            for k in range(1, d + 1):
                c = rng.choice((-2, -1, 0, 0, 1, 2))
                if c:
                    triples.append((i, j, m + k, c))
        a = make_algebra([m, d], triples)
        if is_fundamental(a):
            return a
    return None


def random_codim3_instance(rng: random.Random, m_max: int = 7, max_tries: int = 500) -> GradedLieAlgebra | None:
    """Random step-2 algebra satisfying d <= 3, d < m and trivial center in degree -1."""
    for _ in range(max_tries):
        m = rng.randint(2, m_max)
        d = rng.randint(1, min(3, m - 1))
        a = random_step2_algebra(rng, m, d, density=rng.choice((0.3, 0.5, 0.8)))
        if a is None:
            continue
        if validate(a).ok and check_codim3_hypotheses(a):
            return a
    return None
