"""Exact sparse multivariate polynomials over the rationals.

Variables are ``u_1 .. u_n`` (1-based).  A monomial is a tuple of
``(variable, exponent)`` pairs sorted by variable with no zero exponents, so
it is hashable and canonical.  Coefficients are :class:`fractions.Fraction`.

Terms are ordered by graded lexicographic order with ``u_1 < u_2 < ... < u_n``:
total degree first, then the exponent of ``u_n``, then ``u_{n-1}`` and so on.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping, Sequence

Mono = tuple  # tuple[tuple[int, int], ...]

ONE_MONO: Mono = ()


class PolyError(ValueError):
    pass


def to_rat(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def rat_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def mono(exps: Mapping[int, int] | Iterable[tuple[int, int]] = ()) -> Mono:
    items = exps.items() if isinstance(exps, Mapping) else exps
    acc: dict[int, int] = {}
    for v, e in items:
        if e < 0:
            raise PolyError(f"negative exponent {e} on u{v}")
        if e:
            acc[int(v)] = acc.get(int(v), 0) + int(e)
    return tuple(sorted((v, e) for v, e in acc.items() if e))


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_div(a: Mono, b: Mono) -> Mono | None:
    """Return ``a / b`` if ``b`` divides ``a``, else None."""
    da = dict(a)
    for v, e in b:
        have = da.get(v, 0)
        if have < e:
            return None
        da[v] = have - e
    return tuple(sorted((v, e) for v, e in da.items() if e))


def mono_degree(a: Mono) -> int:
    return sum(e for _, e in a)


def mono_str(a: Mono) -> str:
    if not a:
        return "1"
    return "*".join(f"u{v}" if e == 1 else f"u{v}^{e}" for v, e in a)


def _order_key(a: Mono, n: int):
    dense = dict(a)
    return (mono_degree(a), tuple(dense.get(v, 0) for v in range(n, 0, -1)))


class Poly:
    """Immutable polynomial in ``n`` variables with Fraction coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Mono, object] | None = None):
        if n < 0:
            raise PolyError("variable count must be non-negative")
        clean: dict[Mono, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = to_rat(c)
                if c:
                    for v, _ in m:
                        if not 1 <= v <= n:
                            raise PolyError(f"variable u{v} outside [1:{n}]")
                    clean[m] = clean.get(m, Fraction(0)) + c
            clean = {m: c for m, c in clean.items() if c}
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "Poly":
        # terms already canonical (no zeros, valid variables)
        p = object.__new__(cls)
        object.__setattr__(p, "n", n)
        object.__setattr__(p, "terms", terms)
        return p

    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls._raw(n, {})

    @classmethod
    def const(cls, n: int, c) -> "Poly":
        c = to_rat(c)
        return cls._raw(n, {ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, n: int, i: int, coef=1) -> "Poly":
        if not 1 <= i <= n:
            raise PolyError(f"variable u{i} outside [1:{n}]")
        return cls(n, {((i, 1),): coef})

    @classmethod
    def monomial(cls, n: int, m: Mono | Mapping[int, int], coef=1) -> "Poly":
        if isinstance(m, Mapping):
            m = mono(m)
        return cls(n, {m: coef})

    # -- queries ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coeff(self, m: Mono | Mapping[int, int]) -> Fraction:
        if isinstance(m, Mapping):
            m = mono(m)
        return self.terms.get(m, Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=-1)

    def variables(self) -> set[int]:
        return {v for m in self.terms for v, _ in m}

    def sorted_terms(self) -> list[tuple[Mono, Fraction]]:
        """Terms in canonical order, leading (largest) term first."""
        n = self.n
        return sorted(self.terms.items(), key=lambda t: _order_key(t[0], n), reverse=True)

    def leading_term(self) -> tuple[Mono, Fraction]:
        if not self.terms:
            raise PolyError("zero polynomial has no leading term")
        n = self.n
        m = max(self.terms, key=lambda t: _order_key(t, n))
        return m, self.terms[m]

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "Poly") -> None:
        if self.n != other.n:
            raise PolyError(f"variable-count mismatch: {self.n} vs {other.n}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.n, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def scale(self, c) -> "Poly":
        c = to_rat(c)
        if not c:
            return Poly.zero(self.n)
        return Poly._raw(self.n, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return Poly.zero(self.n)
        out: dict[Mono, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return Poly._raw(self.n, {m: c for m, c in out.items() if c})

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise PolyError("negative power")
        out = Poly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def exact_div(self, other: "Poly") -> "Poly":
        """Quotient ``self / other``; raises PolyError unless the division is exact."""
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        lm, lc = other.leading_term()
        rem = self
        quo: dict[Mono, Fraction] = {}
        while rem.terms:
            rm, rc = rem.leading_term()
            qm = mono_div(rm, lm)
            if qm is None:
                raise PolyError("division is not exact")
            qc = rc / lc
            quo[qm] = quo.get(qm, 0) + qc
            rem = rem - Poly._raw(self.n, {qm: qc}) * other
        return Poly(self.n, quo)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.n == other.n and self.terms == other.terms
        try:
            c = to_rat(other)
        except TypeError:
            return NotImplemented
        return self.terms == ({ONE_MONO: c} if c else {})

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    # -- evaluation and restriction ---------------------------------------
    def eval(self, point: Sequence):
        """Evaluate at ``point`` (length n).  Exact for rational input, float otherwise."""
        if len(point) != self.n:
            raise PolyError(f"point has length {len(point)}, expected {self.n}")
        use_float = any(isinstance(x, float) for x in point)
        vals = [float(x) if use_float else to_rat(x) for x in point]
        total = 0.0 if use_float else Fraction(0)
        for m, c in self.terms.items():
            t = float(c) if use_float else c
            for v, e in m:
                t *= vals[v - 1] ** e
            total += t
        return total

    def restrict(self, keep: Iterable[int]) -> "Poly":
        """Set every variable outside ``keep`` to zero."""
        keep = set(keep)
        return Poly._raw(self.n, {m: c for m, c in self.terms.items()
                                  if all(v in keep for v, _ in m)})

    def diff(self, i: int) -> "Poly":
        out: dict[Mono, Fraction] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(i, 0)
            if not e:
                continue
            d[i] = e - 1
            nm = tuple(sorted((v, x) for v, x in d.items() if x))
            out[nm] = out.get(nm, 0) + c * e
        return Poly._raw(self.n, {m: c for m, c in out.items() if c})

    # -- rendering -----------------------------------------------------------
    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not m:
                body = str(a)
            elif a == 1:
                body = mono_str(m)
            else:
                body = f"{a}*{mono_str(m)}"
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self) -> str:
        return f"Poly({self.n}, {self})"

    def to_json(self) -> list[dict]:
        return [{"exps": {str(v): e for v, e in m}, "coef": rat_str(c)}
                for m, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, n: int, data: list[dict]) -> "Poly":
        terms: dict[Mono, Fraction] = {}
        for t in data:
            m = mono({int(v): int(e) for v, e in t["exps"].items()})
            terms[m] = terms.get(m, Fraction(0)) + to_rat(t["coef"])
        return cls(n, terms)


# -- free functions mirroring the operation names ------------------------------

def add(p: Poly, q: Poly) -> Poly:
    return p + q


def mul(p: Poly, q: Poly) -> Poly:
    return p * q


def coeff(p: Poly, m) -> Fraction:
    return p.coeff(m)


def evaluate(p: Poly, point: Sequence):
    return p.eval(point)


class Derivation:
    """Derivation of the polynomial ring fixed by the images of the variables.

    Constants map to zero; products follow the Leibniz rule.
    """

    def __init__(self, n: int, images: Mapping[int, Poly]):
        self.n = n
        self.images = {v: p for v, p in images.items() if p}
        self._cache: dict[Mono, Poly] = {}

    def image_of_mono(self, m: Mono) -> Poly:
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        out: dict[Mono, Fraction] = {}
        for idx, (v, e) in enumerate(m):
            img = self.images.get(v)
            if img is None:
                continue
            rest = m[:idx] + ((v, e - 1),) + m[idx + 1:] if e > 1 else m[:idx] + m[idx + 1:]
            for im, ic in img.terms.items():
                nm = mono_mul(rest, im)
                out[nm] = out.get(nm, 0) + ic * e
        res = Poly._raw(self.n, {k: c for k, c in out.items() if c})
        self._cache[m] = res
        return res

    def __call__(self, p: Poly) -> Poly:
        if p.n != self.n:
            raise PolyError(f"variable-count mismatch: {p.n} vs {self.n}")
        out: dict[Mono, Fraction] = {}
        for m, c in p.terms.items():
            for nm, nc in self.image_of_mono(m).terms.items():
                out[nm] = out.get(nm, 0) + c * nc
        return Poly._raw(self.n, {k: v for k, v in out.items() if v})


def h1_images(frame) -> dict[int, Poly]:
    """Images ``u_j -> sum_k q_jk u_k`` with ``q_jk = sum_{i<=m} c^k_{ij} u_i``."""
    n, m = frame.n, frame.m
    images: dict[int, dict[Mono, Fraction]] = {}
    for (i, j, k), c in frame.constants_full().items():
        if i > m:
            continue
        key = mono_mul(((i, 1),), ((k, 1),))
        acc = images.setdefault(j, {})
        acc[key] = acc.get(key, 0) + c
    return {j: Poly(n, t) for j, t in images.items()}


def h1_derivation(frame, p: Poly) -> Poly:
    """Apply the Hamiltonian derivation of the frame's first metric to ``p``."""
    d = getattr(frame, "h1", None)
    if d is None:
        d = Derivation(frame.n, h1_images(frame))
    return d(p)
