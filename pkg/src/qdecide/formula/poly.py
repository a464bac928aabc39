"""Sparse multivariate polynomials with rational coefficients."""

from __future__ import annotations

from fractions import Fraction

from ..core.scalars import parse_rational

# A monomial is a tuple of (variable, exponent) pairs sorted by variable name.
ONE_MONO: tuple = ()


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


class Poly:
    """Immutable polynomial ``sum c_m * m`` over named real variables."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c != 0:
                    clean[m] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): Fraction(1)})

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({ONE_MONO: parse_rational(c)})

    @staticmethod
    def lift(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        return Poly.const(x)

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        try:
            o = Poly.lift(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for m, c in o.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        try:
            o = Poly.lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return Poly.lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                c = parse_rational(other)
            except TypeError:
                return NotImplemented
            if c == 0:
                return Poly()
            return Poly({m: v * c for m, v in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = parse_rational(other)
        return Poly({m: v / c for m, v in self.terms.items()})

    def __pow__(self, n: int):
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    # -- inspection -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        try:
            return self.terms == Poly.const(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def evaluate(self, values) -> Fraction:
        acc = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                t *= values[v] ** e
            acc += t
        return acc

    def substitute(self, values) -> "Poly":
        """Partially evaluate: variables found in ``values`` become constants."""
        out = {}
        for m, c in self.terms.items():
            keep = []
            for v, e in m:
                if v in values:
                    c = c * parse_rational(values[v]) ** e
                else:
                    keep.append((v, e))
            k = tuple(keep)
            out[k] = out.get(k, 0) + c
        return Poly(out)

    def sorted_terms(self):
        """Terms in a canonical order (degree, then monomial)."""
        return sorted(self.terms.items(), key=lambda mc: (sum(e for _, e in mc[0]), mc[0]))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)
