"""Scalar layer: exact rationals, single-radical surds and certified intervals.

Exact values are :class:`fractions.Fraction`.  Numbers of the form ``q*sqrt(k)``
(``q`` rational, ``k`` a squarefree positive integer) are :class:`Surd`; they are
closed under products and quotients, and under sums of like radicals.  Anything
else is carried as an mpmath interval with outward rounding.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import from_rational, mpf_lt, round_ceiling, round_floor, to_rational
from sympy import factorint

DEFAULT_PRECISION = 256


class NotClosed(ArithmeticError):
    """Raised when a surd operation leaves the single-radical form."""


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ints, Fractions or decimal strings exactly.

    Floats are accepted through their shortest decimal repr, so ``0.1`` maps
    to ``1/10`` rather than to the binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot read {value!r} as an exact rational")


@lru_cache(maxsize=4096)
def _squarefree_split(n: int) -> tuple[int, int]:
    """Return (s, k) with n == s*s*k and k squarefree."""
    if n == 0:
        return 0, 1
    s, k = 1, 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        if e % 2:
            k *= p
    return s, k


def _mk(coef, rad: int):
    """Surd from an already squarefree ``rad``, demoted to a Fraction when rad is 1."""
    coef = parse_rational(coef)
    if rad == 1 or coef == 0:
        return coef
    s = Surd.__new__(Surd)
    s.coef, s.rad = coef, rad
    return s


class Surd:
    """Exact real number ``coef * sqrt(rad)`` with squarefree integer ``rad``.

    Arithmetic results that turn out rational come back as Fractions.
    """

    __slots__ = ("coef", "rad")

    def __init__(self, coef=0, rad=1):
        coef = parse_rational(coef)
        if rad == 1 and type(rad) is int:
            self.coef, self.rad = coef, 1
            return
        rad = parse_rational(rad)
        if rad < 0:
            raise ValueError("negative radicand")
        # sqrt(a/b) = sqrt(a*b)/b
        n = rad.numerator * rad.denominator
        s, k = _squarefree_split(n)
        coef = coef * s / rad.denominator
        if coef == 0 or k == 0:
            coef, k = Fraction(0), 1
        self.coef = coef
        self.rad = k

    @classmethod
    def sqrt(cls, value) -> "Surd":
        return cls(1, value)

    @property
    def is_rational(self) -> bool:
        return self.rad == 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational:
            raise NotClosed(f"{self} is irrational")
        return self.coef

    def square(self) -> Fraction:
        return self.coef * self.coef * self.rad

    def sign(self) -> int:
        return (self.coef > 0) - (self.coef < 0)

    @staticmethod
    def _coerce(other):
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            s = Surd.__new__(Surd)
            s.coef, s.rad = Fraction(other), 1
            return s
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.coef == 0:
            return _mk(self.coef, self.rad)
        if self.coef == 0:
            return _mk(o.coef, o.rad)
        if o.rad != self.rad:
            raise NotClosed(f"{self} + {o} leaves Q(sqrt(k))")
        return _mk(self.coef + o.coef, self.rad)

    __radd__ = __add__

    def __neg__(self):
        return _mk(-self.coef, self.rad)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + Surd(-self.coef, self.rad)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return _mk(self.coef * o.coef * _rad_product_root(self.rad, o.rad),
                   _rad_product_rest(self.rad, o.rad))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.coef == 0:
            raise ZeroDivisionError("surd division by zero")
        # 1/(c sqrt k) = sqrt(k) / (c k)
        return Surd(self.coef, self.rad) * Surd(1 / (o.coef * o.rad), o.rad)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Fraction(1)
        for _ in range(n):
            out = out * self
        return out

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare Surd with {other!r}")
        sa, sb = self.sign(), o.sign()
        if sa != sb:
            return (sa > sb) - (sa < sb)
        qa, qb = self.square(), o.square()
        if qa == qb:
            return 0
        bigger = 1 if qa > qb else -1
        return bigger * sa

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coef == o.coef and self.rad == o.rad

    def __hash__(self):
        if self.rad == 1:
            return hash(self.coef)
        return hash((self.coef, self.rad))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.coef) * self.rad ** 0.5

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        if self.rad == 1:
            return str(self.coef)
        if self.coef == 1:
            return f"sqrt({self.rad})"
        return f"{self.coef}*sqrt({self.rad})"


@lru_cache(maxsize=None)
def _rad_split_pair(a: int, b: int) -> tuple[int, int]:
    return _squarefree_split(a * b)


def _rad_product_root(a: int, b: int) -> int:
    return _rad_split_pair(a, b)[0]


def _rad_product_rest(a: int, b: int) -> int:
    return _rad_split_pair(a, b)[1]


_SURD_RE = re.compile(r"^\s*(?:(?P<coef>[-+]?\d+(?:/\d+)?)\s*\*\s*)?(?P<neg>-)?sqrt\((?P<rad>\d+(?:/\d+)?)\)\s*$")


def parse_exact(text: str):
    """Inverse of ``str`` for Fractions and Surds."""
    m = _SURD_RE.match(text)
    if m:
        coef = Fraction(m.group("coef") or 1)
        if m.group("neg"):
            coef = -coef
        return Surd(coef, Fraction(m.group("rad")))
    return Fraction(text)


def format_exact(value) -> str:
    if isinstance(value, Surd):
        return str(value)
    return str(parse_rational(value))


# ---------------------------------------------------------------------------
# certified intervals
# ---------------------------------------------------------------------------


class _IntervalContext(MPIntervalContext):
    """mpmath interval context that also accepts Fractions and Surds as operands."""

    def convert(self, x):
        if isinstance(x, (Fraction, Surd)):
            return to_interval(x, self)
        return MPIntervalContext.convert(self, x)


@lru_cache(maxsize=None)
def interval_context(prec: int = DEFAULT_PRECISION) -> MPIntervalContext:
    """An mpmath interval context at ``prec`` bits, one per precision."""
    ctx = _IntervalContext()
    ctx.prec = prec
    return ctx


def is_interval(x) -> bool:
    return hasattr(x, "_mpi_")


def to_interval(x, ctx: MPIntervalContext):
    """Enclose an exact scalar (int, Fraction, Surd) or re-home an interval."""
    if is_interval(x):
        if x.ctx is ctx:
            return x
        return ctx.make_mpf(x._mpi_)
    if isinstance(x, Surd):
        if x.coef == 0:
            return ctx.mpf(0)
        return to_interval(x.coef, ctx) * ctx.sqrt(x.rad)
    q = parse_rational(x)
    prec = ctx.prec
    lo = from_rational(q.numerator, q.denominator, prec, round_floor)
    hi = from_rational(q.numerator, q.denominator, prec, round_ceiling)
    return ctx.make_mpf((lo, hi))


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an interval."""
    lo, hi = x._mpi_
    p, q = to_rational(lo)
    r, s = to_rational(hi)
    return Fraction(int(p), int(q)), Fraction(int(r), int(s))


def lower(x) -> Fraction:
    if not is_interval(x):
        return parse_rational(x) if not isinstance(x, Surd) else _surd_bound(x, lower)
    return endpoints(x)[0]


def upper(x) -> Fraction:
    if not is_interval(x):
        return parse_rational(x) if not isinstance(x, Surd) else _surd_bound(x, upper)
    return endpoints(x)[1]


def _surd_bound(x: Surd, side):
    return side(to_interval(x, interval_context()))


def width(x) -> Fraction:
    lo, hi = endpoints(x)
    return hi - lo


def magnitude(x) -> Fraction:
    """Rational upper bound on ``|x|``."""
    lo, hi = endpoints(x)
    return max(abs(lo), abs(hi))


def contains(x, value) -> bool:
    lo, hi = endpoints(x)
    if isinstance(value, Surd):
        return value >= lo and value <= hi
    v = parse_rational(value)
    return lo <= v <= hi


def certainly_positive(x) -> bool:
    return lower(x) > 0


def certainly_negative(x) -> bool:
    return upper(x) < 0


def interval_from_bounds(lo, hi, ctx: MPIntervalContext):
    """Outward-rounded interval enclosing the exact range [lo, hi]."""
    a, b = parse_rational(lo), parse_rational(hi)
    prec = ctx.prec
    return ctx.make_mpf((from_rational(a.numerator, a.denominator, prec, round_floor),
                         from_rational(b.numerator, b.denominator, prec, round_ceiling)))


def hull(a, b):
    """Smallest interval containing two intervals of the same context."""
    la, ha = a._mpi_
    lb, hb = b._mpi_
    lo = lb if mpf_lt(lb, la) else la
    hi = hb if mpf_lt(ha, hb) else ha
    return a.ctx.make_mpf((lo, hi))
