from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qdecide.core.scalars import (
    NotClosed,
    Surd,
    contains,
    endpoints,
    format_exact,
    interval_context,
    parse_exact,
    parse_rational,
    to_interval,
    width,
)

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=60)


def test_parse_rational_forms():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational(" -2 ") == -2
    assert parse_rational(0.1) == Fraction(1, 10)
    assert parse_rational(Fraction(5, 7)) == Fraction(5, 7)
    with pytest.raises(TypeError):
        parse_rational(True)
    with pytest.raises(TypeError):
        parse_rational([1])


def test_surd_normalises_radicand():
    # sqrt(12) = 2 sqrt(3); sqrt(1/2) = 1/2 sqrt(2)
    s = Surd(1, 12)
    assert (s.coef, s.rad) == (2, 3)
    h = Surd.sqrt(Fraction(1, 2))
    assert (h.coef, h.rad) == (Fraction(1, 2), 2)
    assert Surd.sqrt(9).is_rational and Surd.sqrt(9).to_fraction() == 3
    with pytest.raises(ValueError):
        Surd(1, -2)


def test_surd_products_demote_to_fraction():
    r2 = Surd.sqrt(2)
    assert r2 * r2 == 2 and isinstance(r2 * r2, Fraction)
    assert (r2 + r2).coef == 2
    with pytest.raises(NotClosed):
        r2 + Surd.sqrt(3)


@given(fracs, st.integers(min_value=1, max_value=200))
def test_surd_square_matches_sympy(c, n):
    s = Surd(c, n)
    exact = sympy.Rational(c.numerator, c.denominator) * sympy.sqrt(n)
    assert sympy.Rational(s.square().numerator, s.square().denominator) == sympy.expand(exact**2)
    assert s.sign() == sympy.sign(exact)


@given(fracs, st.integers(min_value=1, max_value=60))
def test_format_parse_roundtrip(c, n):
    s = Surd(c, n)
    back = parse_exact(format_exact(s))
    if isinstance(back, Surd):
        assert (back.coef, back.rad) == (s.coef, s.rad)
    else:
        assert s.coef == back or (s.rad == 1 and s.coef == back)


@given(fracs, fracs, fracs)
@settings(max_examples=200)
def test_interval_encloses_exact_expression(a, b, c):
    ctx = interval_context(128)
    exact = a * b - c * c + a
    iv = to_interval(a, ctx) * to_interval(b, ctx) - to_interval(c, ctx) ** 2 + to_interval(a, ctx)
    assert contains(iv, exact)
    assert width(iv) < Fraction(1, 10**30)


def test_mixed_interval_operands():
    ctx = interval_context(128)
    x = ctx.mpf(1) * Fraction(1, 3) + Surd.sqrt(2)
    lo, hi = endpoints(x)
    third = Fraction(1, 3)
    assert (lo - third) ** 2 <= 2 <= (hi - third) ** 2
    assert hi - lo < Fraction(1, 10**30)


@given(st.integers(min_value=2, max_value=500))
def test_sqrt_enclosure_squares_back(n):
    ctx = interval_context(96)
    iv = to_interval(Surd.sqrt(n), ctx)
    lo, hi = endpoints(iv)
    assert lo * lo <= n <= hi * hi


def _leaf():
    return st.one_of(fracs.map(lambda q: ("q", q)), st.integers(2, 30).map(lambda n: ("s", n)))


exprs = st.recursive(
    _leaf(),
    lambda sub: st.tuples(st.sampled_from(["+", "-", "*"]), sub, sub),
    max_leaves=8,
)


def _eval(e, ctx):
    # (exact value as a float-free sympy number, interval)
    if e[0] == "q":
        q = e[1]
        return sympy.Rational(q.numerator, q.denominator), to_interval(q, ctx)
    if e[0] == "s":
        return sympy.sqrt(e[1]), to_interval(Surd.sqrt(e[1]), ctx)
    op, a, b = e
    ea, ia = _eval(a, ctx)
    eb, ib = _eval(b, ctx)
    if op == "+":
        return ea + eb, ia + ib
    if op == "-":
        return ea - eb, ia - ib
    return ea * eb, ia * ib


@given(exprs)
@settings(max_examples=1000, deadline=None)
def test_expression_tree_containment(e):
    ctx = interval_context(96)
    exact, iv = _eval(e, ctx)
    lo, hi = endpoints(iv)
    # the exact value evaluated to 300 digits sits far inside any 96-bit rounding
    v = sympy.N(exact, 300)
    assert sympy.Rational(lo.numerator, lo.denominator) <= v <= sympy.Rational(hi.numerator, hi.denominator)
