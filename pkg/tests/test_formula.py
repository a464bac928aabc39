import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import diag, rand_hermitian
from qdecide.core.cmatrix import CMatrix
from qdecide.formula.domains import encode_membership
from qdecide.formula.poly import Poly
from qdecide.formula.prenex import formula_stats, prenex
from qdecide.formula.smt import export_smt, parse_smt
from qdecide.formula.syntax import (
    And,
    Atom,
    Domain,
    Formula,
    Implies,
    MatrixVar,
    atoms,
    conj,
    eq,
    evaluate,
    exists,
    formula_from_json,
    formula_to_json,
    ge,
    gt,
    lt,
    scalar_var,
)
from qdecide.formula.witness import check_witness, numeric_search
from qdecide.errors import IncompleteAssignment, UnsupportedDomain

X, Y = Poly.var("x"), Poly.var("y")
TRUE_ATOM = ge(Poly.const(1))


def ex(vars, body):
    return Formula((("exists", tuple(vars)),), body)


# --- polynomials -----------------------------------------------------------------


small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@given(small, small, small, small)
def test_poly_arithmetic_matches_sympy(a, b, x, y):
    p = (X * a + Y) * (X - b) + Poly.const(a * b)
    sx, sy = sympy.symbols("x y")
    ref = (sx * sympy.Rational(str(a)) + sy) * (sx - sympy.Rational(str(b))) + sympy.Rational(str(a * b))
    got = p.evaluate({"x": x, "y": y})
    assert sympy.Rational(str(got)) == ref.subs({sx: sympy.Rational(str(x)), sy: sympy.Rational(str(y))})


def test_poly_degree_and_variables():
    p = X * X * Y + Y - 3
    assert p.degree() == 3
    assert p.variables() == {"x", "y"}
    assert (p - p).is_constant() and (p - p).constant_value() == 0


# --- membership encodings -----------------------------------------------------------


def _relations(node):
    return [a.rel for a in atoms(node)]


def test_psd_2x2_encoding_counts():
    _, node = encode_membership(MatrixVar("X", 2, 2, Domain("psd")))
    rels = _relations(node)
    assert rels.count("=") == 4
    assert rels.count(">=") == 3
    # the 2x2 minor is x11 x22 - a^2 - b^2 for off-diagonal a + ib
    minor = atoms(node)[-1].poly
    vals = {"X_0_0_re": 3, "X_1_1_re": 2, "X_0_1_re": 1, "X_0_1_im": Fraction(1, 2)}
    assert minor.evaluate({**vals, "X_1_0_re": 0, "X_1_0_im": 0, "X_0_0_im": 0, "X_1_1_im": 0}) \
        == 6 - 1 - Fraction(1, 4)


def test_density_1x1_encoding():
    v = MatrixVar("r", 1, 1, Domain("density"))
    _, node = encode_membership(v)
    f = ex([v], node)
    assert check_witness(f, {"r": 1})
    assert not check_witness(f, {"r": Fraction(1, 2)})
    assert not check_witness(f, {"r": [[[1, 1]]]})


def test_rank0_forces_zero():
    v = MatrixVar("Z", 2, 2, Domain.of("rank", r=0))
    _, node = encode_membership(v)
    f = ex([v], node)
    assert check_witness(f, {"Z": CMatrix.zeros(2)})
    assert not check_witness(f, {"Z": diag(0, Fraction(1, 100))})


def test_rank1_encoding():
    v = MatrixVar("R", 2, 2, Domain.of("rank", r=1))
    f = ex([v], encode_membership(v)[1])
    assert check_witness(f, {"R": CMatrix.from_rows([[1, 2], [2, 4]])})
    assert not check_witness(f, {"R": CMatrix.identity(2)})
    assert not check_witness(f, {"R": CMatrix.zeros(2)})


def test_unitary_encoding():
    v = MatrixVar("U", 2, 2, Domain("unitary"))
    f = ex([v], encode_membership(v)[1])
    assert check_witness(f, {"U": CMatrix.from_rows([[0, [0, 1]], [1, 0]])})
    assert not check_witness(f, {"U": CMatrix.from_rows([[1, 1], [0, 1]])})


def test_norm_ball_encodings():
    inf = MatrixVar("A", 2, 2, Domain.of("norm_ball", p="inf"))
    f = ex([inf], encode_membership(inf)[1])
    assert check_witness(f, {"A": diag(1, -1)})
    assert not check_witness(f, {"A": diag(Fraction(3, 2), 0)})
    two = MatrixVar("B", 2, 2, Domain.of("norm_ball", p=2))
    g = ex([two], encode_membership(two)[1])
    assert check_witness(g, {"B": diag(Fraction(3, 5), Fraction(4, 5))})
    assert not check_witness(g, {"B": diag(1, Fraction(1, 10))})
    with pytest.raises(UnsupportedDomain):
        encode_membership(MatrixVar("C", 2, 2, Domain.of("norm_ball", p=3)))


def test_simplex_and_nonneg():
    s = MatrixVar("w", 3, 1, Domain("simplex"))
    f = ex([s], encode_membership(s)[1])
    assert check_witness(f, {"w": [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]})
    assert not check_witness(f, {"w": [Fraction(3, 2), Fraction(-1, 4), Fraction(-1, 4)]})
    assert s.size == 3


def test_channel_choi_encoding():
    # normalised Choi of the identity channel is |Omega><Omega| / 2
    v = MatrixVar("C", 4, 4, Domain.of("channel_choi", din=2, dout=2))
    f = ex([v], encode_membership(v)[1])
    omega = CMatrix.from_rows([[1 if i in (0, 3) and j in (0, 3) else 0 for j in range(4)] for i in range(4)])
    assert check_witness(f, {"C": omega.scale(Fraction(1, 2))})
    assert not check_witness(f, {"C": omega})
    assert not check_witness(f, {"C": CMatrix.zeros(4)})
    with pytest.raises(UnsupportedDomain):
        encode_membership(MatrixVar("C", 4, 4, Domain("channel_choi")))


def test_psd_encoding_agrees_with_eigenvalues():
    rng = random.Random(7)
    var = MatrixVar("X", 3, 3, Domain("psd"))
    node = encode_membership(var)[1]
    f = ex([var], node)
    for _ in range(100):
        m = rand_hermitian(rng, 3)
        if rng.random() < 0.5:
            m = m.matmul(m)              # push half the sample to the PSD side
        expect = np.linalg.eigvalsh(m.to_numpy()).min() >= -1e-12
        assert check_witness(f, {"X": m}) == expect


# --- prenex / stats ---------------------------------------------------------------------


def test_prenex_density_example():
    # exists rho in density: tr[rho diag(1,-1)] > 0  ->  8 reals, x11 - x22 > 0
    rho = MatrixVar("rho", 2, 2, Domain("density"))
    body = gt(Poly.var("rho_0_0_re") - Poly.var("rho_1_1_re"))
    f = prenex(ex([rho], body))
    assert f.is_prenex and formula_stats(f).real_variables == 8
    assert atoms(f.body)[-1] == body
    assert check_witness(f, {"rho": diag(1, 0)})
    assert not check_witness(f, {"rho": diag(Fraction(1, 2), Fraction(1, 2))})


def test_prenex_forall_relativised_by_implication():
    v = MatrixVar("X", 2, 2, Domain("psd"))
    body = ge(Poly.var("X_0_0_re"))
    f = prenex(Formula((("forall", (v,)),), body))
    assert f.quantifiers() == ["forall"]
    assert isinstance(f.body, Implies) and f.body.rhs == body


def test_prenex_is_idempotent():
    f = prenex(ex([scalar_var("x")], ge(X)))
    assert prenex(f) is f


def test_stats_variable_free():
    f = prenex(Formula((), eq(Poly.const(0))))
    s = formula_stats(f)
    assert s.real_variables == 0 and s.atoms == 1 and s.alternations == 0


def _random_atom(rng, names):
    p = Poly.const(rng.randint(-2, 2))
    for n in names:
        p = p + Poly.var(n) * rng.randint(-2, 2)
    if rng.random() < 0.5:
        n = rng.choice(names)
        p = p + Poly.var(n) * Poly.var(n) * rng.choice([-1, 1])
    return Atom(p, rng.choice([">", ">=", "="]))


def test_prenex_preserves_truth_on_random_existentials():
    grid = [Fraction(k, 2) for k in range(-4, 5)]
    rng = random.Random(11)
    for _ in range(100):
        a = _random_atom(rng, ["x"])
        b = _random_atom(rng, ["x", "y"])
        nested = Formula((("exists", (scalar_var("x"),)),), And((a, exists([scalar_var("y")], b))))
        flat = prenex(nested)
        assert flat.quantifiers() == ["exists"]
        direct = any(evaluate(a, {"x": x}) and any(evaluate(b, {"x": x, "y": y}) for y in grid) for x in grid)
        via = any(check_witness(flat, {"x": x, "y": y}) for x in grid for y in grid)
        assert direct == via


# --- SMT export ------------------------------------------------------------------------


def test_smt_simple_example():
    f = prenex(ex([scalar_var("x")], eq(X * X - 2)))
    text = export_smt(f)
    assert "(exists ((x Real))" in text
    assert "(= (* x x) 2)" in text or "(= (- (* x x) 2) 0)" in text
    assert "(check-sat)" in text and "(set-logic NRA)" in text
    assert parse_smt(text) == f


def test_smt_rational_numerals():
    f = prenex(ex([scalar_var("x")], gt(X, Fraction(-3, 7))))
    text = export_smt(f)
    assert "(/ 3 7)" in text
    assert parse_smt(text) == f


def test_smt_density_declares_reals():
    v = MatrixVar("r", 1, 1, Domain("density"))
    f = prenex(ex([v], TRUE_ATOM))
    back = parse_smt(export_smt(f))
    assert back == f and formula_stats(back) == formula_stats(f)



def test_json_roundtrip():
    v = MatrixVar("X", 2, 2, Domain("psd"))
    f = prenex(Formula((("forall", (v,)), ("exists", (scalar_var("t"),))), ge(Poly.var("t") - Poly.var("X_0_0_re"))))
    assert formula_from_json(formula_to_json(f)) == f
    assert parse_smt(export_smt(f)) == f


# --- witnesses -----------------------------------------------------------------------


def test_check_witness_strictness():
    f = ex([scalar_var("x")], ge(X))
    assert check_witness(f, {"x": 1})
    g = ex([scalar_var("x")], gt(X))
    assert not check_witness(g, {"x": 0})
    with pytest.raises(IncompleteAssignment):
        check_witness(g, {})


def test_numeric_search_positive_root():
    f = prenex(ex([scalar_var("x")], conj(eq(X * X - 4), gt(X))))
    res = numeric_search(f, seed=0)
    assert res.status == "witness"
    assert res.assignment["x"] == 2
    assert check_witness(f, res.assignment)


def test_numeric_search_unsat_is_unknown():
    f = prenex(ex([scalar_var("x")], lt(X * X, 0)))
    res = numeric_search(f, budget=3, seed=0)
    assert res.status == "unknown" and res.assignment is None


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=-6, max_value=6), st.integers(min_value=1, max_value=6))
def test_numeric_witnesses_always_check(a, b):
    # x*b = a with x >= a/b: the unique solution is rational
    f = prenex(ex([scalar_var("x")], conj(eq(X * b - a), ge(X * b - a))))
    res = numeric_search(f, budget=4, seed=1)
    if res.found:
        assert check_witness(f, res.assignment)
        assert res.assignment["x"] == Fraction(a, b)

