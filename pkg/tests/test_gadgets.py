import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import diag
from qdecide.channels import is_completely_positive
from qdecide.core.basis import hermitian_basis
from qdecide.core.cmatrix import CMatrix
from qdecide.core.scalars import Surd, contains, endpoints
from qdecide.errors import LetterOutOfRange, NoPositiveEigenvector, NuOutOfRange, ZeroVector
from qdecide.gadgets import (
    GAMMA_X,
    GAMMA_Y,
    bilinear,
    build_prop1,
    bundle_from_json,
    bundle_to_json,
    choose_nu_c,
    constraint_report,
    gamma,
    gamma_square,
    kraus_normalize,
    lift_lemma2,
    lift_transfer,
    sigma,
    verify_prop1_identity,
)

words3 = st.lists(st.integers(min_value=1, max_value=3), max_size=6).map(tuple)


# --- sigma / gamma ------------------------------------------------------------------


def test_sigma_examples():
    assert sigma((), 3) == 0
    assert sigma((1, 2), 3) == 5
    with pytest.raises(LetterOutOfRange):
        sigma((4,), 3)


@given(words3, words3)
def test_sigma_concatenation(u, w):
    assert sigma(u + w, 3) == 3 ** len(w) * sigma(u, 3) + sigma(w, 3)


@given(words3, words3, words3, words3)
@settings(max_examples=200)
def test_gamma_morphism(u, w, u2, w2):
    assert gamma(u + u2, w + w2, 3) == gamma(u, w, 3).matmul(gamma(u2, w2, 3))


@given(words3, words3, words3, words3)
@settings(max_examples=50)
def test_gamma_square_morphism(u, w, u2, w2):
    g1, xx, yy = gamma_square(u, w, 3)
    g2, _, _ = gamma_square(u2, w2, 3)
    assert gamma_square(u + u2, w + w2, 3)[0] == g1.matmul(g2)


def test_gamma_identity_and_readout():
    assert gamma((), (), 3) == CMatrix.identity(3)
    assert bilinear(GAMMA_Y, gamma((1,), (1,), 3), GAMMA_X) == 0
    g, xx, yy = gamma_square((1,), (2,), 3)
    assert bilinear(yy, g, xx) == 1


def _all_words(m, n):
    for k in range(n + 1):
        yield from itertools.product(range(1, m + 1), repeat=k)


def test_gamma_readout_exhaustive():
    ws = list(_all_words(3, 3))
    for u in ws:
        for w in ws:
            v = bilinear(GAMMA_Y, gamma(u, w, 3), GAMMA_X)
            assert v == sigma(u, 3) - sigma(w, 3)
            assert (v == 0) == (u == w)


# --- Kraus normalisation ---------------------------------------------------------------


def test_kraus_identity():
    kn = kraus_normalize([CMatrix.identity(2)])
    assert kn.lam == 1 and kn.residual == 0
    assert kn.matrices()[0] == CMatrix.identity(2)


def test_kraus_diagonal_antidiagonal_pair():
    ms = [diag(1, 0), CMatrix.from_rows([[0, 1], [1, 0]])]
    kn = kraus_normalize(ms)
    assert kn.residual <= Fraction(1, 10**20)
    # float oracle: sum S_i S_i^dagger / lam = 1
    total = sum(s.to_numpy() @ s.to_numpy().conj().T for s in kn.similar) / float(kn.lam)
    assert np.allclose(total, np.eye(2))


def test_kraus_nilpotent_raises():
    with pytest.raises(NoPositiveEigenvector):
        kraus_normalize([CMatrix.from_rows([[0, 1], [0, 0]])])


def test_kraus_preserves_mortality():
    e12 = CMatrix.from_rows([[0, 1], [0, 0]])
    e21 = CMatrix.from_rows([[0, 0], [1, 0]])
    ms = [e12, e21, diag(1, 0)]
    kn = kraus_normalize(ms)
    assert kn.residual <= Fraction(1, 10**20)
    for n in range(1, 5):
        for w in itertools.product(range(1, 4), repeat=n):
            p = ms[w[0] - 1]
            for i in w[1:]:
                p = p.matmul(ms[i - 1])
            assert kn.annihilates(w) == (p == CMatrix.zeros(2))


# --- lift ------------------------------------------------------------------------------


def test_lift_zero_is_depolarizing():
    basis = hermitian_basis(2, psi=diag(1, 0))
    lf = lift_lemma2(CMatrix.zeros(2), 0, diag(1, 0), basis)
    t = lf.channel(Fraction(1, 10))
    rho = CMatrix.projector([1, [0, 1]])
    assert t.apply(rho) == CMatrix.identity(2).scale(Fraction(1, 2))


def test_lift_nu_boundary():
    basis = hermitian_basis(3, psi=diag(1, 0, 0))
    m = CMatrix.zeros(7)
    with pytest.raises(NuOutOfRange):
        lift_lemma2(m, -Surd.sqrt(2), diag(1, 0, 0), basis)
    with pytest.raises(NuOutOfRange):
        lift_lemma2(m, 1 / Surd.sqrt(2), diag(1, 0, 0), basis)


def test_lift_random_matrix_is_cp():
    rng = random.Random(5)
    psi = diag(1, 0, 0)
    basis = hermitian_basis(3, psi=psi)
    m = CMatrix.from_rows([[rng.randint(-2, 2) for _ in range(7)] for _ in range(7)])
    lf = lift_lemma2(m, Fraction(1, 3), psi, basis)
    assert is_completely_positive(lf.channel(lf.eps_star)).status == "certified-true"
    # and far beyond the bound the map stops being CP
    assert is_completely_positive(lf.channel(Fraction(10))).status == "certified-false"


def test_block_product_sanity():
    nu, eps = Fraction(1, 3), Fraction(1, 7)
    m1 = CMatrix.from_rows([[1, 2], [0, -1]])
    m2 = CMatrix.from_rows([[0, 1], [1, 1]])
    p = lift_transfer(m1, nu, eps).matmul(lift_transfer(m2, nu, eps))
    assert p.submatrix((0, 1), (0, 1)) == CMatrix.from_rows([[1, 0], [nu, 0]])
    assert p.submatrix((2, 3), (2, 3)) == m1.matmul(m2).scale(eps * eps)
    assert p.submatrix((0, 1), (2, 3)) == CMatrix.zeros(2)


# --- parameter selection ------------------------------------------------------------------


def test_lambda_one_over_d():
    nu, c, branch = choose_nu_c(Fraction(1, 3), 3)
    assert (nu, c, branch) == (0, Fraction(1, 3), "zero")


@given(st.fractions(min_value=0, max_value=1, max_denominator=200).filter(lambda q: 0 < q < 1),
       st.integers(min_value=2, max_value=7))
@settings(max_examples=300)
def test_constraints_always_feasible(lam, d):
    nu, c, _ = choose_nu_c(lam, d)
    rep = constraint_report(lam, d, nu, c)
    assert rep["C1"] and rep["C2"] and rep["C3"] and rep["C4"]


# --- bundles --------------------------------------------------------------------------


def test_identity_bundle(identity_bundle):
    b = identity_bundle
    assert b.checks["all"]
    chk = verify_prop1_identity(b, (1,))
    assert chk.holds and chk.width <= Fraction(1, 10**20)
    # <x|M|y> = 1, so the overlap exceeds lambda
    assert endpoints(chk.lhs)[0] > b.lam


def test_two_letter_bundle_identity(two_letter_bundle):
    b = two_letter_bundle
    assert b.checks["all"]
    for n in range(1, 4):
        for w in itertools.product((1, 2), repeat=n):
            chk = verify_prop1_identity(b, w)
            assert chk.holds and chk.width <= Fraction(1, 10**20)


def _float_lhs(b, word):
    """Independent float evaluation: T(X) = sum_ij T_ij tr(H_j X) H_i."""
    hs = [h.to_numpy() for h in b.basis.matrices]
    rho = b.rho.to_numpy()
    for i in reversed(word):
        t = b.channels[i - 1].transfer.to_numpy().real
        coords = np.array([np.trace(h @ rho).real for h in hs])
        rho = sum(c * h for c, h in zip(t @ coords, hs))
    return float(np.trace(b.phi.to_numpy() @ rho).real)


def test_lhs_float_cross_check(two_letter_bundle):
    b = two_letter_bundle
    for w in [(1,), (2,), (1, 2), (2, 2, 1)]:
        chk = verify_prop1_identity(b, w)
        mid = float(sum(endpoints(chk.lhs)) / 2)
        assert abs(mid - _float_lhs(b, w)) < 1e-12


def test_zero_block_gives_lambda():
    b = build_prop1(Fraction(1, 4), diag(1, 0), [CMatrix.zeros(2)], [1, 0], [0, 1])
    chk = verify_prop1_identity(b, (1,))
    assert contains(chk.lhs, Fraction(1, 4))


def test_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        build_prop1(Fraction(1, 2), diag(1, 0), [CMatrix.identity(2)], [0, 0], [1, 0])


def test_bundle_d3_all_checks():
    m = CMatrix.from_rows([[(i + 2 * j) % 3 - 1 for j in range(7)] for i in range(7)])
    x = [1, 0, 0, 0, 0, 0, -1]
    y = [0, 1, 0, 0, 0, 0, 1]
    phi = CMatrix.projector([1, 1, 0])
    b = build_prop1(Fraction(3, 4), phi, [m], x, y)
    assert b.checks["all"] and b.branch == "positive"
    for n in (1, 2, 3):
        chk = verify_prop1_identity(b, (1,) * n)
        assert chk.holds and chk.width <= Fraction(1, 10**20)


def test_bundle_json_roundtrip(two_letter_bundle):
    doc = json.loads(json.dumps(bundle_to_json(two_letter_bundle)))
    b = bundle_from_json(doc)
    assert b.eps == two_letter_bundle.eps and b.c == two_letter_bundle.c
    doc["derived"]["eps"] = "1/2"
    with pytest.raises(ValueError):
        bundle_from_json(doc)
