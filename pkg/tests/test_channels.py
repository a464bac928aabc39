import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_hermitian
from qdecide.channels import (
    Channel,
    choi_from_transfer,
    compose,
    fidelity_overlap,
    is_completely_positive,
    is_density,
    partial_transpose,
    tensor,
    tensor_power,
    transfer_from_choi,
)
from qdecide.core.cmatrix import CMatrix
from qdecide.core.eigen import negative_eigenvalue_count
from qdecide.errors import BadGrouping, DimensionMismatch

PHASES = [1, -1, [0, 1], [0, -1]]


def random_unitary(rng, d):
    """Signed/phased permutation matrix: exact and unitary."""
    perm = list(range(d))
    rng.shuffle(perm)
    rows = [[0] * d for _ in range(d)]
    for i, j in enumerate(perm):
        rows[i][j] = rng.choice(PHASES)
    return CMatrix.from_rows(rows)


def random_channel(rng, d, terms=3):
    """Unitaries and rational weights of a random mixed-unitary channel."""
    w = [Fraction(rng.randint(1, 5)) for _ in range(terms)]
    units = [random_unitary(rng, d) for _ in range(terms)]
    return units, [wi / sum(w) for wi in w]


def mixed_unitary(kraus_units, weights, d):
    def fn(x):
        out = CMatrix.zeros(d)
        for u, p in zip(kraus_units, weights):
            out = out + u.matmul(x).matmul(u.dagger()).scale(p)
        return out
    return Channel.from_map(fn, d)


def numpy_choi(units, weights, d):
    omega = np.zeros(d * d, dtype=complex)
    for i in range(d):
        omega[i * d + i] = 1
    omega /= np.sqrt(d)
    proj = np.outer(omega, omega.conj())
    out = np.zeros((d * d, d * d), dtype=complex)
    for u, p in zip(units, weights):
        k = np.kron(u.to_numpy(), np.eye(d))
        out += float(p) * k @ proj @ k.conj().T
    return out


def channel_pair(seed, d=None):
    rng = random.Random(seed)
    d = d or rng.randint(2, 3)
    units, weights = random_channel(rng, d)
    return mixed_unitary(units, weights, d), units, weights, d


# --- Choi / transfer -------------------------------------------------------------


def test_identity_choi_is_omega():
    c = Channel.identity(2).choi()
    omega = CMatrix.projector([1, 0, 0, 1])
    assert c == omega


def test_depolarizing_choi():
    d = 3
    c = Channel.depolarizing(d).choi()
    assert c == CMatrix.identity(d * d).scale(Fraction(1, d * d))


def test_transposition_choi_spectrum():
    t = Channel.transposition(2)
    ev = sorted(np.linalg.eigvalsh(t.choi().to_numpy()))
    assert np.allclose(ev, [-0.5, 0.5, 0.5, 0.5])
    v = is_completely_positive(t)
    assert v.status == "certified-false"


def test_choi_matches_numpy_oracle():
    for seed in range(10):
        t, units, weights, d = channel_pair(seed)
        assert np.allclose(t.choi().to_numpy(), numpy_choi(units, weights, d))


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_choi_transfer_roundtrip(seed):
    t, *_ = channel_pair(seed)
    back = transfer_from_choi(choi_from_transfer(t))
    assert back.transfer == t.transfer


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_random_channel_invariants(seed):
    t, *_ = channel_pair(seed)
    d = t.dim
    assert t.is_trace_preserving()
    row = [t.transfer.re[0, j] for j in range(d * d)]
    assert row == [1] + [0] * (d * d - 1)
    assert all(v == 0 for v in t.transfer.im.flat)
    assert is_completely_positive(t)
    rng = random.Random(seed + 1)
    m = rand_hermitian(rng, d)
    rho = m.matmul(m)
    tr = rho.trace().re
    if tr == 0:
        return
    rho = rho.scale(1 / tr)
    out = t.apply(rho)
    assert out.trace().re == 1
    assert is_density(out)


def test_cp_certified_for_identity_and_depolarizing():
    assert is_completely_positive(Channel.identity(2)).status == "certified-true"
    assert is_completely_positive(Channel.depolarizing(3)).status == "certified-true"


# --- apply / compose / tensor ------------------------------------------------------------


def test_apply_examples(rng):
    rho = CMatrix.projector([1, [0, 1]])
    assert Channel.identity(2).apply(rho) == rho
    assert Channel.depolarizing(2).apply(rho) == CMatrix.identity(2).scale(Fraction(1, 2))


def test_compose_identity_and_order():
    t, *_ = channel_pair(3, d=2)
    s, *_ = channel_pair(4, d=2)
    assert compose(t, Channel.identity(2)).transfer == t.transfer
    rho = CMatrix.projector([1, 2])
    # compose(t, s) applies s first
    assert compose(t, s).apply(rho) == t.apply(s.apply(rho))


def test_compose_associative():
    a, b, c = (channel_pair(i, d=2)[0] for i in (5, 6, 7))
    assert compose(compose(a, b), c).transfer == compose(a, compose(b, c)).transfer


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        compose(Channel.identity(2), Channel.identity(3))


def test_tensor_matches_kron():
    t, *_ = channel_pair(8, d=2)
    s, *_ = channel_pair(9, d=2)
    ts = tensor(t, s)
    assert ts.is_trace_preserving()
    a, b = CMatrix.projector([1, 1]), CMatrix.projector([1, [0, 1]])
    assert ts.apply(a.kron(b)) == t.apply(a).kron(s.apply(b))


def test_tensor_power_of_identity():
    p = tensor_power(Channel.identity(2), 2)
    rho = CMatrix.projector([1, 0, 0, 1])
    assert p.apply(rho) == rho


# --- partial transpose / overlap ---------------------------------------------------


def test_partial_transpose_product_state():
    a = CMatrix.projector([1, [0, 1]])
    b = CMatrix.projector([2, 1])
    pt = partial_transpose(a.kron(b), (2, 2))
    assert pt == a.transpose().kron(b)
    assert negative_eigenvalue_count(pt) == 0


def test_partial_transpose_involution(rng):
    m = rand_hermitian(rng, 4)
    assert partial_transpose(partial_transpose(m, (2, 2)), (2, 2)) == m
    with pytest.raises(BadGrouping):
        partial_transpose(m, (4,))


def test_fidelity_overlap_examples():
    phi = CMatrix.projector([1, 1])
    assert fidelity_overlap(phi, phi) == 1
    assert fidelity_overlap(phi, CMatrix.projector([1, -1])) == 0
    assert fidelity_overlap(phi, CMatrix.identity(2).scale(Fraction(1, 2))) == Fraction(1, 2)


def test_overlap_two_paths_agree():
    # full matrix path vs transfer-vector path
    d = 2
    chans = [channel_pair(s, d=d)[0] for s in (10, 11, 12)]
    rho = CMatrix.projector([1, 2])
    phi = CMatrix.projector([3, [0, 1]])
    b = chans[0].basis
    for word in itertools.product(range(3), repeat=3):
        full = rho
        vec = b.coords(rho)
        for i in reversed(word):
            full = chans[i].apply(full)
            t = chans[i].transfer.re
            vec = [sum(t[r, c] * vec[c] for c in range(d * d)) for r in range(d * d)]
        via_vec = sum(p * v for p, v in zip(b.coords(phi), vec))
        assert fidelity_overlap(phi, full) == via_vec
