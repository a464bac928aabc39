"""Random exact objects: rational Hermitians, unitaries, states and channels."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .channels import Channel
from .core.cmatrix import CMatrix, Cx


def _rand_q(rng, lo=-3, hi=3, den=4) -> Fraction:
    return Fraction(int(rng.integers(lo * den, hi * den + 1)), den)


def random_hermitian(d: int, rng, lo=-3, hi=3, den=4, real=False) -> CMatrix:
    vals = {}
    for i in range(d):
        vals[i, i] = Cx(_rand_q(rng, lo, hi, den), Fraction(0))
        for j in range(i + 1, d):
            im = Fraction(0) if real else _rand_q(rng, lo, hi, den)
            vals[i, j] = Cx(_rand_q(rng, lo, hi, den), im)
            vals[j, i] = vals[i, j].conj()
    return CMatrix.from_entries(d, d, lambda i, j: vals[i, j])


def rational_unitary(d: int, rng) -> CMatrix:
    """Cayley transform ``(1 - iA)(1 + iA)^-1`` of a random rational Hermitian ``A``."""
    a = random_hermitian(d, rng, -2, 2, 2)
    ia = a.scale(Cx(Fraction(0), Fraction(1)))
    one = CMatrix.identity(d)
    return (one - ia).matmul((one + ia).inverse())


def random_density(d: int, rng, rank: int | None = None) -> CMatrix:
    """``B B^dagger / tr`` with a random rational ``B``."""
    rank = rank or d
    b = CMatrix.from_entries(d, rank, lambda i, j: Cx(_rand_q(rng, -2, 2, 2), _rand_q(rng, -2, 2, 2)))
    m = b.matmul(b.dagger())
    tr = m.trace().re
    if tr == 0:
        return CMatrix.identity(d).scale(Fraction(1, d))
    return m.scale(1 / tr)


def random_kraus(d: int, rng, env: int = 2) -> list[CMatrix]:
    """Kraus operators of ``X -> tr_E[W (X (x) |0><0|) W^dagger]`` for a rational unitary ``W``."""
    w = rational_unitary(d * env, rng)
    return [CMatrix.from_entries(d, d, lambda i, j, k=k: w.entry(i * env + k, j * env))
            for k in range(env)]


def random_channel(d: int, rng, env: int = 2, basis=None) -> Channel:
    return Channel.from_kraus(random_kraus(d, rng, env), basis)


def random_unital_kraus(d: int, rng, terms: int = 3) -> list[CMatrix]:
    """Mixed-unitary Kraus family ``sqrt(p_k) U_k`` is not rational; return (p, U) pairs instead."""
    raw = [int(rng.integers(1, 6)) for _ in range(terms)]
    total = sum(raw)
    return [(Fraction(r, total), rational_unitary(d, rng)) for r in raw]


def random_unital_channel(d: int, rng, terms: int = 3, basis=None) -> Channel:
    pairs = random_unital_kraus(d, rng, terms)

    def fn(x):
        out = None
        for p, u in pairs:
            term = u.matmul(x).matmul(u.dagger()).scale(p)
            out = term if out is None else out + term
        return out
    return Channel.from_map(fn, d, basis)


def as_numpy_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
