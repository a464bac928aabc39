import random
from fractions import Fraction

import pytest

from qdecide.core.cmatrix import CMatrix


def rand_frac(rng, lo=-3, hi=3, den=4):
    return Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))


def rand_hermitian(rng, d, complex_=True):
    rows = [[None] * d for _ in range(d)]
    for i in range(d):
        rows[i][i] = [rand_frac(rng), Fraction(0)]
        for j in range(i + 1, d):
            re = rand_frac(rng)
            im = rand_frac(rng) if complex_ else Fraction(0)
            rows[i][j] = [re, im]
            rows[j][i] = [re, -im]
    return CMatrix.from_rows(rows)


def diag(*vals):
    n = len(vals)
    return CMatrix.from_rows([[Fraction(vals[i]) if i == j else 0 for j in range(n)] for i in range(n)])


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def identity_bundle():
    # one block matrix M = 1, d = 2: the smallest useful bundle
    from qdecide.gadgets import build_prop1
    return build_prop1(Fraction(1, 2), diag(1, 0), [CMatrix.identity(2)], [1, 0], [1, 0])


@pytest.fixture(scope="session")
def two_letter_bundle():
    from qdecide.gadgets import build_prop1
    m1 = CMatrix.from_rows([[1, 1], [0, 1]])
    m2 = CMatrix.from_rows([[0, -1], [1, 0]])
    return build_prop1(Fraction(1, 3), diag(1, 0), [m1, m2], [1, 0], [0, 1])
