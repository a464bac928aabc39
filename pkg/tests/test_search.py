import itertools
import random
from fractions import Fraction

import pytest

from conftest import diag
from qdecide.channels import Channel
from qdecide.core.cmatrix import CMatrix
from qdecide.gadgets import build_prop1, kraus_normalize
from qdecide.search import (
    BUDGET,
    EXHAUSTED,
    WITNESS,
    CapExceeded,
    PcpInstance,
    bruteforce_oracle,
    mortality_search,
    oracle_verdict,
    pcp_search,
    threshold_search,
)

SIPSER = [("b", "ca"), ("a", "ab"), ("ca", "a"), ("abc", "c")]


def pcp_brute(inst, depth):
    """Shortest, then lexicographically first, solution by plain enumeration."""
    for n in range(1, depth + 1):
        for w in itertools.product(range(1, inst.k + 1), repeat=n):
            if inst.is_solution(w):
                return w
    return None


# --- PCP ----------------------------------------------------------------------------


def test_sipser_instance():
    inst = PcpInstance.from_strings(SIPSER)
    out = pcp_search(inst, max_depth=8)
    assert out.verdict == WITNESS and out.word == (2, 1, 3, 2, 4)
    top = "".join(SIPSER[i - 1][0] for i in out.word)
    bot = "".join(SIPSER[i - 1][1] for i in out.word)
    assert top == bot == "abcaaabc"


def test_single_tiles():
    assert pcp_search(PcpInstance((((1,), (1,)),), 1), max_depth=3).word == (1,)
    out = pcp_search(PcpInstance((((1,), (1, 2)),), 2), max_depth=10)
    assert out.verdict == EXHAUSTED and out.word is None


def test_empty_tile_rejected():
    with pytest.raises(ValueError):
        PcpInstance((((1,), ()),), 1)


def test_pcp_matches_bruteforce():
    rng = random.Random(3)
    for _ in range(40):
        k = rng.randint(1, 3)
        tiles = tuple((tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 3))),
                       tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 3)))) for _ in range(k))
        inst = PcpInstance(tiles, 2)
        out = pcp_search(inst, max_overhang=64, max_depth=5)
        assert out.word == pcp_brute(inst, 5)
        if out.found:
            assert inst.is_solution(out.word)


def test_claus_shape():
    inst = PcpInstance.from_strings([("a", "ab"), ("b", "ca"), ("ca", "a"), ("abc", "c")])
    out = pcp_search(inst, max_depth=8, claus=True)
    assert out.found and out.word[0] == 1 and out.word[-1] == inst.k
    assert out.word == (1, 2, 3, 1, 4)
    assert inst.is_solution(out.word)


def test_overhang_cap_reports_budget():
    # every partial solution grows the overhang by one letter
    inst = PcpInstance((((1,), (1, 1)), ((1, 1, 1), (1,))), 1)
    out = pcp_search(inst, max_overhang=1, max_depth=6)
    # the cap prunes (1, 1); the witness is still sound and of minimal length
    assert out.stats["pruned_overhang"] > 0
    assert inst.is_solution(out.word)
    assert len(out.word) == len(pcp_brute(inst, 6))
    out = pcp_search(PcpInstance((((1,), (1, 1)),), 1), max_overhang=2, max_depth=6)
    assert out.verdict == BUDGET


# --- mortality ----------------------------------------------------------------------


def test_mortality_examples():
    out = mortality_search([CMatrix.from_rows([[0, 1], [0, 0]])], max_depth=4)
    assert out.word == (1, 1)
    out = mortality_search([CMatrix.identity(2)], max_depth=5)
    assert out.verdict == EXHAUSTED


def test_mortality_matches_bruteforce():
    rng = random.Random(8)
    for _ in range(20):
        ms = [CMatrix.from_rows([[rng.choice([0, 0, 1, -1]) for _ in range(2)] for _ in range(2)])
              for _ in range(2)]
        out = mortality_search(ms, max_depth=4)
        want = None
        for n in range(1, 5):
            for w in itertools.product((1, 2), repeat=n):
                p = ms[w[0] - 1]
                for i in w[1:]:
                    p = p.matmul(ms[i - 1])
                if p == CMatrix.zeros(2):
                    want = w
                    break
            if want:
                break
        assert out.word == want


def test_mortality_witness_survives_normalisation():
    e12 = CMatrix.from_rows([[0, 1], [0, 0]])
    e21 = CMatrix.from_rows([[0, 0], [1, 0]])
    out = mortality_search([e12, e21], max_depth=4)
    assert out.word == (1, 1)
    kn = kraus_normalize([e12, e21])
    assert kn.annihilates(out.word)


# --- threshold search -----------------------------------------------------------------


def test_identity_bundle_witness(identity_bundle):
    out = threshold_search(None, None, None, None, bundle=identity_bundle, max_depth=3)
    assert out.verdict == WITNESS and out.word == (1,)
    # the generic transfer-vector path agrees
    b = identity_bundle
    gen = threshold_search(b.channels, b.rho, b.phi, b.lam, max_depth=3)
    assert gen.word == (1,)


def test_zero_block_strict_and_nonstrict():
    b = build_prop1(Fraction(1, 2), diag(1, 0), [CMatrix.zeros(2)], [1, 0], [1, 0])
    strict = threshold_search(None, None, None, None, bundle=b, strict=True, max_depth=3)
    assert strict.verdict == EXHAUSTED
    loose = threshold_search(None, None, None, None, bundle=b, strict=False, max_depth=3)
    assert loose.verdict == WITNESS and loose.word == (1,)
    # intervals cannot certify equality: the generic path reports budget, never a false claim
    gen = threshold_search(b.channels, b.rho, b.phi, b.lam, strict=False, max_depth=2)
    assert gen.verdict == BUDGET


def test_oracle_counts():
    chans = [Channel.identity(2), Channel.depolarizing(2)]
    rho, phi = diag(1, 0), diag(1, 0)
    listing = bruteforce_oracle(chans, rho, phi, 3)
    assert len(listing) == 14
    assert [w for w, _ in listing[:3]] == [(1,), (2,), (1, 1)]
    assert bruteforce_oracle(chans, rho, phi, 0) == []
    with pytest.raises(CapExceeded):
        bruteforce_oracle(chans, rho, phi, 10, cap=100)


def test_plain_channels_threshold():
    # identity keeps |0><0| at overlap 1; depolarizing drops it to 1/2
    chans = [Channel.depolarizing(2), Channel.identity(2)]
    rho, phi = diag(1, 0), diag(1, 0)
    out = threshold_search(chans, rho, phi, Fraction(3, 4), max_depth=3)
    listing = bruteforce_oracle(chans, rho, phi, 3)
    assert out.word == oracle_verdict(listing, Fraction(3, 4)) == (2,)
    out = threshold_search([Channel.depolarizing(2)], rho, phi, Fraction(3, 4), max_depth=3)
    assert out.verdict == EXHAUSTED


def test_bundle_search_matches_oracle(two_letter_bundle):
    b = two_letter_bundle
    out = threshold_search(None, None, None, None, bundle=b, max_depth=4)
    listing = bruteforce_oracle(b.channels, b.rho, b.phi, 4)
    assert out.word == oracle_verdict(listing, b.lam)


def test_negative_bundle_exhausts():
    # <x|M^n|y> = -1 for every n: never above lambda
    m = CMatrix.from_rows([[1, 0], [0, 1]])
    b = build_prop1(Fraction(1, 2), diag(1, 0), [m], [1, 0], [-1, 0])
    out = threshold_search(None, None, None, None, bundle=b, max_depth=4)
    assert out.verdict == EXHAUSTED and out.depth == 4
    assert oracle_verdict(bruteforce_oracle(b.channels, b.rho, b.phi, 4), b.lam) is None


def test_search_is_deterministic(two_letter_bundle):
    b = two_letter_bundle
    a = threshold_search(None, None, None, None, bundle=b, max_depth=4)
    c = threshold_search(None, None, None, None, bundle=b, max_depth=4)
    assert a.to_json() == c.to_json()
