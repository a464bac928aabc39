"""Bounded-depth semi-deciders: PCP, matrix mortality and fidelity thresholds.

A negative result is always depth-qualified ("exhausted up to depth N").
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .channels import fidelity_overlap
from .core.cmatrix import CMatrix
from .core.scalars import DEFAULT_PRECISION, endpoints, interval_context, is_interval, to_interval
from .errors import CapExceeded, DimensionMismatch, LetterOutOfRange
from .gadgets import GadgetBundle, chain_apply

WITNESS, EXHAUSTED, BUDGET = "witness", "exhausted", "budget-exceeded"


@dataclass
class SearchOutcome:
    verdict: str
    depth: int
    word: tuple | None = None
    stats: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.verdict == WITNESS

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "depth": self.depth,
            "word": list(self.word) if self.word is not None else None,
            "stats": dict(self.stats),
            "certificate": self.certificate,
        }


# ---------------------------------------------------------------------------
# PCP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PcpInstance:
    """Tiles ``(top_i, bottom_i)`` as tuples of letters in 1..m."""

    tiles: tuple
    m: int

    def __post_init__(self):
        if not self.tiles:
            raise ValueError("a PCP instance needs at least one tile")
        for top, bot in self.tiles:
            if not top or not bot:
                raise ValueError("tile words must be nonempty")
            for a in tuple(top) + tuple(bot):
                if not 1 <= a <= self.m:
                    raise LetterOutOfRange(f"letter {a} is not in 1..{self.m}")

    @classmethod
    def from_strings(cls, tiles, alphabet=None) -> "PcpInstance":
        """Tiles as strings; letters numbered by ``alphabet`` (sorted letters by default)."""
        if alphabet is None:
            alphabet = sorted({ch for t in tiles for s in t for ch in s})
        idx = {ch: i + 1 for i, ch in enumerate(alphabet)}
        enc = tuple((tuple(idx[c] for c in a), tuple(idx[c] for c in b)) for a, b in tiles)
        return cls(enc, len(alphabet))

    @property
    def k(self) -> int:
        return len(self.tiles)

    def top(self, word) -> tuple:
        return tuple(itertools.chain.from_iterable(self.tiles[i - 1][0] for i in word))

    def bottom(self, word) -> tuple:
        return tuple(itertools.chain.from_iterable(self.tiles[i - 1][1] for i in word))

    def is_solution(self, word) -> bool:
        return len(word) > 0 and self.top(word) == self.bottom(word)


def _advance(state, tile):
    """New overhang after appending a tile, or None on mismatch.

    ``state = (side, rest)``: side 0 means the top is ahead by ``rest``.
    """
    side, rest = state
    top, bot = tile
    a = rest + top if side == 0 else top
    b = bot if side == 0 else rest + bot
    n = min(len(a), len(b))
    if a[:n] != b[:n]:
        return None
    if len(a) >= len(b):
        return (0, a[n:])
    return (1, b[n:])


def pcp_search(inst: PcpInstance, max_overhang: int = 64, max_depth: int = 12,
               claus: bool = False) -> SearchOutcome:
    """Breadth-first search over overhang configurations."""
    k = inst.k
    start = (0, ())
    first_tiles = [1] if claus else range(1, k + 1)
    frontier = []
    seen = set()
    stats = {"nodes": 0, "dedup": 0, "pruned_overhang": 0, "dead": 0}
    capped = False

    def accept(word, state):
        if state[1] != ():
            return False
        return (word[-1] == k) if claus else True

    for i in first_tiles:
        st = _advance(start, inst.tiles[i - 1])
        stats["nodes"] += 1
        if st is None:
            stats["dead"] += 1
            continue
        word = (i,)
        if accept(word, st):
            return _pcp_witness(inst, word, stats, claus)
        if len(st[1]) > max_overhang:
            stats["pruned_overhang"] += 1
            capped = True
            continue
        if st in seen:
            stats["dedup"] += 1
            continue
        seen.add(st)
        frontier.append((word, st))

    depth = 1
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for word, st in frontier:
            for i in range(1, k + 1):
                new = _advance(st, inst.tiles[i - 1])
                stats["nodes"] += 1
                if new is None:
                    stats["dead"] += 1
                    continue
                w2 = word + (i,)
                if accept(w2, new):
                    return _pcp_witness(inst, w2, stats, claus)
                if len(new[1]) > max_overhang:
                    stats["pruned_overhang"] += 1
                    capped = True
                    continue
                if new in seen:
                    stats["dedup"] += 1
                    continue
                seen.add(new)
                nxt.append((w2, new))
        frontier = nxt
    stats["states"] = len(seen)
    return SearchOutcome(BUDGET if capped else EXHAUSTED, max_depth, None, stats,
                         {"closed": not frontier and not capped})


def _pcp_witness(inst, word, stats, claus):
    top, bot = inst.top(word), inst.bottom(word)
    if top != bot:
        raise AssertionError("PCP witness failed exact re-validation")
    if claus and (word[0] != 1 or word[-1] != inst.k):
        raise AssertionError("witness violates the 1w7 shape")
    return SearchOutcome(WITNESS, len(word), word, stats,
                         {"top": list(top), "bottom": list(bot)})


# ---------------------------------------------------------------------------
# mortality
# ---------------------------------------------------------------------------


def _key(m: CMatrix):
    return (tuple(m.re.flat), tuple(m.im.flat))


def _is_zero(m: CMatrix) -> bool:
    return all(v == 0 for v in m.re.flat) and all(v == 0 for v in m.im.flat)


def mortality_search(mats, max_depth: int = 8) -> SearchOutcome:
    """BFS over products ``M_{i1} ... M_{in}`` with exact-matrix dedup."""
    mats = [m if isinstance(m, CMatrix) else CMatrix.from_rows(m) for m in mats]
    n = mats[0].rows
    if any(m.shape != (n, n) for m in mats):
        raise DimensionMismatch("mortality needs square matrices of one size")
    if any(m.kind != "exact" for m in mats):
        raise ValueError("mortality search needs exact matrices")
    stats = {"nodes": 0, "dedup": 0}
    seen = set()
    frontier = []
    for i, m in enumerate(mats, 1):
        stats["nodes"] += 1
        if _is_zero(m):
            return _mortal_witness(mats, (i,), stats)
        key = _key(m)
        if key in seen:
            stats["dedup"] += 1
            continue
        seen.add(key)
        frontier.append(((i,), m))
    depth = 1
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for word, p in frontier:
            for i, m in enumerate(mats, 1):
                q = p.matmul(m)
                stats["nodes"] += 1
                w2 = word + (i,)
                if _is_zero(q):
                    return _mortal_witness(mats, w2, stats)
                key = _key(q)
                if key in seen:
                    stats["dedup"] += 1
                    continue
                seen.add(key)
                nxt.append((w2, q))
        frontier = nxt
    stats["distinct_products"] = len(seen)
    # an empty frontier means the semigroup is finite and zero-free
    return SearchOutcome(EXHAUSTED, max_depth if not frontier else depth, None, stats,
                         {"closed": not frontier})


def _mortal_witness(mats, word, stats):
    p = mats[word[0] - 1]
    for i in word[1:]:
        p = p.matmul(mats[i - 1])
    if not _is_zero(p):
        raise AssertionError("mortality witness failed exact re-validation")
    return SearchOutcome(WITNESS, len(word), word, stats, {"product": "zero"})


# ---------------------------------------------------------------------------
# fidelity threshold
# ---------------------------------------------------------------------------


def _row_times(vec, m: CMatrix):
    """Row vector times a real matrix."""
    n = m.cols
    out = []
    for j in range(n):
        acc = 0
        for i, v in enumerate(vec):
            if not is_interval(v) and v == 0:
                continue
            t = m.re[i, j]
            if not is_interval(t) and t == 0:
                continue
            acc = acc + v * t
        out.append(acc)
    return out


def _dot(a, b):
    acc = 0
    for u, v in zip(a, b):
        acc = acc + u * v
    return acc


def _is_exact_vec(v):
    return all(not is_interval(x) for x in v)


def _compare(value, lam, strict):
    """``True``/``False`` when certified, ``None`` when the interval straddles."""
    if not is_interval(value):
        return value > lam if strict else value >= lam
    lo, hi = endpoints(value)
    if strict:
        if lo > lam:
            return True
        if hi <= lam:
            return False
        return None
    if lo >= lam:
        return True
    if hi < lam:
        return False
    return None


def full_path_overlap(channels, rho: CMatrix, phi: CMatrix, word, precision: int = DEFAULT_PRECISION):
    """``tr(phi T_{i1}...T_{in}(rho))`` by composing channels on d x d matrices."""
    out = chain_apply(channels, word, rho)
    ctx = interval_context(precision)
    val = fidelity_overlap(phi.to_interval(ctx) if out.kind == "interval" else phi, out)
    return val


def _lam_of(lam):
    return Fraction(lam) if not isinstance(lam, Fraction) else lam


def threshold_search(channels, rho: CMatrix, phi: CMatrix, lam, strict: bool = True,
                     max_depth: int = 5, bundle: GadgetBundle | None = None,
                     precision: int = DEFAULT_PRECISION, max_precision: int = 1024) -> SearchOutcome:
    """Shortest word with ``tr(phi T_w(rho)) > lam`` (or ``>=``), up to ``max_depth``."""
    if bundle is not None:
        if lam is not None and _lam_of(lam) != bundle.lam:
            raise ValueError("threshold differs from the bundle's lambda")
        return _bundle_search(bundle, strict, max_depth, precision, max_precision)
    return _generic_search(list(channels), rho, phi, _lam_of(lam), strict, max_depth, precision, max_precision)


def _bundle_search(b: GadgetBundle, strict, max_depth, precision, max_precision):
    """Block shortcut: the sign of <x|M_w|y> decides, since delta*eps^n > 0."""
    stats = {"nodes": 0, "dedup": 0, "shortcut": True}
    seen = set()
    frontier = [((), tuple(b.x))]
    for depth in range(1, max_depth + 1):
        nxt = []
        for word, f in frontier:
            for i, m in enumerate(b.mats, 1):
                g = tuple(_row_times(f, m))
                stats["nodes"] += 1
                w2 = word + (i,)
                val = _dot(g, b.y)
                if (val > 0) if strict else (val >= 0):
                    cert = _revalidate_bundle(b, w2, val, strict, precision, max_precision)
                    if cert is None:
                        stats["straddled"] = list(w2)
                        return SearchOutcome(BUDGET, depth, None, stats, {})
                    return SearchOutcome(WITNESS, depth, w2, stats, cert)
                if g in seen:
                    stats["dedup"] += 1
                    continue
                seen.add(g)
                nxt.append((w2, g))
        frontier = nxt
        if not frontier:
            break
    return SearchOutcome(EXHAUSTED, max_depth, None, stats, {"closed": not frontier})


def _revalidate_bundle(b, word, block, strict, precision, max_precision):
    """Full-matrix certificate; ``None`` if no precision up to the cap decides."""
    prec = precision
    while prec <= max_precision:
        bb = b if prec == b.precision else _rebuild_at(b, prec)
        ctx = interval_context(prec)
        lhs = full_path_overlap(bb.channels, bb.rho, bb.phi, word, prec)
        rhs_gap = bb.delta * to_interval(bb.eps ** len(word) * block, ctx)
        verdict = _compare(lhs, bb.lam, strict)
        if verdict is True:
            return _cert(word, lhs, rhs_gap + bb.lam, prec, "full-path")
        if not strict and block == 0 and verdict is None:
            # equality: the block formula is exact and the full path must contain lam
            lo, hi = endpoints(lhs)
            if lo <= bb.lam <= hi:
                return _cert(word, lhs, rhs_gap + bb.lam, prec, "exact-equality")
        if verdict is False:
            raise AssertionError("full path contradicts the block formula")
        prec *= 2
    return None


def _rebuild_at(b: GadgetBundle, prec: int) -> GadgetBundle:
    from .gadgets import build_prop1
    return build_prop1(b.lam, b.phi, b.mats, b.x, b.y, precision=prec)


def _cert(word, lhs, rhs, prec, how):
    lo, hi = endpoints(lhs)
    rlo, rhi = endpoints(rhs)
    return {"word": list(word), "full_path": [str(lo), str(hi)], "block": [str(rlo), str(rhi)],
            "precision": prec, "by": how}


def _generic_search(channels, rho, phi, lam, strict, max_depth, precision, max_precision):
    """Transfer-vector path: row vector phi^T T_i1 ... T_in dotted with rho's coordinates."""
    basis = channels[0].basis
    stats = {"nodes": 0, "dedup": 0, "shortcut": False, "straddled": 0}
    prho = basis.coords(rho) if basis.exact else basis.coords(rho.to_interval(basis.ctx) if rho.kind != "interval" else rho)
    pphi = basis.coords(phi) if basis.exact else basis.coords(phi.to_interval(basis.ctx))
    exact = basis.exact and _is_exact_vec(prho) and _is_exact_vec(pphi) and all(
        t.transfer.kind == "exact" for t in channels)
    if not basis.exact:
        ctx = basis.ctx
        prho = [to_interval(v, ctx) for v in prho]
        pphi = [to_interval(v, ctx) for v in pphi]
    seen = set()
    frontier = [((), tuple(pphi))]
    undecided = []
    for depth in range(1, max_depth + 1):
        nxt = []
        for word, f in frontier:
            for i, t in enumerate(channels, 1):
                tr = t.transfer if basis.exact else t.transfer.to_interval(basis.ctx)
                g = tuple(_row_times(f, tr))
                stats["nodes"] += 1
                w2 = word + (i,)
                val = _dot(g, prho)
                v = _compare(val, lam, strict)
                if v is True:
                    cert = _revalidate_generic(channels, rho, phi, lam, w2, strict, precision, max_precision)
                    if cert is not None:
                        return SearchOutcome(WITNESS, depth, w2, stats, cert)
                    v = None
                if v is None:
                    stats["straddled"] += 1
                    undecided.append(w2)
                if exact:
                    if g in seen:
                        stats["dedup"] += 1
                        continue
                    seen.add(g)
                nxt.append((w2, g))
        frontier = nxt
        if undecided:
            # a shorter undecided word blocks a minimal-witness claim at greater depth
            stats["undecided"] = [list(w) for w in undecided[:10]]
            return SearchOutcome(BUDGET, depth, None, stats, {})
        if not frontier:
            break
    return SearchOutcome(EXHAUSTED, max_depth, None, stats, {"closed": not frontier})


def _revalidate_generic(channels, rho, phi, lam, word, strict, precision, max_precision):
    prec = precision
    while prec <= max_precision:
        val = full_path_overlap(channels, rho, phi, word, prec)
        if not is_interval(val):
            ok = val > lam if strict else val >= lam
            return {"word": list(word), "full_path": [str(val), str(val)], "precision": None,
                    "by": "exact"} if ok else None
        if _compare(val, lam, strict) is True:
            lo, hi = endpoints(val)
            return {"word": list(word), "full_path": [str(lo), str(hi)], "precision": prec, "by": "full-path"}
        prec *= 2
        if channels[0].basis.exact:
            break
    return None


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

DEFAULT_CAP = 100_000


def bruteforce_oracle(channels, rho: CMatrix, phi: CMatrix, exact_depth: int,
                      cap: int = DEFAULT_CAP, precision: int = DEFAULT_PRECISION):
    """Every word of length 1..depth with its full-path overlap, in length-lex order."""
    channels = list(channels)
    k = len(channels)
    total = sum(k ** n for n in range(1, exact_depth + 1))
    if total > cap:
        raise CapExceeded(f"{total} words exceed the cap {cap}")
    out = []
    for n in range(1, exact_depth + 1):
        for word in itertools.product(range(1, k + 1), repeat=n):
            out.append((word, full_path_overlap(channels, rho, phi, word, precision)))
    return out


def oracle_verdict(listing, lam, strict: bool = True):
    """First word (length-lex) whose certified overlap clears the threshold."""
    lam = _lam_of(lam)
    for word, val in listing:
        if _compare(val, lam, strict) is True:
            return word
    return None
