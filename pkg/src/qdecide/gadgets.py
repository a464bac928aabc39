"""Word encodings, the Paterson morphism and the matrix-to-channel lift."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .channels import Channel, fidelity_overlap, is_completely_positive
from .core.basis import HermitianBasis, hermitian_basis
from .core.cmatrix import CMatrix, Cx
from .core.eigen import min_eigenvalue_interval
from .core.perron import PerronPair, perron_pair
from .core.scalars import (
    DEFAULT_PRECISION,
    Surd,
    contains,
    endpoints,
    interval_context,
    parse_rational,
    to_interval,
)
from .errors import (
    DimensionMismatch,
    InfeasibleParameters,
    LetterOutOfRange,
    NuOutOfRange,
    ZeroVector,
)

# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def _check_word(w, m):
    for a in w:
        if not isinstance(a, int) or not 1 <= a <= m:
            raise LetterOutOfRange(f"letter {a!r} is not in 1..{m}")


def sigma(w, m: int) -> int:
    """m-adic value of a word over {1..m}; the empty word maps to 0."""
    _check_word(w, m)
    v = 0
    for a in w:
        v = v * m + a
    return v


def gamma(u, w, m: int) -> CMatrix:
    """Paterson's 3x3 matrix: diag(m^|u|, m^|w|, 1) with bottom row (s(u), s(w), 1)."""
    su, sw = sigma(u, m), sigma(w, m)
    return CMatrix.from_rows([[m ** len(u), 0, 0], [0, m ** len(w), 0], [su, sw, 1]])


GAMMA_X = (1, -1, 0)
GAMMA_Y = (0, 0, 1)


def gamma_square(u, w, m: int):
    """``(gamma (x) gamma, X = x (x) x, Y = y (x) y)``; <Y|G|X> = (s(u) - s(w))^2."""
    g = gamma(u, w, m)
    xx = [a * b for a in GAMMA_X for b in GAMMA_X]
    yy = [a * b for a in GAMMA_Y for b in GAMMA_Y]
    return g.kron(g), xx, yy


def bilinear(left, m: CMatrix, right):
    """``<left| M |right>`` for real vectors (exact entries)."""
    acc = Fraction(0)
    for i, a in enumerate(left):
        if a == 0:
            continue
        for j, b in enumerate(right):
            if b == 0:
                continue
            acc += a * m.re[i, j] * b
    return acc


def word_product(mats, word) -> CMatrix:
    out = None
    for i in word:
        out = mats[i - 1] if out is None else out.matmul(mats[i - 1])
    return out


# ---------------------------------------------------------------------------
# Kraus normalisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KrausNormalized:
    """``M_i' = S_i / sqrt(lam)`` with the exact similarity ``S_i = X^-1 M_i X``."""

    similar: tuple          # exact S_i
    lam: Fraction
    perron: PerronPair
    residual: Fraction      # ||sum M' M'^dagger - 1||_inf, exact

    def matrices(self, precision: int = DEFAULT_PRECISION) -> list[CMatrix]:
        """``M_i'`` as interval matrices (exact when ``lam`` is a rational square)."""
        a, b = math.isqrt(self.lam.numerator), math.isqrt(self.lam.denominator)
        if a * a == self.lam.numerator and b * b == self.lam.denominator:
            return [s.scale(Fraction(b, a)) for s in self.similar]
        ctx = interval_context(precision)
        inv = 1 / to_interval(self.lam, ctx)
        return [s.to_interval(ctx).scale(ctx.sqrt(inv)) for s in self.similar]

    def annihilates(self, word) -> bool:
        """Exact test that the word's product of the normalised family is zero."""
        p = word_product(self.similar, word)
        return all(v == 0 for v in list(p.re.flat) + list(p.im.flat))


def kraus_normalize(mats, precision: int = DEFAULT_PRECISION) -> KrausNormalized:
    pp = perron_pair(mats, precision=precision)
    xinv = pp.x.inverse()
    sims = tuple(xinv.matmul(m).matmul(pp.x) for m in mats)
    lam = pp.lam
    acc = None
    for s in sims:
        t = s.matmul(s.dagger())
        acc = t if acc is None else acc + t
    diff = acc.scale(1 / lam) - CMatrix.identity(acc.rows)
    residual = max(abs(Fraction(v)) for v in list(diff.re.flat) + list(diff.im.flat))
    return KrausNormalized(sims, lam, pp, residual)


# ---------------------------------------------------------------------------
# lifting a real matrix into a channel
# ---------------------------------------------------------------------------


def nu_bounds(d: int):
    return -Surd.sqrt(d - 1), 1 / Surd.sqrt(d - 1)


def lift_transfer(m: CMatrix, nu, eps) -> CMatrix:
    """``[[1, 0], [nu, 0]] (+) eps*M`` as a d^2 x d^2 real matrix."""
    k = m.rows
    n = k + 2

    def entry(i, j):
        if i < 2 and j < 2:
            return {(0, 0): Fraction(1), (1, 0): nu}.get((i, j), Fraction(0))
        if i >= 2 and j >= 2:
            return Fraction(m.re[i - 2, j - 2]) * eps
        return Fraction(0)
    return CMatrix.from_entries(n, n, lambda i, j: Cx(entry(i, j), Fraction(0)))


@dataclass(frozen=True)
class Lift:
    m: CMatrix
    nu: object
    eps_star: object         # certified-feasible epsilon (interval)
    mu: object               # lower bound on lambda_min of the eps = 0 Choi matrix
    delta_norm: object       # Frobenius bound on the perturbation's Choi matrix
    basis: HermitianBasis

    def transfer(self, eps) -> CMatrix:
        return lift_transfer(self.m, self.nu, eps)

    def channel(self, eps) -> Channel:
        return Channel(self.basis.dim, self.basis, self.transfer(eps))


def _check_nu(nu, d):
    lo, hi = nu_bounds(d)
    if not (nu > lo and nu < hi):
        raise NuOutOfRange(f"nu={nu} is outside (-sqrt({d - 1}), 1/sqrt({d - 1}))")


def lift_lemma2(m: CMatrix, nu, psi: CMatrix | None, basis: HermitianBasis) -> Lift:
    """Template ``T_hat(eps)`` and a certified CP bound ``eps*``."""
    d = basis.dim
    if m.shape != (d * d - 2, d * d - 2):
        raise DimensionMismatch(f"M must be {d * d - 2} square for d={d}")
    if isinstance(nu, (int, Fraction)):
        nu = Fraction(nu)
    _check_nu(nu, d)
    ctx = basis.ctx
    base = Channel(d, basis, lift_transfer(CMatrix.zeros(d * d - 2), nu, Fraction(0)))
    c0 = base.choi()
    c0 = c0.to_interval(ctx) if c0.kind != "exact" else c0
    mu_iv = min_eigenvalue_interval(c0, width=Fraction(1, 10**20), precision=basis.precision)
    mu = endpoints(mu_iv)[0]
    if mu <= 0:
        raise InfeasibleParameters("the eps = 0 Choi matrix is not certified positive definite")
    delta = Channel(d, basis, _block_only(m))
    dc = delta.choi()
    if dc.kind != "exact":
        dc = dc.to_interval(ctx)
        fro = ctx.sqrt(dc.frobenius_sq())
        norm = endpoints(fro)[1]
    else:
        fro = to_interval(dc.frobenius_sq(), ctx)
        norm = endpoints(ctx.sqrt(fro))[1]
    eps_star = mu / (2 * max(Fraction(1), norm))
    return Lift(m, nu, eps_star, mu, norm, basis)


def _block_only(m: CMatrix) -> CMatrix:
    k = m.rows
    n = k + 2
    return CMatrix.from_entries(n, n, lambda i, j: Cx(Fraction(m.re[i - 2, j - 2]) if i >= 2 and j >= 2
                                                      else Fraction(0), Fraction(0)))


# ---------------------------------------------------------------------------
# Prop-1 construction
# ---------------------------------------------------------------------------


def choose_nu_c(lam, d: int):
    """Deterministic (nu, c) with (1/d)(1 + nu(1 - dc)/sqrt(d-1)) = lam.

    Returns ``(nu, c, branch)``.  ``nu`` is exact (Fraction or Surd).
    """
    lam = parse_rational(lam)
    if not 0 < lam < 1:
        raise InfeasibleParameters("lambda must lie in (0, 1)")
    t = lam * d - 1
    root = Surd.sqrt(d - 1)
    if t == 0:
        return Fraction(0), Fraction(1, d), "zero"
    if t > 0:
        eta = (1 - t / (d - 1)) / 2
        one_minus_dc = -(d - 1) * (1 - eta)
        nu = -t / (root * (1 - eta))
        branch = "positive"
    else:
        eta0 = Fraction(1, 4)
        s = 1 - eta0
        branch = "negative"
        if abs(t) >= s:
            # the fixed eta0 = 1/4 would put nu outside the admissible interval
            s = (1 + abs(t)) / 2
            branch = "negative-widened"
        one_minus_dc = s
        nu = t * root / s
    c = (1 - one_minus_dc) / d
    return nu, c, branch


def constraint_report(lam, d, nu, c) -> dict:
    """Exact evaluation of the four feasibility constraints."""
    lam = parse_rational(lam)
    root = Surd.sqrt(d - 1)
    lo, hi = nu_bounds(d)
    value = (1 + nu * (1 - d * c) / root) / d
    value = value if not isinstance(value, Surd) else value.to_fraction()
    r = 1 - Fraction(1, d) - (1 - d * c) ** 2 / Fraction(d * d - d)
    return {
        "C1": value == lam,
        "C2": bool(nu > lo and nu < hi),
        "C3": 0 <= c < 1,
        "C4": r > 0,
        "lambda_value": value,
        "r": r,
    }


def _unit_vector_of(phi: CMatrix, ctx):
    """A unit vector |v> (interval entries) with phi = |v><v|."""
    d = phi.rows
    j = next(i for i in range(d) if phi.re[i, i] != 0)
    norm = ctx.sqrt(to_interval(phi.re[j, j], ctx))
    return [Cx(to_interval(phi.re[i, j], ctx) / norm, to_interval(phi.im[i, j], ctx) / norm) for i in range(d)]


def _orthogonal_unit(phi: CMatrix, ctx):
    """First standard basis vector orthogonalised against phi, normalised."""
    d = phi.rows
    comp = CMatrix.identity(d) - phi
    k = next(i for i in range(d) if comp.re[i, i] != 0)
    norm = ctx.sqrt(to_interval(comp.re[k, k], ctx))
    return [Cx(to_interval(comp.re[i, k], ctx) / norm, to_interval(comp.im[i, k], ctx) / norm) for i in range(d)]


def build_psi(phi: CMatrix, c, precision: int = DEFAULT_PRECISION) -> CMatrix:
    """``|psi> = sqrt(c)|phi> + sqrt(1-c)|phi_perp>`` as an interval projector."""
    ctx = interval_context(precision)
    c = parse_rational(c)
    v = _unit_vector_of(phi, ctx)
    w = _orthogonal_unit(phi, ctx)
    a = ctx.sqrt(to_interval(c, ctx))
    b = ctx.sqrt(to_interval(1 - c, ctx))
    psi_vec = [vi * a + wi * b for vi, wi in zip(v, w)]
    d = phi.rows
    return CMatrix.from_entries(d, d, lambda i, j: psi_vec[i] * psi_vec[j].conj())


def _is_rank_one_projector(phi: CMatrix) -> bool:
    if phi.kind != "exact" or not phi.is_hermitian():
        return False
    tr = phi.trace()
    return tr.re == 1 and tr.im == 0 and phi.matmul(phi) == phi


@dataclass
class GadgetBundle:
    d: int
    lam: Fraction
    phi: CMatrix
    mats: list
    x: list
    y: list
    nu: object
    c: Fraction
    branch: str
    psi: CMatrix
    basis: HermitianBasis
    delta1: object
    delta2: Fraction
    eps: Fraction
    lifts: list
    channels: list
    rho: CMatrix
    precision: int
    checks: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.mats)

    @property
    def delta(self):
        return self.delta1 * to_interval(self.delta2, self.basis.ctx)

    @property
    def ctx(self):
        return self.basis.ctx

    def block_value(self, word):
        """Exact ``<x|M_w|y>`` for the word."""
        return bilinear(self.x, word_product(self.mats, word), self.y)


def _certified_pd(m: CMatrix, precision) -> tuple[bool, object]:
    lam = min_eigenvalue_interval(m, width=Fraction(1, 10**30), precision=precision)
    return endpoints(lam)[0] > 0, lam


def build_prop1(lam, phi: CMatrix, mats, x, y, precision: int = DEFAULT_PRECISION) -> GadgetBundle:
    """Channels, state and constants with tr(phi T_w(rho)) = lam + delta eps^n <x|M_w|y>."""
    lam = parse_rational(lam)
    if not _is_rank_one_projector(phi):
        raise ValueError("phi must be an exact rank-one projector")
    d = phi.rows
    mats = [m if isinstance(m, CMatrix) else CMatrix.from_rows(m) for m in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    size = d * d - 2
    if any(m.shape != (size, size) for m in mats):
        raise DimensionMismatch(f"matrices must be {size}x{size} for d={d}")
    if any(not m.is_real() or m.kind != "exact" for m in mats):
        raise ValueError("matrices must be exact and real")
    x = [parse_rational(v) for v in x]
    y = [parse_rational(v) for v in y]
    if len(x) != size or len(y) != size:
        raise DimensionMismatch(f"x and y must have length {size}")
    if all(v == 0 for v in x) or all(v == 0 for v in y):
        raise ZeroVector("x and y must be nonzero")

    nu, c, branch = choose_nu_c(lam, d)
    report = constraint_report(lam, d, nu, c)
    failed = [k for k in ("C1", "C2", "C3", "C4") if not report[k]]
    if failed:
        raise InfeasibleParameters(f"constraints {failed} violated for lambda={lam}, d={d}")

    ctx = interval_context(precision)
    psi = build_psi(phi, c, precision)
    basis = hermitian_basis(d, psi, align=(phi, x), precision=precision)

    # rho = 1/d + delta2 * sum_i y_i H_{i+2}; |sum y_i H_{i+2}| <= |y|_2
    ynorm_sq = sum(v * v for v in y)
    bound = endpoints(ctx.sqrt(to_interval(ynorm_sq, ctx)))[1]
    bound = Fraction(bound).limit_denominator(10**12)
    while bound * bound < ynorm_sq:
        bound += Fraction(1, 10**12)
    delta2 = 1 / (2 * d * bound)
    coords = [Fraction(1, 1) / Surd.sqrt(d), Fraction(0)] + [delta2 * v for v in y]
    rho = basis.from_coords([to_interval(v, ctx) for v in coords])

    lifts = [lift_lemma2(m, nu, psi, basis) for m in mats]
    eps_star = min(lf.eps_star for lf in lifts)
    eps = _simple_below(eps_star / 2)
    channels = [lf.channel(eps) for lf in lifts]

    bundle = GadgetBundle(d, lam, phi, mats, x, y, nu, c, branch, psi, basis, basis.delta1,
                          delta2, eps, lifts, channels, rho, precision)
    bundle.checks = certify_bundle(bundle, report)
    return bundle


def _simple_below(q: Fraction) -> Fraction:
    """A rational in (q/2, q] with a short decimal expansion."""
    if q <= 0:
        raise InfeasibleParameters("no positive epsilon")
    digits = 1
    while True:
        scale = 10 ** digits
        cand = Fraction(int(q * scale), scale)
        if cand > q / 2:
            return cand
        digits += 1


def certify_bundle(b: GadgetBundle, report=None) -> dict:
    """Certify every bundle invariant; returns a dict of verdicts."""
    ctx = b.ctx
    report = report or constraint_report(b.lam, b.d, b.nu, b.c)
    out = {k: report[k] for k in ("C1", "C2", "C3", "C4")}
    cp = [is_completely_positive(t, precision=b.precision) for t in b.channels]
    out["cp"] = all(v.status == "certified-true" for v in cp)
    out["tp"] = all(t.is_trace_preserving() for t in b.channels)
    ok, _ = _certified_pd(b.rho, b.precision)
    out["rho_pd"] = ok
    tr = b.rho.trace()
    out["rho_trace"] = contains(tr.re, 1) and contains(tr.im, 0)
    cval = fidelity_overlap(b.phi.to_interval(ctx), b.psi)
    out["c_matches"] = contains(cval, b.c)
    root = ctx.sqrt(ctx.mpf(b.d - 1))
    nu_iv = to_interval(b.nu, ctx)
    lam_iv = (1 + nu_iv * (1 - b.d * cval) / root) / b.d
    out["lambda_interval"] = contains(lam_iv, b.lam)
    out["delta_positive"] = endpoints(b.delta1)[0] > 0 and b.delta2 > 0 and b.eps > 0
    out["all"] = all(v for k, v in out.items() if isinstance(v, bool))
    return out


@dataclass(frozen=True)
class IdentityCheck:
    word: tuple
    lhs: object
    rhs: object
    diff: object

    @property
    def width(self) -> Fraction:
        lo, hi = endpoints(self.diff)
        return hi - lo

    @property
    def holds(self) -> bool:
        return contains(self.diff, 0)


def chain_apply(channels, word, rho):
    """``T_{i1} ... T_{in}(rho)``: the last letter acts first."""
    state = rho
    for i in reversed(word):
        state = channels[i - 1].apply(state)
    return state


def verify_prop1_identity(b: GadgetBundle, word) -> IdentityCheck:
    """Full channel composition versus the block formula, as certified intervals."""
    word = tuple(word)
    if not word or any(not 1 <= i <= b.k for i in word):
        raise ValueError(f"word must be nonempty over 1..{b.k}")
    ctx = b.ctx
    out = chain_apply(b.channels, word, b.rho)
    lhs = fidelity_overlap(b.phi.to_interval(ctx), out)
    val = b.block_value(word)
    rhs = to_interval(b.lam, ctx) + b.delta * to_interval(b.eps ** len(word) * val, ctx)
    return IdentityCheck(word, lhs, rhs, lhs - rhs)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _iv_json(x, precision):
    lo, hi = endpoints(x)
    return {"lo": str(lo), "hi": str(hi), "precision": precision}


def _exact_json(x):
    if isinstance(x, Surd):
        return str(x)
    return str(Fraction(x))


def bundle_to_json(b: GadgetBundle) -> dict:
    return {
        "kind": "gadget",
        "params": {
            "lambda": str(b.lam),
            "phi": b.phi.to_json(),
            "matrices": [m.to_json() for m in b.mats],
            "x": [str(v) for v in b.x],
            "y": [str(v) for v in b.y],
            "precision": b.precision,
        },
        "derived": {
            "d": b.d,
            "nu": _exact_json(b.nu),
            "c": str(b.c),
            "branch": b.branch,
            "delta1": _iv_json(b.delta1, b.precision),
            "delta2": str(b.delta2),
            "eps": str(b.eps),
            "checks": {k: (v if isinstance(v, bool) else str(v)) for k, v in b.checks.items()},
        },
    }


def bundle_from_json(obj) -> GadgetBundle:
    """Rebuild deterministically from the stored inputs and cross-check the constants."""
    p = obj["params"]
    b = build_prop1(Fraction(p["lambda"]), CMatrix.from_json(p["phi"]),
                    [CMatrix.from_json(m) for m in p["matrices"]], p["x"], p["y"],
                    precision=int(p.get("precision", DEFAULT_PRECISION)))
    der = obj.get("derived")
    if der:
        if der["c"] != str(b.c) or der["eps"] != str(b.eps) or der["delta2"] != str(b.delta2):
            raise ValueError("stored constants disagree with the rebuilt bundle")
    return b
