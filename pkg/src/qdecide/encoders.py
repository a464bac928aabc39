"""Fixed-size encoders: each decision problem becomes a closed semialgebraic formula."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .channels import Channel, is_density, tensor_power
from .core.cmatrix import CMatrix
from .errors import DimensionMismatch, NotHermitian, UnsupportedDomain, UsageError
from .formula.poly import Poly
from .formula.prenex import prenex, with_meta
from .formula.syntax import (
    Domain,
    Formula,
    MatrixVar,
    conj,
    eq,
    exists,
    forall,
    le,
    lt,
    Implies,
)
from .formula.domains import psd_minors

_ZERO = Poly()


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Separability:
    rho: CMatrix
    d: int
    n: int
    terms: int | None = None          # Caratheodory bound, d^(2n) by default


@dataclass(frozen=True)
class Distillability:
    rho: CMatrix                       # on C^d (x) C^d, A first
    d: int
    n: int


@dataclass(frozen=True)
class LhvDistribution:
    p: object                          # array [i, j, k, l] = P(i, j | k, l)
    n: int                             # settings per party
    m: int                             # outcomes per setting


@dataclass(frozen=True)
class StateLhv:
    rho: CMatrix
    d: int
    n: int
    m: int


@dataclass(frozen=True)
class QuantumRepresentation:
    p: object
    n: int
    m: int
    d: int


@dataclass(frozen=True)
class Birkhoff:
    channel: Channel
    n: int
    terms: int | None = None          # d^(4n) by default


@dataclass(frozen=True)
class ZeroError:
    channel: Channel
    n: int
    m: int = 2


@dataclass(frozen=True)
class Additivity:
    channel: Channel
    p: object                          # even int or "inf"
    d2: int                            # dimension d' of the quantified channel


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _entry_atoms(lhs: CMatrix, rhs: CMatrix):
    """Entrywise equality of two matrices with Poly or exact entries."""
    out = []
    for i in range(lhs.rows):
        for j in range(lhs.cols):
            out.append(eq(Poly.lift(lhs.re[i, j]) - Poly.lift(rhs.re[i, j])))
            out.append(eq(Poly.lift(lhs.im[i, j]) - Poly.lift(rhs.im[i, j])))
    return [a for a in out if not (a.poly.is_constant() and a.poly.constant_value() == 0)]


def _trace_re(m: CMatrix):
    return sum((Poly.lift(m.re[i, i]) for i in range(m.rows)), _ZERO)


def _sym(m: CMatrix) -> CMatrix:
    """Lift exact entries to constant polynomials."""
    return m.map(Poly.lift)


def unit_images(t: Channel):
    """``T(E_ab)`` for every matrix unit, exact."""
    d = t.dim
    return [[t.image_of_unit(a, b) for b in range(d)] for a in range(d)]


def apply_symbolic(images, x: CMatrix) -> CMatrix:
    """``T(X) = sum_ab X_ab T(E_ab)`` for a symbolic ``X``."""
    d = len(images)
    out = None
    for a in range(d):
        for b in range(d):
            term = _sym(images[a][b]).scale(x[a, b])
            out = term if out is None else out + term
    return out


def _require_density(rho: CMatrix, what="rho"):
    if not rho.is_hermitian():
        raise NotHermitian(f"{what} is not Hermitian")
    if not is_density(rho):
        raise ValueError(f"{what} is not a density matrix")


def _finish(f: Formula, **meta) -> Formula:
    return with_meta(prenex(f), **meta)


def _povm(prefix, settings, outcomes, d):
    """POVM variables and their completeness equalities."""
    effects = [[MatrixVar(f"{prefix}{k + 1}_{i + 1}", d, d, Domain("psd")) for i in range(outcomes)]
               for k in range(settings)]
    sums = []
    ident = CMatrix.identity(d)
    for row in effects:
        total = None
        for v in row:
            total = v.matrix() if total is None else total + v.matrix()
        sums += _entry_atoms(total, _sym(ident))
    return effects, sums


def _as_distribution(p, n, m):
    arr = np.empty((m, m, n, n), dtype=object)
    src = np.asarray(p, dtype=object)
    if src.shape != (m, m, n, n):
        raise DimensionMismatch(f"P must have shape {(m, m, n, n)} as [i, j, k, l]")
    for idx in itertools.product(range(m), range(m), range(n), range(n)):
        arr[idx] = Fraction(src[idx]) if not isinstance(src[idx], str) else Fraction(src[idx])
    for k, l in itertools.product(range(n), range(n)):
        col = [arr[i, j, k, l] for i in range(m) for j in range(m)]
        if any(v < 0 for v in col) or sum(col) != 1:
            raise ValueError(f"P(.,.|{k + 1},{l + 1}) is not a probability distribution")
    return arr


def strategies(n: int, m: int):
    """Deterministic response functions ``[n] -> [m]`` in lexicographic order."""
    return list(itertools.product(range(m), repeat=n))


def _lambda_constraints(lam: MatrixVar, p_of, n, m):
    """``P(i,j|k,l) = sum_ab Lambda_ab [a(k)=i][b(l)=j]`` plus normalisation."""
    strat = strategies(n, m)
    x = lam.matrix()
    out = [eq(sum((x.re[a, b] for a in range(len(strat)) for b in range(len(strat))), _ZERO) - 1)]
    for i, j, k, l in itertools.product(range(m), range(m), range(n), range(n)):
        total = _ZERO
        for a, sa in enumerate(strat):
            if sa[k] != i:
                continue
            for b, sb in enumerate(strat):
                if sb[l] == j:
                    total = total + x.re[a, b]
        out.append(eq(total - Poly.lift(p_of(i, j, k, l))))
    return out


# ---------------------------------------------------------------------------
# encoders
# ---------------------------------------------------------------------------


def encode_separability(inst: Separability) -> Formula:
    d, n = inst.d, inst.n
    _require_density(inst.rho)
    if inst.rho.shape != (d ** n, d ** n):
        raise DimensionMismatch(f"rho must be {d ** n} square for d={d}, n={n}")
    full = d ** (2 * n)
    terms = inst.terms or full
    if terms < full:
        warnings.warn(f"{terms} < {full} terms: the encoding is only a sufficient condition", stacklevel=2)
    lam = MatrixVar("lam", terms, 1, Domain("simplex"))
    parts = [[MatrixVar(f"rho{i + 1}_{a + 1}", d, d, Domain("density")) for a in range(n)] for i in range(terms)]
    total = None
    for i in range(terms):
        prod = parts[i][0].matrix()
        for v in parts[i][1:]:
            prod = prod.kron(v.matrix())
        term = prod.scale(lam.matrix().re[i, 0])
        total = term if total is None else total + term
    body = conj(_entry_atoms(total, _sym(inst.rho)))
    variables = (lam,) + tuple(v for row in parts for v in row)
    f = Formula((("exists", variables),), body, params=(("rho", inst.rho),))
    return _finish(f, problem="separability", d=d, n=n, terms=terms)


def _regroup_parties(dims_pair, n):
    """Permutation taking A1 B1 ... An Bn to A1 ... An B1 ... Bn."""
    return tuple(2 * i for i in range(n)) + tuple(2 * i + 1 for i in range(n))


def distillability_operator(rho: CMatrix, d: int, n: int) -> CMatrix:
    """``(rho^{(x)n})^{T_1}`` with the A parties grouped first."""
    big = rho
    for _ in range(n - 1):
        big = big.kron(rho)
    if n > 1:
        big = big.permute_subsystems((d,) * (2 * n), _regroup_parties(d, n))
    return big.partial_transpose((d ** n, d ** n), (0,))


def encode_n_distillable(inst: Distillability) -> Formula:
    d, n = inst.d, inst.n
    _require_density(inst.rho)
    if inst.rho.shape != (d * d, d * d):
        raise DimensionMismatch(f"rho must be {d * d} square")
    r = distillability_operator(inst.rho, d, n)
    y = MatrixVar("Y", d ** n, d ** n, Domain.of("rank_at_most", r=2))
    ym = y.matrix()
    vec = [ym[k, l] for k in range(d ** n) for l in range(d ** n)]
    total = _ZERO
    size = len(vec)
    for a in range(size):
        for b in range(size):
            c = r[a, b]
            if c.is_zero():
                continue
            # Re(conj(y_a) c y_b)
            ya, yb = vec[a], vec[b]
            prod_re = ya.re * yb.re + ya.im * yb.im
            prod_im = ya.re * yb.im - ya.im * yb.re
            total = total + prod_re * c.re - prod_im * c.im
    body = lt(total)
    f = Formula((("exists", (y,)),), body, params=(("rho", inst.rho),))
    return _finish(f, problem="n_distillable", d=d, n=n)


def encode_lhv_distribution(inst: LhvDistribution) -> Formula:
    n, m = inst.n, inst.m
    p = _as_distribution(inst.p, n, m)
    s = m ** n
    lam = MatrixVar("Lam", s, s, Domain("nonneg"))
    body = conj(_lambda_constraints(lam, lambda i, j, k, l: p[i, j, k, l], n, m))
    f = Formula((("exists", (lam,)),), body)
    return _finish(f, problem="lhv_distribution", n=n, m=m)


def _born(rho_matrix: CMatrix, q: CMatrix, pm: CMatrix):
    """``tr[rho (Q (x) P)]`` (real part) for symbolic or exact factors."""
    return _trace_re(rho_matrix.matmul(q.kron(pm)))


def encode_state_lhv(inst: StateLhv) -> Formula:
    """``forall Q forall P exists Lambda``: LHV model for all local POVMs."""
    d, n, m = inst.d, inst.n, inst.m
    _require_density(inst.rho)
    if inst.rho.shape != (d * d, d * d):
        raise DimensionMismatch(f"rho must be {d * d} square")
    qa, sums_a = _povm("Q", n, m, d)
    pb, sums_b = _povm("P", n, m, d)
    s = m ** n
    lam = MatrixVar("Lam", s, s, Domain("nonneg"))
    rho = _sym(inst.rho)

    def p_of(i, j, k, l):
        return _born(rho, qa[k][i].matrix(), pb[l][j].matrix())
    inner = exists((lam,), conj(_lambda_constraints(lam, p_of, n, m)))
    povms = tuple(v for row in qa for v in row) + tuple(v for row in pb for v in row)
    node = forall(povms, Implies(conj(sums_a, sums_b), inner))
    f = Formula((), node, params=(("rho", inst.rho),))
    return _finish(f, problem="state_lhv", d=d, n=n, m=m)


def encode_quantum_representation(inst: QuantumRepresentation) -> Formula:
    d, n, m = inst.d, inst.n, inst.m
    p = _as_distribution(inst.p, n, m)
    rho = MatrixVar("rho", d * d, d * d, Domain("density"))
    qa, sums_a = _povm("Q", n, m, d)
    pb, sums_b = _povm("P", n, m, d)
    rm = rho.matrix()
    born = []
    for i, j, k, l in itertools.product(range(m), range(m), range(n), range(n)):
        born.append(eq(_born(rm, qa[k][i].matrix(), pb[l][j].matrix()) - p[i, j, k, l]))
    variables = (rho,) + tuple(v for row in qa for v in row) + tuple(v for row in pb for v in row)
    f = Formula((("exists", variables),), conj(sums_a, sums_b, born))
    return _finish(f, problem="quantum_representation", d=d, n=n, m=m)


def encode_birkhoff(inst: Birkhoff) -> Formula:
    """``T^{(x)n} = sum_i lam_i U_i . U_i^dagger``, compared on matrix units."""
    t = inst.channel
    t.require_unital()
    n = inst.n
    big = tensor_power(t, n) if n > 1 else t
    D = t.dim ** n
    full = t.dim ** (4 * n)
    terms = inst.terms or full
    if terms < full:
        warnings.warn(f"{terms} < {full} terms: the encoding is only a sufficient condition", stacklevel=2)
    lam = MatrixVar("lam", terms, 1, Domain("simplex"))
    us = [MatrixVar(f"U{i + 1}", D, D, Domain("unitary")) for i in range(terms)]
    out = []
    for a in range(D):
        for b in range(D):
            target = big.image_of_unit(a, b)
            total = None
            for i, u in enumerate(us):
                um = u.matrix()
                # U E_ab U^dagger = column a of U times conj of column b
                col_a = um.submatrix(range(D), [a])
                col_b = um.submatrix(range(D), [b])
                term = col_a.matmul(col_b.dagger()).scale(lam.matrix().re[i, 0])
                total = term if total is None else total + term
            out += _entry_atoms(total, _sym(target))
    f = Formula((("exists", (lam,) + tuple(us)),), conj(out), params=(("transfer", t.transfer),))
    return _finish(f, problem="birkhoff", d=t.dim, n=n, terms=terms)


def encode_zero_error(inst: ZeroError) -> Formula:
    t, n, m = inst.channel, inst.n, inst.m
    big = tensor_power(t, n) if n > 1 else t
    D = t.dim ** n
    images = unit_images(big)
    rhos = [MatrixVar(f"rho{i + 1}", D, D, Domain("density")) for i in range(m)]
    outs = [apply_symbolic(images, v.matrix()) for v in rhos]
    atoms = []
    for i in range(m):
        for j in range(i + 1, m):
            atoms.append(eq(Poly.lift(outs[i].trace_product(outs[j]).re)))
    f = Formula((("exists", tuple(rhos)),), conj(atoms), params=(("transfer", t.transfer),))
    return _finish(f, problem="zero_error", d=t.dim, n=n, m=m)


def _norm_defs(nu: MatrixVar, x: CMatrix, p):
    """Constraints pinning ``nu`` to ``||x||_p`` for a PSD symbolic ``x``."""
    v = Poly.lift(nu.matrix().re[0, 0])
    if p == "inf":
        gap = CMatrix.identity(x.rows).map(lambda e: Poly.lift(e) * v) - x
        return conj(psd_minors(gap), eq(Poly.lift(gap.det().re)))
    power = x
    for _ in range(p - 1):
        power = power.matmul(x)
    return conj(eq(v ** p - _trace_re(power)))


def _check_p(p):
    if p == "inf":
        return p
    if not isinstance(p, int) or p < 2 or p % 2:
        raise UnsupportedDomain(f"p must be an even integer >= 2 or 'inf', got {p!r}")
    return p


def choi_apply_symbolic(c: CMatrix, x: CMatrix, d: int) -> CMatrix:
    """``T'(X)`` for a symbolic Choi matrix on (out (x) in): ``T'(E_ce)[o,o'] = d C[(o,c),(o',e)]``."""
    out = None
    for cc in range(d):
        for e in range(d):
            img = CMatrix.from_entries(d, d, lambda o, o2: c[o * d + cc, o2 * d + e] * d)
            term = img.scale(x[cc, e])
            out = term if out is None else out + term
    return out


def encode_additivity(inst: Additivity) -> Formula:
    """``exists rho1 forall T' exists rho2 forall rho12``: multiplicativity of the output p-norm."""
    p = _check_p(inst.p)
    t, d2 = inst.channel, inst.d2
    d = t.dim
    images = unit_images(t)
    rho1 = MatrixVar("rho1", d, d, Domain("density"))
    nu1 = MatrixVar("nu1", 1, 1, Domain("nonneg"))
    choi = MatrixVar("C", d2 * d2, d2 * d2, Domain.of("channel_choi", din=d2, dout=d2))
    rho2 = MatrixVar("rho2", d2, d2, Domain("density"))
    nu2 = MatrixVar("nu2", 1, 1, Domain("nonneg"))
    rho12 = MatrixVar("rho12", d * d2, d * d2, Domain("density"))

    out1 = apply_symbolic(images, rho1.matrix())
    cm = choi.hermitian_view()
    out2 = choi_apply_symbolic(cm, rho2.matrix(), d2)
    # (T (x) T')(rho12) = sum rho12[(a,c),(b,e)] T(E_ab) (x) T'(E_ce)
    r12 = rho12.matrix()
    joint = None
    for a, b in itertools.product(range(d), repeat=2):
        ta = _sym(images[a][b])
        for c, e in itertools.product(range(d2), repeat=2):
            unit = CMatrix.unit(c, e, d2).map(Poly.lift)
            tb = choi_apply_symbolic(cm, unit, d2)
            term = ta.kron(tb).scale(r12[a * d2 + c, b * d2 + e])
            joint = term if joint is None else joint + term
    v1 = Poly.lift(nu1.matrix().re[0, 0])
    v2 = Poly.lift(nu2.matrix().re[0, 0])
    if p == "inf":
        bound = CMatrix.identity(d * d2).map(lambda e: Poly.lift(e) * v1 * v2) - joint
        claim = conj(psd_minors(bound))
    else:
        power = joint
        for _ in range(p - 1):
            power = power.matmul(joint)
        claim = le(_trace_re(power), (v1 * v2) ** p)
    node = exists((rho1, nu1), conj(
        _norm_defs(nu1, out1, p),
        forall((choi,), exists((rho2, nu2), conj(
            _norm_defs(nu2, out2, p),
            forall((rho12,), claim))))))
    f = Formula((), node, params=(("transfer", t.transfer),))
    return _finish(f, problem="additivity", d=d, d2=d2, p=str(p))


ENCODERS = {
    "separability": (Separability, encode_separability),
    "n_distillable": (Distillability, encode_n_distillable),
    "lhv_distribution": (LhvDistribution, encode_lhv_distribution),
    "state_lhv": (StateLhv, encode_state_lhv),
    "quantum_representation": (QuantumRepresentation, encode_quantum_representation),
    "birkhoff": (Birkhoff, encode_birkhoff),
    "zero_error": (ZeroError, encode_zero_error),
    "additivity": (Additivity, encode_additivity),
}

SWEEPABLE = ("n_distillable", "birkhoff", "zero_error")


def encode(inst) -> Formula:
    for cls, fn in ENCODERS.values():
        if isinstance(inst, cls):
            return fn(inst)
    raise TypeError(f"no encoder for {type(inst).__name__}")


def problem_name(inst) -> str:
    for name, (cls, _) in ENCODERS.items():
        if isinstance(inst, cls):
            return name
    raise TypeError(f"no encoder for {type(inst).__name__}")


@dataclass
class SweepRow:
    n: int
    status: str                 # "witness", "approximate", "unknown" or "exported"
    residual: float | None = None
    path: str | None = None
    stats: dict | None = None


def sweep(inst, n_max: int, backend: str = "numeric", budget=None, seed: int = 0, out_dir=None):
    """Run the fixed-n encoder for n = 1..n_max; never reports a negative answer."""
    from .formula.prenex import formula_stats
    from .formula.smt import export_smt
    from .formula.witness import numeric_search
    name = problem_name(inst)
    if name not in SWEEPABLE:
        raise UsageError(f"{name} has no integer size parameter to sweep")
    if backend not in ("numeric", "export"):
        raise UsageError(f"unknown backend {backend!r}")
    rows = []
    for n in range(1, n_max + 1):
        f = encode(replace(inst, n=n))
        stats = formula_stats(f).as_dict()
        if backend == "export":
            path = None
            if out_dir is not None:
                import os
                path = os.path.join(out_dir, f"{name}_n{n}.smt2")
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(export_smt(f))
            rows.append(SweepRow(n, "exported", None, path, stats))
            continue
        res = numeric_search(f, budget=budget, seed=seed)
        rows.append(SweepRow(n, res.status, res.residual, None, stats))
    return rows
