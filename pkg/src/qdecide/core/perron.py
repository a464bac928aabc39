"""Positive-definite Perron direction of ``Y -> sum_i M_i Y M_i^dagger``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from mpmath.libmp import to_rational

from ..errors import DimensionMismatch, NoPositiveEigenvector, PrecisionExhausted
from .cmatrix import CMatrix, Cx
from .scalars import DEFAULT_PRECISION

RESIDUAL_TOL = Fraction(1, 10**30)
MAX_ITER = 100_000


@dataclass(frozen=True)
class PerronPair:
    lam: Fraction            # dyadic rational approximation of the eigenvalue
    x: CMatrix               # exact (dyadic) Hermitian X with tr X^2 = 1 up to rounding
    residual: float          # ||sum M X^2 M^+ - lam X^2||_inf, evaluated exactly
    iterations: int


def _q(v) -> Fraction:
    p, q = to_rational(v._mpf_)
    return Fraction(int(p), int(q))


def _apply(ctx, ms, y):
    out = ctx.zeros(y.rows, y.cols)
    for m in ms:
        out += m * y * m.H
    return out


def _max_abs(ctx, a):
    return max((abs(a[i, j]) for i in range(a.rows) for j in range(a.cols)), default=ctx.mpf(0))


def perron_pair(maps, precision: int = DEFAULT_PRECISION, tol=RESIDUAL_TOL,
                max_iter: int = MAX_ITER) -> PerronPair:
    """Find ``lam > 0`` and ``X > 0`` with ``sum_i M_i X^2 M_i^dagger = lam X^2``.

    Shifted power iteration from the identity, polished by inverse iteration.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("perron_pair needs at least one matrix")
    d = maps[0].rows
    if any(m.shape != (d, d) for m in maps):
        raise DimensionMismatch("all matrices must be square of the same size")

    # spectral radius of the superoperator, in double precision
    sup = sum(np.kron(m.to_numpy(), m.to_numpy().conj()) for m in maps)
    rho = float(max(abs(np.linalg.eigvals(sup))))
    scale = max(1.0, float(np.max(np.abs(sup))))
    if rho <= 1e-12 * scale:
        raise NoPositiveEigenvector("the map is nilpotent (spectral radius 0)", spectral_radius=rho)

    ctx = mpmath.MPContext()
    ctx.prec = precision
    ms = []
    for m in maps:
        a = ctx.matrix(d, d)
        for i in range(d):
            for j in range(d):
                z = m.entry(i, j)
                re, im = Fraction(z.re), Fraction(z.im)
                a[i, j] = ctx.mpc(ctx.mpf(re.numerator) / re.denominator, ctx.mpf(im.numerator) / im.denominator)
        ms.append(a)

    tol_mp = ctx.mpf(tol.numerator) / tol.denominator
    shift = ctx.mpf(rho)
    y = ctx.eye(d) / d
    lam = ctx.mpf(0)
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        fy = _apply(ctx, ms, y)
        lam = ctx.re(sum(fy[i, i] for i in range(d))) / ctx.re(sum(y[i, i] for i in range(d)))
        res = _max_abs(ctx, fy - lam * y)
        if res <= tol_mp * max(1, lam):
            converged = True
            break
        z = fy + shift * y
        y = z / ctx.re(sum(z[i, i] for i in range(d)))
        # after a warm-up switch to inverse iteration on the vectorised map
        if it == 200:
            y, lam, converged = _inverse_polish(ctx, ms, y, lam, tol_mp)
            if converged:
                break

    if not converged:
        raise PrecisionExhausted(f"Perron iteration did not reach residual {float(tol):.1e}")
    if lam <= tol_mp:
        raise NoPositiveEigenvector("the Perron eigenvalue vanishes", spectral_radius=float(lam))

    y = (y + y.H) / 2
    evals, evecs = ctx.eighe(y)
    if min(evals) <= ctx.mpf(2) ** (-(precision // 4)) * max(evals):
        raise NoPositiveEigenvector("the Perron eigenvector is singular; the map is reducible",
                                    spectral_radius=float(lam))
    sq = ctx.diag([ctx.sqrt(e) for e in evals])
    x = evecs * sq * evecs.H
    # normalise tr X^2 = 1
    t = ctx.re(sum((x * x)[i, i] for i in range(d)))
    x = x / ctx.sqrt(t)
    x = (x + x.H) / 2
    xq = CMatrix.from_entries(d, d, lambda i, j: Cx(_q(ctx.re(x[i, j])), _q(ctx.im(x[i, j]))))
    lam_q = _q(lam)
    x2 = xq.matmul(xq)
    lhs = None
    for m in maps:
        term = m.matmul(x2).matmul(m.dagger())
        lhs = term if lhs is None else lhs + term
    diff = lhs - x2.scale(lam_q)
    residual = max(float(abs(Fraction(v))) for v in list(diff.re.flat) + list(diff.im.flat))
    return PerronPair(lam_q, xq, residual, it)


def _inverse_polish(ctx, ms, y, lam, tol_mp):
    d = y.rows
    n = d * d
    s = ctx.matrix(n, n)
    for m in ms:
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    for e in range(d):
                        # vec(M Y M^+)_{(a,b)} = sum_{c,e} M_ac conj(M_be) Y_ce
                        s[a * d + b, c * d + e] += m[a, c] * ctx.conj(m[b, e])
    v = ctx.matrix([y[i // d, i % d] for i in range(n)])
    for _ in range(30):
        shift = lam + ctx.mpf(2) ** (-(ctx.prec // 2)) * max(1, abs(lam))
        try:
            w = ctx.lu_solve(s - shift * ctx.eye(n), v)
        except ZeroDivisionError:
            break
        tr = sum(w[i * d + i] for i in range(d))
        if abs(tr) == 0:
            break
        v = w / tr
        yy = ctx.matrix(d, d)
        for i in range(n):
            yy[i // d, i % d] = v[i]
        fy = _apply(ctx, ms, yy)
        new_lam = ctx.re(sum(fy[i, i] for i in range(d)) / sum(yy[i, i] for i in range(d)))
        res = _max_abs(ctx, fy - new_lam * yy)
        y, lam = yy, new_lam
        if res <= tol_mp * max(1, lam):
            return y, lam, True
    return y, lam, False
