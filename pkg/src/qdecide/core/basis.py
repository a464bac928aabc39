"""Orthonormal Hermitian operator bases.

Everything is expressed in coordinates with respect to a fixed exact
generalized Gell-Mann basis ``G``.  The basis returned by
:func:`hermitian_basis` is exact (entries are :class:`Surd`) when no anchor is
given or the anchor is a computational-basis projector; otherwise the
anchored/aligned basis is produced in certified interval arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import DegenerateAlignment, DimensionMismatch, NotHermitian, ZeroVector
from .cmatrix import CMatrix, Cx
from .scalars import (
    DEFAULT_PRECISION,
    Surd,
    endpoints,
    interval_context,
    is_interval,
    parse_rational,
    to_interval,
)


def _gellmann(d: int, special: int) -> list[CMatrix]:
    """Generalized Gell-Mann basis with Surd entries.

    Order: identity/sqrt(d); the diagonal element (1 - d E_ss)/sqrt(d^2-d);
    the remaining diagonal elements; symmetric then antisymmetric pairs.
    """
    order = [i for i in range(d) if i != special] + [special]

    def diag(level):
        vals = [Fraction(0)] * d
        for k in range(level):
            vals[order[k]] = Fraction(1)
        vals[order[level]] = Fraction(-level)
        s = Surd(1, Fraction(1, level * (level + 1)))
        return CMatrix.from_entries(d, d, lambda i, j: Cx(s * vals[i], Surd(0)) if i == j else Cx(Surd(0), Surd(0)))

    zero = Surd(0)
    out = [CMatrix.from_entries(d, d, lambda i, j: Cx(Surd(1, Fraction(1, d)) if i == j else zero, zero))]
    out.append(diag(d - 1))
    out.extend(diag(level) for level in range(1, d - 1))
    half = Surd(1, Fraction(1, 2))
    for a in range(d):
        for b in range(a + 1, d):
            out.append(CMatrix.from_entries(
                d, d, lambda i, j, a=a, b=b: Cx(half if (i, j) in ((a, b), (b, a)) else zero, zero)))
    for a in range(d):
        for b in range(a + 1, d):
            def anti(i, j, a=a, b=b):
                if (i, j) == (a, b):
                    return Cx(zero, -half)
                if (i, j) == (b, a):
                    return Cx(zero, half)
                return Cx(zero, zero)
            out.append(CMatrix.from_entries(d, d, anti))
    return out


def _real_trace_product(a: CMatrix, b: CMatrix):
    return a.trace_product(b).re


@dataclass(frozen=True)
class HermitianBasis:
    """Ordered orthonormal Hermitian basis ``H_1..H_{d^2}`` with ``H_1 = 1/sqrt(d)``."""

    dim: int
    matrices: tuple
    psi: CMatrix | None = None
    delta1: object = None
    exact: bool = True
    precision: int = DEFAULT_PRECISION
    # coordinates of each H_i in the Gell-Mann frame (interval mode only)
    frame: tuple = field(default=(), repr=False, compare=False)

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, i) -> CMatrix:
        return self.matrices[i]

    @property
    def ctx(self):
        return interval_context(self.precision)

    def coords(self, a: CMatrix) -> list:
        """``[tr(H_i A)]`` -- real for Hermitian ``A``."""
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected a {self.dim}x{self.dim} operator")
        if not self.exact:
            a = a.to_interval(self.ctx)
        return [_real_trace_product(h, a) for h in self.matrices]

    def complex_coords(self, a: CMatrix) -> list[Cx]:
        if not self.exact:
            a = a.to_interval(self.ctx)
        return [h.trace_product(a) for h in self.matrices]

    def from_coords(self, c) -> CMatrix:
        if len(c) != len(self.matrices):
            raise DimensionMismatch("coordinate vector has the wrong length")
        out = None
        for ci, h in zip(c, self.matrices):
            if not self.exact:
                ci = ci if isinstance(ci, Cx) else to_interval(ci, self.ctx)
            term = h.scale(ci)
            out = term if out is None else out + term
        return out

    def gram(self):
        return [[_real_trace_product(a, b) for b in self.matrices] for a in self.matrices]


def _standard_index(psi: CMatrix):
    """Index ``e`` if ``psi`` is exactly the projector ``|e><e|``, else None."""
    if psi.kind not in ("exact", "surd"):
        return None
    d = psi.rows
    for e in range(d):
        if all(psi.entry(i, j) == (Cx(Fraction(1), Fraction(0)) if i == j == e else Cx(Fraction(0), Fraction(0)))
               for i in range(d) for j in range(d)):
            return e
    return None


def _check_projector_shape(p: CMatrix, d: int, name: str):
    if p.shape != (d, d):
        raise DimensionMismatch(f"{name} must be {d}x{d}")
    if not p.is_hermitian():
        raise NotHermitian(f"{name} must be Hermitian")


def hermitian_basis(d: int, psi: CMatrix | None = None, align=None,
                    precision: int = DEFAULT_PRECISION) -> HermitianBasis:
    """Orthonormal Hermitian basis, optionally anchored at ``psi`` and aligned.

    ``align = (phi, x)`` requests ``tr(phi H_{i+2}) = delta1 * x_i`` for all
    ``i``; the positive ``delta1 = sqrt(r)/|x|`` is returned on the basis.
    """
    if d < 2:
        raise ValueError("hermitian_basis needs d >= 2")
    if psi is not None:
        _check_projector_shape(psi, d, "psi")
    if align is not None and psi is None:
        raise ValueError("alignment requires an anchor psi")

    special = d - 1 if psi is None else _standard_index(psi)
    if align is None and special is not None:
        return HermitianBasis(d, tuple(_gellmann(d, special)), psi=psi, exact=True, precision=precision)
    return _interval_basis(d, psi, align, precision)


def _vec_dot(a, b):
    acc = 0
    for x, y in zip(a, b):
        acc = acc + x * y
    return acc


def _mid(x) -> float:
    lo, hi = endpoints(x)
    return float((lo + hi) / 2)


def _interval_basis(d, psi, align, precision):
    ctx = interval_context(precision)
    gm = _gellmann(d, d - 1)
    gm_iv = [g.to_interval(ctx) for g in gm]
    n = d * d

    def coords(a: CMatrix):
        a = a.to_interval(ctx)
        return [_real_trace_product(g, a) for g in gm_iv]

    one = ctx.mpf(1)
    zero = ctx.mpf(0)
    h1 = [one] + [zero] * (n - 1)
    psi_c = coords(psi)
    # H_2 = (1 - d psi)/sqrt(d^2 - d); coordinates of 1 are sqrt(d) e_1
    s = ctx.sqrt(ctx.mpf(d * d - d))
    h2 = [(-ctx.mpf(d) * c) / s for c in psi_c]
    h2[0] = (ctx.sqrt(ctx.mpf(d)) - ctx.mpf(d) * psi_c[0]) / s

    # pivoted Gram-Schmidt over the Gell-Mann axes 2..n
    chosen = [h1, h2]
    candidates = []
    for k in range(1, n):
        v = [zero] * n
        v[k] = one
        candidates.append(v)
    rest = []
    while len(rest) < n - 2:
        best = None
        for v in candidates:
            w = list(v)
            for q in chosen + rest:
                p = _vec_dot(q, w)
                w = [wi - p * qi for wi, qi in zip(w, q)]
            nrm = _mid(_vec_dot(w, w))
            if best is None or nrm > best[0]:
                best = (nrm, w, v)
        _, w, v = best
        candidates.remove(v)
        nrm = ctx.sqrt(_vec_dot(w, w))
        rest.append([wi / nrm for wi in w])

    delta1 = None
    if align is not None:
        phi, x = align
        _check_projector_shape(phi, d, "phi")
        x = [parse_rational(xi) if not is_interval(xi) else xi for xi in x]
        if len(x) != n - 2:
            raise DimensionMismatch(f"alignment vector must have length {n - 2}")
        if all((not is_interval(xi)) and xi == 0 for xi in x):
            raise ZeroVector("alignment vector x is zero")
        tr_psi_phi = psi.trace_product(phi).re if psi.kind == phi.kind == "exact" else None
        if tr_psi_phi is not None:
            r_exact = Fraction(1) - Fraction(1, d) - (1 - d * tr_psi_phi) ** 2 / Fraction(d * d - d)
            if r_exact == 0:
                raise DegenerateAlignment("phi lies in span(1, psi); residual r = 0")
        phi_c = coords(phi)
        # component of phi orthogonal to span(H_1, H_2), in the rest frame
        u = [_vec_dot(q, phi_c) for q in rest]
        r = _vec_dot(u, u)
        if endpoints(r)[1] <= 0 or (tr_psi_phi is None and endpoints(r)[0] <= 0):
            raise DegenerateAlignment("phi lies (numerically) in span(1, psi); residual r is not positive")
        sr = ctx.sqrt(r)
        u = [ui / sr for ui in u]
        xi_iv = [to_interval(xi, ctx) for xi in x]
        xn = ctx.sqrt(_vec_dot(xi_iv, xi_iv))
        xh = [xi / xn for xi in xi_iv]
        delta1 = sr / xn
        # orthogonal Q with Q xh = u; K_i = sum_j Q_ji rest_j
        wm = [a - b for a, b in zip(xh, u)]
        wp = [a + b for a, b in zip(xh, u)]
        if _mid(_vec_dot(wm, wm)) >= _mid(_vec_dot(wp, wp)):
            w, sign = wm, one
        else:
            w, sign = wp, -one
        ww = _vec_dot(w, w)
        m = n - 2
        q = [[sign * ((one if i == j else zero) - 2 * w[i] * w[j] / ww) for j in range(m)] for i in range(m)]
        rest = [[sum((q[j][i] * rest[j][k] for j in range(m)), zero) for k in range(n)] for i in range(m)]

    frame = [h1, h2] + rest
    mats = []
    for c in frame:
        acc = None
        for ck, g in zip(c, gm_iv):
            term = g.scale(ck)
            acc = term if acc is None else acc + term
        mats.append(acc)
    return HermitianBasis(d, tuple(mats), psi=psi, delta1=delta1, exact=False,
                          precision=precision, frame=tuple(tuple(c) for c in frame))
