"""Principal minors and certified bounds on the smallest eigenvalue.

Two independent routes are provided:

* exact matrices: characteristic polynomial over Q, squarefree part, Sturm
  chain, bisection with exact rational endpoints;
* interval matrices: a float/mpmath approximation of the lowest eigenpair,
  certified from below by an interval Cholesky factorisation of ``H - a*1``
  and from above by a Rayleigh quotient evaluated in interval arithmetic.

``psd_by_elimination`` is a third, deliberately naive check (Schur complement
elimination) used as an oracle in tests.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath
import numpy as np
from mpmath.libmp import to_rational

from ..errors import NotHermitian, PrecisionExhausted
from .cmatrix import CMatrix, Cx, charpoly_coefficients
from .scalars import (
    DEFAULT_PRECISION,
    endpoints,
    interval_context,
    interval_from_bounds,
    parse_rational,
    to_interval,
)

MAX_PRECISION = 2048


def principal_subsets(n: int):
    """Nonempty index subsets ordered by size, then lexicographically."""
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


def principal_minors(x: CMatrix) -> list[Fraction]:
    """All ``2^d - 1`` principal minors of an exact Hermitian matrix."""
    if x.kind != "exact":
        raise TypeError("principal_minors needs exact entries")
    if not x.is_hermitian():
        raise NotHermitian("principal minors are only defined here for Hermitian input")
    out = []
    for s in principal_subsets(x.rows):
        det = x.submatrix(s, s).det()
        out.append(Fraction(det.re))
    return out


def psd_by_minors(x: CMatrix) -> bool:
    return all(m >= 0 for m in principal_minors(x))


def psd_by_elimination(x: CMatrix) -> bool:
    """Exact PSD test by symmetric Gaussian elimination (oracle)."""
    if not x.is_hermitian():
        raise NotHermitian("PSD test needs a Hermitian matrix")
    n = x.rows
    a = [[x.entry(i, j) for j in range(n)] for i in range(n)]
    for k in range(n):
        p = a[k][k].re
        if p < 0:
            return False
        if p == 0:
            if any(not a[k][j].is_zero() for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            if a[i][k].is_zero():
                continue
            f = a[i][k] / p
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - f * a[k][j]
    return True


# ---------------------------------------------------------------------------
# exact route: characteristic polynomial + Sturm sequence
# ---------------------------------------------------------------------------


def real_charpoly(h: CMatrix) -> list[Fraction]:
    """Monic characteristic polynomial of an exact Hermitian matrix, high degree first."""
    coeffs = charpoly_coefficients(h)
    out = []
    for c in coeffs:
        if c.im != 0:
            raise NotHermitian("characteristic polynomial has a non-real coefficient")
        out.append(Fraction(c.re))
    return out


def _trim(p):
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _peval(p, x):
    acc = Fraction(0)
    for c in p:
        acc = acc * x + c
    return acc


def _pderiv(p):
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])] or [Fraction(0)]


def _pdivmod(a, b):
    a = list(a)
    b = _trim(b)
    if len(a) < len(b):
        return [Fraction(0)], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    for i in range(len(q)):
        f = a[i] / b[0]
        q[i] = f
        for j, c in enumerate(b):
            a[i + j] -= f * c
    rem = _trim(a[len(q):] or [Fraction(0)])
    return q, rem


def _is_zero_poly(p):
    return all(c == 0 for c in p)


def _pgcd(a, b):
    a, b = _trim(a), _trim(b)
    while not _is_zero_poly(b):
        _, r = _pdivmod(a, b)
        a, b = b, r
    lead = a[0]
    return [c / lead for c in a]


def squarefree_part(p):
    g = _pgcd(p, _pderiv(p))
    q, _ = _pdivmod(p, g)
    return _trim(q)


def sturm_chain(p):
    chain = [_trim(p), _trim(_pderiv(p))]
    while len(chain[-1]) > 1 or chain[-1][0] != 0:
        _, r = _pdivmod(chain[-2], chain[-1])
        if _is_zero_poly(r):
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(chain, x):
    signs = []
    for q in chain:
        v = _peval(q, x)
        if v != 0:
            signs.append(v > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(chain, a, b) -> int:
    """Number of distinct roots in the half-open interval (a, b]."""
    return _sign_changes(chain, a) - _sign_changes(chain, b)


def gershgorin_bound(h: CMatrix) -> Fraction:
    """Rational bound with every eigenvalue in [-B, B]."""
    best = Fraction(0)
    for i in range(h.rows):
        s = sum(abs(Fraction(h.re[i, j])) + abs(Fraction(h.im[i, j])) for j in range(h.cols))
        best = max(best, s)
    return best


def smallest_root_bracket(h: CMatrix, width) -> tuple[Fraction, Fraction]:
    """Exact rationals ``a <= lambda_min <= b`` with ``b - a <= width``."""
    width = parse_rational(width)
    p = squarefree_part(real_charpoly(h))
    chain = sturm_chain(p)
    bound = gershgorin_bound(h) + 1
    a, b = -bound, bound
    if _peval(p, a) == 0:
        return a, a
    while b - a > width:
        m = (a + b) / 2
        if count_roots(chain, a, m) >= 1:
            if _peval(p, m) == 0 and count_roots(chain, a, m) == 1:
                return m, m
            b = m
        else:
            a = m
    if _peval(p, b) == 0 and count_roots(chain, a, b) == 1:
        return b, b
    return a, b


def negative_eigenvalue_count(h: CMatrix) -> int:
    """Number of distinct negative eigenvalues of an exact Hermitian matrix."""
    p = squarefree_part(real_charpoly(h))
    chain = sturm_chain(p)
    bound = gershgorin_bound(h) + 1
    below_zero = count_roots(chain, -bound, Fraction(0))
    return below_zero - (1 if _peval(p, Fraction(0)) == 0 else 0)


# ---------------------------------------------------------------------------
# interval route
# ---------------------------------------------------------------------------


def _mpf_to_fraction(x) -> Fraction:
    p, q = to_rational(x._mpf_)
    return Fraction(int(p), int(q))


def _approx_lowest_pair(h: CMatrix, prec: int):
    """Approximate (eigenvalue, eigenvector) of the midpoint matrix.

    Starts from LAPACK in double precision and polishes with shifted inverse
    iteration in mpmath at ``prec`` bits.
    """
    a = h.to_numpy()
    a = (a + a.conj().T) / 2
    vals, vecs = np.linalg.eigh(a)
    lam0, v0 = vals[0], vecs[:, 0]
    ctx = mpmath.MPContext()
    ctx.prec = prec
    n = h.rows

    def mid(x):
        from .scalars import is_interval
        if is_interval(x):
            lo, hi = endpoints(x)
            return ctx.mpf(lo.numerator) / lo.denominator / 2 + ctx.mpf(hi.numerator) / hi.denominator / 2
        q = parse_rational(x)
        return ctx.mpf(q.numerator) / q.denominator

    m = ctx.matrix(n, n)
    for i in range(n):
        for j in range(n):
            m[i, j] = ctx.mpc(mid(h.re[i, j]), mid(h.im[i, j]))
    v = ctx.matrix([ctx.mpc(complex(z)) for z in v0])
    lam = ctx.mpf(float(lam0))
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(4):
        shift = lam - ctx.mpf(2) ** (-(prec // 2)) * scale
        try:
            w = ctx.lu_solve(m - shift * ctx.eye(n), v)
        except ZeroDivisionError:
            break
        nrm = ctx.sqrt(sum(abs(z) ** 2 for z in w))
        v = w / nrm
        num = sum((ctx.conj(v[i]) * (m[i, :] * v)[0] for i in range(n)))
        lam = ctx.re(num)
    return lam, v


def _interval_cholesky_pd(h: CMatrix, shift, ctx) -> bool:
    """Certify ``h - shift*1`` positive definite by interval Cholesky."""
    n = h.rows
    s = to_interval(shift, ctx)
    a_re = [[to_interval(h.re[i, j], ctx) for j in range(n)] for i in range(n)]
    a_im = [[to_interval(h.im[i, j], ctx) for j in range(n)] for i in range(n)]
    l_re = [[ctx.mpf(0)] * n for _ in range(n)]
    l_im = [[ctx.mpf(0)] * n for _ in range(n)]
    for j in range(n):
        d = a_re[j][j] - s
        for k in range(j):
            d = d - (l_re[j][k] ** 2 + l_im[j][k] ** 2)
        lo, _ = endpoints(d)
        if lo <= 0:
            return False
        ljj = ctx.sqrt(d)
        l_re[j][j] = ljj
        for i in range(j + 1, n):
            # L_ij = (A_ij - sum_k L_ik conj(L_jk)) / L_jj
            sr, si = a_re[i][j], a_im[i][j]
            for k in range(j):
                sr = sr - (l_re[i][k] * l_re[j][k] + l_im[i][k] * l_im[j][k])
                si = si - (l_im[i][k] * l_re[j][k] - l_re[i][k] * l_im[j][k])
            l_re[i][j] = sr / ljj
            l_im[i][j] = si / ljj
    return True


def _rayleigh_upper(h: CMatrix, v_re, v_im, ctx) -> Fraction:
    n = h.rows
    num = ctx.mpf(0)
    den = ctx.mpf(0)
    vr = [to_interval(x, ctx) for x in v_re]
    vi = [to_interval(x, ctx) for x in v_im]
    hr = [[to_interval(h.re[i, j], ctx) for j in range(n)] for i in range(n)]
    hi = [[to_interval(h.im[i, j], ctx) for j in range(n)] for i in range(n)]
    for i in range(n):
        den = den + vr[i] ** 2 + vi[i] ** 2
        # (H v)_i
        wr = ctx.mpf(0)
        wi = ctx.mpf(0)
        for j in range(n):
            wr = wr + hr[i][j] * vr[j] - hi[i][j] * vi[j]
            wi = wi + hr[i][j] * vi[j] + hi[i][j] * vr[j]
        num = num + vr[i] * wr + vi[i] * wi
    return endpoints(num / den)[1]


def _enclose_interval_route(h: CMatrix, width: Fraction, prec: int):
    ctx = interval_context(prec)
    lam, v = _approx_lowest_pair(h, prec)
    v_re = [_mpf_to_fraction(v[i].real) for i in range(h.rows)]
    v_im = [_mpf_to_fraction(v[i].imag) for i in range(h.rows)]
    ub = _rayleigh_upper(h, v_re, v_im, ctx)
    lam_q = _mpf_to_fraction(lam)
    margin = width / 4
    floor_margin = Fraction(1, 2 ** (prec // 2))
    margin = max(margin, floor_margin) if width > floor_margin else margin
    for _ in range(200):
        lo = min(lam_q, ub) - margin
        if _interval_cholesky_pd(h, lo, ctx):
            return lo, ub
        margin *= 2
        if margin > max(abs(lam_q), Fraction(1)) * 4:
            break
    return None


def min_eigenvalue_interval(h: CMatrix, width=Fraction(1, 10**30), precision: int = DEFAULT_PRECISION,
                            max_precision: int = MAX_PRECISION):
    """Certified interval containing the smallest eigenvalue of a Hermitian matrix.

    Raises :class:`PrecisionExhausted` when the enclosure cannot be brought
    below ``width`` even at ``max_precision`` bits.
    """
    if not h.is_square():
        raise NotHermitian("eigenvalues of a non-square matrix")
    if not h.is_hermitian():
        raise NotHermitian("min_eigenvalue_interval needs a Hermitian matrix")
    width = parse_rational(width)
    kind = h.kind
    prec = precision
    while prec <= max_precision:
        ctx = interval_context(prec)
        if kind == "exact":
            a, b = smallest_root_bracket(h, width)
            out = interval_from_bounds(a, b, ctx)
        else:
            got = _enclose_interval_route(h, width, prec)
            out = interval_from_bounds(*got, ctx) if got is not None else None
        if out is not None:
            lo, hi = endpoints(out)
            if hi - lo <= width:
                return out
        prec *= 2
    raise PrecisionExhausted(f"could not narrow the eigenvalue enclosure below {float(width):.3g}")


def eigen_sign(h: CMatrix, precision: int = DEFAULT_PRECISION, max_precision: int = MAX_PRECISION) -> int:
    """+1 if certified positive semidefinite (PD for intervals), -1 if certified not PSD, 0 if undecided.

    Exact input is decided exactly (zero eigenvalues count as PSD).  Interval
    input can only certify strict positivity or strict negativity.
    """
    if h.kind == "exact":
        return 1 if negative_eigenvalue_count(h) == 0 else -1
    width = Fraction(1, 10**12)
    prec = precision
    while prec <= max_precision:
        got = _enclose_interval_route(h, width, prec)
        if got is not None:
            lo, hi = got
            if lo > 0:
                return 1
            if hi < 0:
                return -1
        width /= 10**12
        prec *= 2
    return 0


def sym_interval(x: Cx, ctx) -> Cx:
    return Cx(to_interval(x.re, ctx), to_interval(x.im, ctx))
