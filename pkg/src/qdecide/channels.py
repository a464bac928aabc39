"""Quantum channels as transfer matrices in an orthonormal Hermitian basis."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core.basis import HermitianBasis, hermitian_basis
from .core.cmatrix import CMatrix, Cx
from .core.eigen import min_eigenvalue_interval, negative_eigenvalue_count
from .core.scalars import DEFAULT_PRECISION, NotClosed, Surd, endpoints, interval_context, is_interval, to_interval
from .errors import BadGrouping, DimensionMismatch, NotHermitian, NotUnital


def _exactify(m: CMatrix) -> CMatrix:
    """Demote rational-valued Surd entries to Fractions."""
    def f(x):
        if isinstance(x, Surd) and x.is_rational:
            return x.coef
        return x
    return m.map(f)


def _is_exact_zero(x) -> bool:
    return (not is_interval(x)) and x == 0


def _contains_zero(x) -> bool:
    if is_interval(x):
        lo, hi = endpoints(x)
        return lo <= 0 <= hi
    return x == 0


@dataclass(frozen=True)
class Channel:
    """Linear map on d x d matrices, ``T_hat[i, j] = tr(H_i T(H_j))``."""

    dim: int
    basis: HermitianBasis
    transfer: CMatrix

    def __post_init__(self):
        n = self.dim * self.dim
        if self.transfer.shape != (n, n):
            raise DimensionMismatch(f"transfer matrix must be {n}x{n}")
        if self.basis.dim != self.dim:
            raise DimensionMismatch("basis dimension differs from channel dimension")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_map(cls, fn, d: int, basis: HermitianBasis | None = None) -> "Channel":
        basis = basis or hermitian_basis(d)
        images = [fn(h) for h in basis.matrices]
        cols = [basis.coords(img) for img in images]
        n = d * d
        t = CMatrix.from_entries(n, n, lambda i, j: Cx(cols[j][i], Fraction(0)))
        return cls(d, basis, t)

    @classmethod
    def from_kraus(cls, kraus, basis: HermitianBasis | None = None) -> "Channel":
        kraus = list(kraus)
        d = kraus[0].cols
        if any(k.shape != (d, d) for k in kraus):
            raise DimensionMismatch("Kraus operators must all be d x d")

        def fn(x):
            out = None
            for k in kraus:
                term = k.matmul(x).matmul(k.dagger())
                out = term if out is None else out + term
            return out
        return cls.from_map(fn, d, basis)

    @classmethod
    def identity(cls, d: int, basis=None) -> "Channel":
        basis = basis or hermitian_basis(d)
        n = d * d
        return cls(d, basis, CMatrix.identity(n))

    @classmethod
    def depolarizing(cls, d: int, basis=None) -> "Channel":
        """``X -> tr(X) 1/d``."""
        basis = basis or hermitian_basis(d)
        n = d * d
        t = CMatrix.from_entries(n, n, lambda i, j: Fraction(int(i == j == 0)))
        return cls(d, basis, t)

    @classmethod
    def unitary(cls, u: CMatrix, basis=None) -> "Channel":
        return cls.from_kraus([u], basis)

    @classmethod
    def transposition(cls, d: int, basis=None) -> "Channel":
        return cls.from_map(lambda x: x.transpose(), d, basis)

    # -- representations --------------------------------------------------

    def apply(self, rho: CMatrix) -> CMatrix:
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected a {self.dim}x{self.dim} input")
        if self.basis.exact:
            try:
                return _exactify(self._apply(rho, None))
            except NotClosed:
                # mixed radicals (e.g. sqrt(2) + sqrt(3)): redo with intervals
                pass
        return self._apply(rho, self.basis.ctx)

    def _apply(self, rho, ctx):
        """Transfer-matrix action; ``ctx`` forces interval arithmetic."""
        hs = self.basis.matrices
        if ctx is None:
            c = self.basis.complex_coords(rho)
        else:
            r = rho.to_interval(ctx)
            hs = [h.to_interval(ctx) for h in hs]
            c = [h.trace_product(r) for h in hs]
        n = self.dim * self.dim
        zero = Fraction(0) if ctx is None else ctx.mpf(0)
        coords = []
        for i in range(n):
            acc = Cx(zero, zero)
            for j in range(n):
                t = self.transfer.re[i, j]
                if _is_exact_zero(t):
                    continue
                if ctx is not None and not is_interval(t):
                    t = to_interval(t, ctx)
                acc = acc + c[j] * t
            coords.append(acc)
        if ctx is None:
            return self.basis.from_coords(coords)
        out = hs[0].scale(coords[0])
        for h, a in zip(hs[1:], coords[1:]):
            out = out + h.scale(a)
        return out

    def __call__(self, rho: CMatrix) -> CMatrix:
        return self.apply(rho)

    def image_of_unit(self, a: int, b: int) -> CMatrix:
        return self.apply(CMatrix.unit(a, b, self.dim))

    def choi(self) -> CMatrix:
        """``(T (x) id)(|Omega><Omega|)`` with normalised ``|Omega> = sum |ii>/sqrt(d)``."""
        d = self.dim
        total = None
        for a in range(d):
            for b in range(d):
                term = self.image_of_unit(a, b).kron(CMatrix.unit(a, b, d))
                total = term if total is None else total + term
        return _exactify(total.scale(Fraction(1, d)))

    def is_trace_preserving(self) -> bool:
        """First transfer row equals (1, 0, ..., 0) (containment for intervals)."""
        row = [self.transfer.re[0, j] for j in range(self.transfer.cols)]
        first = row[0] - 1
        return _contains_zero(first) and all(_contains_zero(x) for x in row[1:])

    def is_unital(self) -> bool:
        """First transfer column equals (1, 0, ..., 0)^T."""
        col = [self.transfer.re[i, 0] for i in range(self.transfer.rows)]
        return _contains_zero(col[0] - 1) and all(_contains_zero(x) for x in col[1:])

    def require_unital(self):
        if not self.is_unital():
            raise NotUnital("channel does not fix the identity")


def choi_from_transfer(t: Channel) -> CMatrix:
    return t.choi()


def transfer_from_choi(c: CMatrix, basis: HermitianBasis | None = None, d: int | None = None) -> Channel:
    """Inverse of :func:`choi_from_transfer`: ``T(X) = d tr_in[C (1 (x) X^T)]``."""
    n = c.rows
    if d is None:
        d = int(round(n ** 0.5))
    if d * d != n or not c.is_square():
        raise DimensionMismatch("Choi matrix must be d^2 x d^2")
    basis = basis or hermitian_basis(d)

    def fn(x):
        prod = c.matmul(CMatrix.identity(d).kron(x.transpose()))
        return prod.partial_trace((d, d), keep=(0,)).scale(Fraction(d))
    return Channel.from_map(fn, d, basis)


def compose(t1: Channel, t2: Channel) -> Channel:
    """First ``t2``, then ``t1``: transfer product ``T1_hat T2_hat``."""
    if t1.dim != t2.dim:
        raise DimensionMismatch("cannot compose channels of different dimension")
    if t1.basis is not t2.basis and t1.basis != t2.basis:
        raise DimensionMismatch("channels are expressed in different bases")
    return Channel(t1.dim, t1.basis, t1.transfer.matmul(t2.transfer))


def product_basis(b1: HermitianBasis, b2: HermitianBasis) -> HermitianBasis:
    mats = tuple(h.kron(g) for h in b1.matrices for g in b2.matrices)
    return HermitianBasis(b1.dim * b2.dim, mats, exact=b1.exact and b2.exact,
                          precision=max(b1.precision, b2.precision))


def tensor(t1: Channel, t2: Channel) -> Channel:
    basis = product_basis(t1.basis, t2.basis)
    return Channel(t1.dim * t2.dim, basis, t1.transfer.kron(t2.transfer))


def tensor_power(t: Channel, n: int) -> Channel:
    out = t
    for _ in range(n - 1):
        out = tensor(out, t)
    return out


@dataclass(frozen=True)
class CPVerdict:
    status: str                 # "certified-true", "certified-false", "indeterminate"
    interval: object = None     # enclosure of the Choi matrix's smallest eigenvalue

    def __bool__(self):
        return self.status == "certified-true"


def is_completely_positive(t: Channel | CMatrix, precision: int = DEFAULT_PRECISION,
                           width=Fraction(1, 10**40)) -> CPVerdict:
    """Three-valued CP test on the Choi matrix."""
    c = t.choi() if isinstance(t, Channel) else t
    if c.kind == "exact":
        neg = negative_eigenvalue_count(c)
        lam = min_eigenvalue_interval(c, width=Fraction(1, 10**12), precision=precision)
        return CPVerdict("certified-true" if neg == 0 else "certified-false", lam)
    if c.kind == "surd":
        c = c.to_interval(interval_context(precision))
    lam = min_eigenvalue_interval(c, width=width, precision=precision)
    lo, hi = endpoints(lam)
    if lo > 0:
        return CPVerdict("certified-true", lam)
    if hi < 0:
        return CPVerdict("certified-false", lam)
    return CPVerdict("indeterminate", lam)


def partial_transpose(rho: CMatrix, dims, systems=(0,)) -> CMatrix:
    """Partial transpose on the listed tensor factors of ``rho``."""
    dims = tuple(dims)
    if len(dims) < 2:
        raise BadGrouping("partial transpose needs at least two factors")
    return rho.partial_transpose(dims, systems)


def fidelity_overlap(phi: CMatrix, rho: CMatrix):
    """``tr(phi rho)`` -- equals ``<phi|rho|phi>`` for a rank-one projector ``phi``."""
    if phi.shape != rho.shape:
        raise DimensionMismatch("phi and rho differ in dimension")
    return phi.trace_product(rho).re


def is_density(rho: CMatrix) -> bool:
    """Exact density-matrix test (Hermitian, trace one, PSD)."""
    if not rho.is_hermitian():
        return False
    tr = rho.trace()
    if tr.re != 1 or tr.im != 0:
        return False
    return negative_eigenvalue_count(rho) == 0


def require_hermitian(m: CMatrix, what="matrix"):
    if not m.is_hermitian():
        raise NotHermitian(f"{what} is not Hermitian")
