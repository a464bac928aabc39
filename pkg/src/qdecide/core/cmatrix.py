"""Dense complex matrices over exact, interval or polynomial entries.

A :class:`CMatrix` keeps its real and imaginary parts as two numpy object
arrays, so the same code path serves rational matrices, certified interval
matrices and matrices of polynomials (used by the formula encoders).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from ..errors import BadGrouping, DimensionMismatch
from .scalars import Surd, endpoints, is_interval, parse_rational, to_interval


class Cx:
    """A complex scalar ``re + i*im`` over any commutative ring."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = re
        self.im = im

    @staticmethod
    def of(x) -> "Cx":
        return x if isinstance(x, Cx) else Cx(x, 0)

    def __add__(self, other):
        o = Cx.of(other)
        return Cx(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = Cx.of(other)
        return Cx(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return Cx.of(other) - self

    def __neg__(self):
        return Cx(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, Cx):
            return Cx(self.re * other, self.im * other)
        return Cx(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    def __rmul__(self, other):
        return Cx(other * self.re, other * self.im)

    def __truediv__(self, other):
        if not isinstance(other, Cx):
            return Cx(self.re / other, self.im / other)
        den = other.re * other.re + other.im * other.im
        num = self * other.conj()
        return Cx(num.re / den, num.im / den)

    def conj(self):
        return Cx(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return _is_exact_zero(self.re) and _is_exact_zero(self.im)

    def __eq__(self, other):
        o = Cx.of(other)
        return _entries_equal(self.re, o.re) and _entries_equal(self.im, o.im)

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Cx({self.re}, {self.im})"


def _is_exact_zero(x) -> bool:
    if is_interval(x):
        return False
    try:
        return x == 0
    except TypeError:
        return False


def _entries_equal(a, b) -> bool:
    if is_interval(a) or is_interval(b):
        if not (is_interval(a) and is_interval(b)):
            return False
        return a._mpi_ == b._mpi_
    return bool(a == b)


def _object_array(rows, cols, fill=0):
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = fill
    return out


def _read_scalar(x):
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        return parse_rational(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


def _read_entry(x) -> Cx:
    if isinstance(x, Cx):
        return x
    if isinstance(x, complex):
        return Cx(parse_rational(x.real), parse_rational(x.imag))
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entry must be [re, im], got {x!r}")
        return Cx(_read_scalar(x[0]), _read_scalar(x[1]))
    return Cx(_read_scalar(x), Fraction(0))


class CMatrix:
    """Immutable dense complex matrix."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        re = np.asarray(re, dtype=object)
        if re.ndim != 2:
            raise ValueError("CMatrix needs a 2-D array")
        if im is None:
            im = _object_array(*re.shape, fill=Fraction(0))
        im = np.asarray(im, dtype=object)
        if im.shape != re.shape:
            raise DimensionMismatch("real and imaginary parts differ in shape")
        re.flags.writeable = False
        im.flags.writeable = False
        self.re = re
        self.im = im

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rows(cls, rows) -> "CMatrix":
        rows = [list(r) for r in rows]
        n, m = len(rows), len(rows[0]) if rows else 0
        if any(len(r) != m for r in rows):
            raise DimensionMismatch("ragged rows")
        re = _object_array(n, m)
        im = _object_array(n, m)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                z = _read_entry(x)
                re[i, j], im[i, j] = z.re, z.im
        return cls(re, im)

    @classmethod
    def from_entries(cls, rows, cols, fn) -> "CMatrix":
        re = _object_array(rows, cols)
        im = _object_array(rows, cols)
        for i in range(rows):
            for j in range(cols):
                z = Cx.of(fn(i, j))
                re[i, j], im[i, j] = z.re, z.im
        return cls(re, im)

    @classmethod
    def zeros(cls, rows, cols=None) -> "CMatrix":
        cols = rows if cols is None else cols
        return cls(_object_array(rows, cols, Fraction(0)), _object_array(rows, cols, Fraction(0)))

    @classmethod
    def identity(cls, n, one=Fraction(1)) -> "CMatrix":
        re = _object_array(n, n, Fraction(0))
        for i in range(n):
            re[i, i] = one
        return cls(re)

    @classmethod
    def unit(cls, a, b, n) -> "CMatrix":
        re = _object_array(n, n, Fraction(0))
        re[a, b] = Fraction(1)
        return cls(re)

    @classmethod
    def column(cls, values) -> "CMatrix":
        return cls.from_rows([[v] for v in values])

    @classmethod
    def projector(cls, vector) -> "CMatrix":
        """``|v><v| / <v|v>``; exact whenever ``v`` is."""
        v = cls.column(vector)
        norm = v.dagger().matmul(v).entry(0, 0).re
        return v.matmul(v.dagger()).scale(1 / norm if not is_interval(norm) else norm ** -1)

    # -- basic accessors ----------------------------------------------------

    @property
    def shape(self):
        return self.re.shape

    @property
    def rows(self):
        return self.re.shape[0]

    @property
    def cols(self):
        return self.re.shape[1]

    def entry(self, i, j) -> Cx:
        return Cx(self.re[i, j], self.im[i, j])

    def __getitem__(self, ij) -> Cx:
        return self.entry(*ij)

    @property
    def kind(self) -> str:
        """'exact', 'interval' or 'symbolic' (polynomial entries)."""
        kinds = set()
        for x in itertools.chain(self.re.flat, self.im.flat):
            if is_interval(x):
                kinds.add("interval")
            elif isinstance(x, (int, Fraction)):
                continue
            elif isinstance(x, Surd):
                kinds.add("surd")
            else:
                kinds.add("symbolic")
        if "symbolic" in kinds:
            return "symbolic"
        if "interval" in kinds:
            return "interval"
        if "surd" in kinds:
            return "surd"
        return "exact"

    def is_real(self) -> bool:
        return all(_is_exact_zero(x) for x in self.im.flat)

    # -- algebra ------------------------------------------------------------

    def _check_same(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "CMatrix") -> "CMatrix":
        self._check_same(other)
        return CMatrix(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CMatrix") -> "CMatrix":
        self._check_same(other)
        return CMatrix(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "CMatrix":
        return CMatrix(-self.re, -self.im)

    def matmul(self, other: "CMatrix") -> "CMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if self.is_real() and other.is_real():
            return CMatrix(self.re.dot(other.re), _object_array(self.rows, other.cols, Fraction(0)))
        re = self.re.dot(other.re) - self.im.dot(other.im)
        im = self.re.dot(other.im) + self.im.dot(other.re)
        return CMatrix(re, im)

    __matmul__ = matmul

    def scale(self, s) -> "CMatrix":
        """Multiply by a real or :class:`Cx` scalar."""
        if isinstance(s, Cx):
            return CMatrix(self.re * s.re - self.im * s.im, self.re * s.im + self.im * s.re)
        return CMatrix(self.re * s, self.im * s)

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def dagger(self) -> "CMatrix":
        return CMatrix(self.re.T.copy(), (-self.im).T.copy())

    def transpose(self) -> "CMatrix":
        return CMatrix(self.re.T.copy(), self.im.T.copy())

    def conj(self) -> "CMatrix":
        return CMatrix(self.re.copy(), -self.im)

    def trace(self) -> Cx:
        if self.rows != self.cols:
            raise DimensionMismatch("trace of a non-square matrix")
        re, im = 0, 0
        for i in range(self.rows):
            re = re + self.re[i, i]
            im = im + self.im[i, i]
        return Cx(re, im)

    def kron(self, other: "CMatrix") -> "CMatrix":
        if self.is_real() and other.is_real():
            return CMatrix(np.kron(self.re, other.re))
        re = np.kron(self.re, other.re) - np.kron(self.im, other.im)
        im = np.kron(self.re, other.im) + np.kron(self.im, other.re)
        return CMatrix(re, im)

    def map(self, fn) -> "CMatrix":
        f = np.frompyfunc(fn, 1, 1)
        return CMatrix(f(self.re), f(self.im))

    def to_interval(self, ctx) -> "CMatrix":
        return self.map(lambda x: to_interval(x, ctx))

    def submatrix(self, rows, cols) -> "CMatrix":
        rows, cols = list(rows), list(cols)
        return CMatrix(self.re[np.ix_(rows, cols)], self.im[np.ix_(rows, cols)])

    def hs_inner(self, other: "CMatrix") -> Cx:
        """Hilbert-Schmidt product ``tr[A^dagger B]``."""
        self._check_same(other)
        re = (self.re * other.re + self.im * other.im).sum()
        im = (self.re * other.im - self.im * other.re).sum()
        return Cx(re, im)

    def trace_product(self, other: "CMatrix") -> Cx:
        """``tr[A B]`` without forming the product."""
        if self.shape != other.shape[::-1]:
            raise DimensionMismatch("trace product needs transposed shapes")
        bt_re, bt_im = other.re.T, other.im.T
        re = (self.re * bt_re - self.im * bt_im).sum()
        im = (self.re * bt_im + self.im * bt_re).sum()
        return Cx(re, im)

    def frobenius_sq(self):
        return (self.re * self.re + self.im * self.im).sum()

    # -- structure ----------------------------------------------------------

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_hermitian(self) -> bool:
        """Exact test for exact/symbolic entries; containment test for intervals."""
        if not self.is_square():
            return False
        for i in range(self.rows):
            for j in range(i, self.cols):
                dr = self.re[i, j] - self.re[j, i]
                di = self.im[i, j] + self.im[j, i]
                if not (_may_be_zero(dr) and _may_be_zero(di)):
                    return False
        return True

    def permute_subsystems(self, dims, perm) -> "CMatrix":
        """Reorder tensor factors: factor ``perm[k]`` of the input becomes factor ``k``."""
        dims = list(dims)
        n = int(np.prod(dims))
        if n != self.rows or not self.is_square():
            raise BadGrouping(f"dims {dims} do not match a {self.shape} matrix")
        if sorted(perm) != list(range(len(dims))):
            raise BadGrouping(f"{perm} is not a permutation")
        k = len(dims)
        axes = list(perm) + [k + p for p in perm]

        def reorder(a):
            return a.reshape(dims + dims).transpose(axes).reshape(n, n)

        return CMatrix(reorder(self.re), reorder(self.im))

    def partial_transpose(self, dims, systems=(0,)) -> "CMatrix":
        """Transpose the tensor factors listed in ``systems``."""
        dims = list(dims)
        n = int(np.prod(dims)) if dims else 0
        if n != self.rows or not self.is_square():
            raise BadGrouping(f"dims {dims} do not match a {self.shape} matrix")
        if any(s < 0 or s >= len(dims) for s in systems):
            raise BadGrouping(f"subsystems {systems} out of range for {len(dims)} factors")
        k = len(dims)
        axes = list(range(2 * k))
        for s in systems:
            axes[s], axes[k + s] = axes[k + s], axes[s]

        def pt(a):
            return a.reshape(dims + dims).transpose(axes).reshape(n, n)

        return CMatrix(pt(self.re), pt(self.im))

    def partial_trace(self, dims, keep) -> "CMatrix":
        """Trace out every factor not listed in ``keep`` (kept order preserved)."""
        dims = list(dims)
        k = len(dims)
        if int(np.prod(dims)) != self.rows:
            raise BadGrouping(f"dims {dims} do not match a {self.shape} matrix")
        keep = sorted(keep)
        out_dim = int(np.prod([dims[i] for i in keep])) if keep else 1

        def pt(a):
            t = a.reshape(dims + dims)
            traced = [i for i in range(k) if i not in keep]
            for offset, i in enumerate(sorted(traced, reverse=True)):
                ndim = t.ndim // 2
                t = np.trace(t, axis1=i, axis2=ndim + i)
            return np.asarray(t, dtype=object).reshape(out_dim, out_dim)

        return CMatrix(pt(self.re), pt(self.im))

    # -- determinants -------------------------------------------------------

    def det(self) -> Cx:
        if not self.is_square():
            raise DimensionMismatch("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return Cx(Fraction(1), Fraction(0))
        kind = self.kind
        if kind == "exact":
            return _det_elimination(self)
        if kind == "symbolic" and n <= 4:
            return _det_leibniz(self)
        coeffs = charpoly_coefficients(self)
        c = coeffs[-1]
        return c if n % 2 == 0 else -c

    def inverse(self) -> "CMatrix":
        """Exact Gauss-Jordan inverse (exact entries only)."""
        if self.kind != "exact":
            raise TypeError("exact inverse needs rational entries")
        n = self.rows
        a = [[self.entry(i, j) for j in range(n)] + [Cx(Fraction(int(i == j)), Fraction(0)) for j in range(n)]
             for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
            if piv is None:
                raise ZeroDivisionError("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            p = a[col][col]
            a[col] = [x / p for x in a[col]]
            for r in range(n):
                if r != col and not a[r][col].is_zero():
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return CMatrix.from_entries(n, n, lambda i, j: a[i][n + j])

    # -- comparison / io ----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, CMatrix) or self.shape != other.shape:
            return False
        return all(_entries_equal(a, b) for a, b in zip(self.re.flat, other.re.flat)) and all(
            _entries_equal(a, b) for a, b in zip(self.im.flat, other.im.flat))

    __hash__ = None

    def to_json(self):
        """Row-major ``[[["p/q", "r/s"], ...], ...]`` (exact entries only)."""
        if self.kind != "exact":
            raise TypeError("only exact matrices serialise to exact strings")
        return [[[str(Fraction(self.re[i, j])), str(Fraction(self.im[i, j]))] for j in range(self.cols)]
                for i in range(self.rows)]

    @classmethod
    def from_json(cls, rows) -> "CMatrix":
        return cls.from_rows(rows)

    def to_numpy(self) -> np.ndarray:
        """Float approximation (interval midpoints)."""
        def f(x):
            if is_interval(x):
                return float(x.mid)
            return float(x)
        fr = np.frompyfunc(f, 1, 1)
        return fr(self.re).astype(float) + 1j * fr(self.im).astype(float)

    def __repr__(self):
        return f"CMatrix({self.rows}x{self.cols}, {self.kind})"


def _may_be_zero(x) -> bool:
    if is_interval(x):
        return _interval_has_zero(x)
    try:
        return x == 0
    except TypeError:
        return False


def _interval_has_zero(x) -> bool:
    lo, hi = endpoints(x)
    return lo <= 0 <= hi


def _det_elimination(m: CMatrix) -> Cx:
    n = m.rows
    a = [[m.entry(i, j) for j in range(n)] for i in range(n)]
    det = Cx(Fraction(1), Fraction(0))
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            return Cx(Fraction(0), Fraction(0))
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        for r in range(col + 1, n):
            if a[r][col].is_zero():
                continue
            f = a[r][col] / p
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def _permutation_sign(p) -> int:
    sign, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _det_leibniz(m: CMatrix) -> Cx:
    n = m.rows
    total = Cx(0, 0)
    for p in itertools.permutations(range(n)):
        term = m.entry(0, p[0])
        for i in range(1, n):
            term = term * m.entry(i, p[i])
        total = total + term if _permutation_sign(p) > 0 else total - term
    return total


def charpoly_coefficients(m: CMatrix) -> list:
    """Coefficients ``[1, c1, ..., cn]`` of ``det(x*1 - M)`` (Berkowitz, division free)."""
    n = m.rows
    one = Cx(1, 0)
    poly = [one]
    for r in range(1, n + 1):
        a = m.entry(r - 1, r - 1)
        row = [m.entry(r - 1, j) for j in range(r - 1)]
        col = [m.entry(i, r - 1) for i in range(r - 1)]
        toeplitz = [one, -a]
        vec = col
        for _ in range(r - 1):
            s = Cx(0, 0)
            for x, y in zip(row, vec):
                s = s + x * y
            toeplitz.append(-s)
            vec = [sum((m.entry(i, j) * vec[j] for j in range(r - 1)), Cx(0, 0)) for i in range(r - 1)]
        new = []
        for i in range(r + 1):
            s = Cx(0, 0)
            for j in range(min(i + 1, r)):
                s = s + toeplitz[i - j] * poly[j]
            new.append(s)
        poly = new
    return poly
