"""Polynomial membership constraints for the matrix domains."""

from __future__ import annotations

import itertools

from ..core.cmatrix import CMatrix, Cx
from ..core.eigen import principal_subsets
from ..errors import UnsupportedDomain
from .poly import Poly
from .syntax import TRUE, Domain, MatrixVar, Not, conj, disj, eq, ge

_ZERO = Poly()


def hermiticity(var: MatrixVar):
    """``X = X^dagger`` entrywise on the flattened reals."""
    if var.rows != var.cols:
        raise ValueError(f"{var.name}: Hermitian domains need a square matrix")
    out = []
    x = var.matrix()
    for i in range(var.rows):
        if not var.is_real:
            out.append(eq(x.im[i, i]))
        for j in range(i + 1, var.cols):
            out.append(eq(x.re[i, j] - x.re[j, i]))
            if not var.is_real:
                out.append(eq(x.im[i, j] + x.im[j, i]))
    return out


def psd_minors(h: CMatrix):
    """``minor >= 0`` for every principal minor of a symbolic Hermitian matrix."""
    out = []
    for s in principal_subsets(h.rows):
        det = h.submatrix(s, s).det()
        out.append(ge(Poly.lift(det.re)))
    return out


def _psd(var: MatrixVar):
    return hermiticity(var) + psd_minors(var.hermitian_view())


def _trace_one(var: MatrixVar):
    x = var.matrix()
    tr = sum((x.re[i, i] for i in range(var.rows)), _ZERO)
    return eq(tr - 1)


def _all_minors(x: CMatrix, size: int):
    for rows in itertools.combinations(range(x.rows), size):
        for cols in itertools.combinations(range(x.cols), size):
            yield x.submatrix(rows, cols).det()


def _nonzero(z: Cx, real: bool):
    parts = [Not(eq(Poly.lift(z.re)))]
    if not real:
        parts.append(Not(eq(Poly.lift(z.im))))
    return disj(*parts)


def encode_membership(var: MatrixVar):
    """Return ``(auxiliary variables, constraint node)`` for ``var``'s domain."""
    tag = var.domain.tag
    x = var.matrix()
    if tag in ("complex", "real"):
        return [], TRUE
    if tag == "hermitian":
        return [], conj(hermiticity(var))
    if tag == "psd":
        return [], conj(_psd(var))
    if tag == "density":
        return [], conj(_psd(var), _trace_one(var))
    if tag == "unitary":
        prod = x.dagger().matmul(x)
        out = []
        for i in range(var.rows):
            for j in range(var.cols):
                out.append(eq(Poly.lift(prod.re[i, j]) - (1 if i == j else 0)))
                if not var.is_real:
                    out.append(eq(Poly.lift(prod.im[i, j])))
        return [], conj(out)
    if tag == "norm_ball":
        p = var.domain.get("p")
        h = var.hermitian_view()
        if p == "inf":
            n = var.rows
            ident = CMatrix.identity(n)
            gap = ident - h.matmul(h)
            return [], conj(hermiticity(var), psd_minors(gap))
        if not isinstance(p, int) or p < 1:
            raise UnsupportedDomain(f"norm_ball needs an even integer p or 'inf', got {p!r}")
        if p % 2:
            raise UnsupportedDomain(
                f"odd p={p}: tr[X^p] <= 1 is not the Schatten p-norm ball for indefinite X")
        power = h
        for _ in range(p - 1):
            power = power.matmul(h)
        tr = sum((Poly.lift(power.re[i, i]) for i in range(var.rows)), _ZERO)
        return [], conj(hermiticity(var), ge(1 - tr))
    if tag == "rank":
        r = int(var.domain.get("r"))
        out = []
        if r + 1 <= min(var.rows, var.cols):
            for det in _all_minors(x, r + 1):
                out.append(eq(Poly.lift(det.re)))
                if not var.is_real:
                    out.append(eq(Poly.lift(det.im)))
        if r > 0:
            if r > min(var.rows, var.cols):
                from .syntax import FALSE
                return [], FALSE
            out.append(disj(*[_nonzero(det, var.is_real) for det in _all_minors(x, r)]))
        return [], conj(out)
    if tag == "rank_at_most":
        r = int(var.domain.get("r"))
        field = "real" if var.is_real else "complex"
        aux = []
        total = CMatrix.zeros(var.rows, var.cols)
        for k in range(r):
            a = MatrixVar(f"{var.name}__a{k}", var.rows, 1, Domain(field))
            b = MatrixVar(f"{var.name}__b{k}", var.cols, 1, Domain(field))
            aux += [a, b]
            total = total + a.matrix().matmul(b.matrix().transpose())
        out = []
        for i in range(var.rows):
            for j in range(var.cols):
                out.append(eq(x.re[i, j] - Poly.lift(total.re[i, j])))
                if not var.is_real:
                    out.append(eq(x.im[i, j] - Poly.lift(total.im[i, j])))
        return aux, conj(out)
    if tag == "channel_choi":
        din, dout = var.domain.get("din"), var.domain.get("dout")
        if not isinstance(din, int) or not isinstance(dout, int):
            raise UnsupportedDomain("channel_choi needs integer parameters din and dout")
        if var.rows != din * dout:
            raise ValueError(f"{var.name}: Choi matrix must be {din * dout} square")
        # C on out (x) in; tr_out C = 1/din
        h = var.hermitian_view()
        red = h.partial_trace((dout, din), keep=(1,))
        out = list(_psd(var))
        for i in range(din):
            for j in range(i, din):
                target = Poly.const(1) / din if i == j else _ZERO
                out.append(eq(Poly.lift(red.re[i, j]) - target))
                if i != j:
                    out.append(eq(Poly.lift(red.im[i, j])))
        return [], conj(out)
    if tag == "simplex":
        vals = [x.re[i, j] for i in range(var.rows) for j in range(var.cols)]
        return [], conj([ge(v) for v in vals], eq(sum(vals, _ZERO) - 1))
    if tag == "nonneg":
        return [], conj([ge(x.re[i, j]) for i in range(var.rows) for j in range(var.cols)])
    raise UnsupportedDomain(f"no membership encoding for {tag!r}")
