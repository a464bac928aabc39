"""Exact witness checking and a heuristic numeric search for existential formulas."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.optimize import least_squares

from ..core.cmatrix import CMatrix
from ..core.scalars import parse_rational
from ..errors import IncompleteAssignment
from .poly import Poly
from .prenex import prenex
from .syntax import And, Atom, Formula, Implies, MatrixVar, Not, Or, evaluate

STRICT_SLACK = 1e-6
DENOMINATORS = (1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 32, 50, 64, 100, 128, 256, 1000, 1024,
                10**4, 10**5, 10**6)


def _existential(f: Formula) -> Formula:
    f = prenex(f)
    if any(q != "exists" for q, _ in f.prefix):
        raise ValueError("formula is not purely existential")
    return f


def flatten_assignment(f: Formula, assignment) -> dict:
    """Expand matrix-valued entries of ``assignment`` into flattened reals."""
    byname = {v.name: v for v in f.variables()}
    out = {}
    for key, value in assignment.items():
        var = byname.get(key)
        if var is not None:
            if not isinstance(value, CMatrix):
                if not isinstance(value, (list, tuple)):
                    value = [[value]]
                elif not isinstance(value[0], (list, tuple)):
                    value = [[x] for x in value]        # a flat list is a column
                value = CMatrix.from_rows(value)
            out.update(var.flatten(value))
        else:
            out[key] = parse_rational(value)
    return out


def check_witness(f: Formula, assignment) -> bool:
    """Exact evaluation of an existential formula's body at ``assignment``."""
    f = _existential(f)
    values = flatten_assignment(f, assignment)
    missing = [n for n in f.real_variables() if n not in values]
    if missing:
        more = f" (+{len(missing) - 5} more)" if len(missing) > 5 else ""
        raise IncompleteAssignment(f"no value for {', '.join(missing[:5])}{more}")
    return evaluate(f.body, values)


# ---------------------------------------------------------------------------
# numeric search
# ---------------------------------------------------------------------------


def to_nnf(node, negate=False):
    """Negation normal form over And/Or/Atom (relations >, >=, =)."""
    if isinstance(node, Atom):
        if not negate:
            return node
        if node.rel == ">=":
            return Atom(-node.poly, ">")
        if node.rel == ">":
            return Atom(-node.poly, ">=")
        return Or((Atom(node.poly, ">"), Atom(-node.poly, ">")))
    if isinstance(node, And):
        args = tuple(to_nnf(a, negate) for a in node.args)
        return Or(args) if negate else And(args)
    if isinstance(node, Or):
        args = tuple(to_nnf(a, negate) for a in node.args)
        return And(args) if negate else Or(args)
    if isinstance(node, Not):
        return to_nnf(node.arg, not negate)
    if isinstance(node, Implies):
        return to_nnf(Or((Not(node.lhs), node.rhs)), negate)
    raise TypeError(f"cannot search over {node!r}")


class PolySystem:
    """Vectorised evaluation of many polynomials and their Jacobian."""

    def __init__(self, polys, names):
        index = {n: i for i, n in enumerate(names)}
        self.n = len(names)
        monos = {}
        rows, cols, data = [], [], []
        for r, p in enumerate(polys):
            for m, c in p.terms.items():
                k = monos.setdefault(m, len(monos))
                rows.append(r)
                cols.append(k)
                data.append(float(c))
        self.C = sparse.csr_matrix((data, (rows, cols)), shape=(len(polys), max(len(monos), 1)))
        width = max((len(m) for m in monos), default=1) or 1
        self.V = np.full((max(len(monos), 1), width), self.n, dtype=np.int64)
        self.E = np.zeros((max(len(monos), 1), width), dtype=np.int64)
        for m, k in monos.items():
            for slot, (v, e) in enumerate(m):
                self.V[k, slot] = index[v]
                self.E[k, slot] = e

    def _factors(self, x):
        xe = np.append(x, 1.0)
        return xe, xe[self.V] ** self.E

    def values(self, x):
        _, f = self._factors(x)
        return self.C @ f.prod(axis=1)

    def jacobian(self, x):
        xe, f = self._factors(x)
        nm, width = self.V.shape
        rows, cols, data = [], [], []
        for slot in range(width):
            live = self.E[:, slot] > 0
            if not live.any():
                continue
            g = f.copy()
            g[:, slot] = 1.0
            others = g.prod(axis=1)
            e = self.E[:, slot]
            base = xe[self.V[:, slot]]
            deriv = np.where(live, e * base ** np.maximum(e - 1, 0) * others, 0.0)
            idx = np.nonzero(live)[0]
            rows.append(idx)
            cols.append(self.V[idx, slot])
            data.append(deriv[idx])
        if rows:
            d = sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                                  shape=(nm, self.n))
        else:
            d = sparse.csr_matrix((nm, self.n))
        return self.C @ d


def _select(node, chooser):
    """Pick one branch per disjunction; return the resulting list of atoms."""
    if isinstance(node, Atom):
        return [node]
    if isinstance(node, And):
        out = []
        for a in node.args:
            out += _select(a, chooser)
        return out
    if isinstance(node, Or):
        if not node.args:
            return None
        return _select(node.args[chooser(node)], chooser)
    raise TypeError(node)


def _violation(atom: Atom, values: dict) -> float:
    v = _fast_eval(atom.poly, values)
    if atom.rel == "=":
        return abs(v)
    if atom.rel == ">=":
        return max(-v, 0.0)
    return max(2 * STRICT_SLACK - v, 0.0)


def _fast_eval(p: Poly, values: dict) -> float:
    acc = 0.0
    for m, c in p.terms.items():
        t = float(c)
        for v, e in m:
            t *= values[v] ** e
        acc += t
    return acc


@dataclass
class SearchResult:
    status: str                           # "witness", "approximate" or "unknown"
    assignment: dict | None = None        # exact values (witness) of the flattened reals
    point: dict | None = None             # float point (approximate / witness)
    residual: float = float("inf")
    restarts: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "witness"


def _random_value(var: MatrixVar, rng) -> np.ndarray:
    """A random starting value that already lies (roughly) in the domain."""
    tag = var.domain.tag
    r, c = var.rows, var.cols
    if tag in ("density", "psd", "channel_choi"):
        a = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
        m = a @ a.conj().T
        if tag == "density":
            m = m / np.trace(m).real
        elif tag == "channel_choi":
            m = m / np.trace(m).real
        return m
    if tag == "unitary":
        a = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
        q, rr = np.linalg.qr(a)
        return q * (np.diag(rr) / abs(np.diag(rr)))
    if tag == "simplex":
        return rng.dirichlet(np.ones(r * c)).reshape(r, c)
    if tag == "nonneg":
        return rng.random((r, c))
    if tag == "hermitian":
        a = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
        return (a + a.conj().T) / 2
    scale = 0.5
    if var.is_real:
        return rng.normal(scale=scale, size=(r, c))
    return rng.normal(scale=scale, size=(r, c)) + 1j * rng.normal(scale=scale, size=(r, c))


def _values_from_matrices(variables, mats) -> dict:
    out = {}
    for v in variables:
        m = np.asarray(mats[v.name])
        for i in range(v.rows):
            for j in range(v.cols):
                z = m[i, j]
                out[v.re_name(i, j)] = z.real if np.iscomplexobj(m) else z
                if not v.is_real:
                    out[v.im_name(i, j)] = z.imag if np.iscomplexobj(m) else 0.0
    return out


def structured_candidates(variables):
    """Exact candidate points built from computational-basis objects."""
    dims = [v.rows for v in variables if v.domain.tag in ("density", "psd")] or [1]
    for shift in range(-1, max(dims)):
        mats = {}
        t = 0
        for v in variables:
            tag = v.domain.tag
            m = np.zeros((v.rows, v.cols), dtype=object)
            m[:, :] = Fraction(0)
            if tag in ("density", "psd"):
                if shift < 0:
                    for i in range(v.rows):
                        m[i, i] = Fraction(1, v.rows)
                else:
                    k = (shift + t) % v.rows
                    m[k, k] = Fraction(1)
                t += 1
            elif tag == "unitary":
                for i in range(v.rows):
                    m[i, i] = Fraction(1)
            elif tag == "simplex":
                m.flat[0] = Fraction(1)
            elif tag == "channel_choi":
                n = v.rows
                for i in range(n):
                    m[i, i] = Fraction(1, n)
            mats[v.name] = m
        yield mats


def _exact_values(variables, mats) -> dict:
    out = {}
    for v in variables:
        m = mats[v.name]
        for i in range(v.rows):
            for j in range(v.cols):
                out[v.re_name(i, j)] = Fraction(m[i, j])
                if not v.is_real:
                    out[v.im_name(i, j)] = Fraction(0)
    return out


def _rationalize(x, denominator):
    return [Fraction(float(xi)).limit_denominator(denominator) for xi in x]


def numeric_search(f: Formula, budget=None, seed: int = 0, tol: float = 1e-10) -> SearchResult:
    """Multistart least squares on atom violations, then exact re-validation.

    Never reports unsatisfiability: failure to find a point is ``unknown``.
    ``approximate`` means the violations were driven below ``tol`` but no
    rational point passing :func:`check_witness` was recovered.
    """
    f = _existential(f)
    budget = {"restarts": budget} if isinstance(budget, int) else dict(budget or {})
    restarts = int(budget.get("restarts", 12))
    max_nfev = int(budget.get("max_nfev", 400))
    deadline = time.monotonic() + float(budget.get("seconds", 60))
    snap = bool(budget.get("snap", True))
    names = f.real_variables()
    variables = f.variables()
    body = to_nnf(f.body)
    rng = np.random.default_rng(seed)
    stats = {"structured": 0, "lsq": 0}

    # structured exact candidates first
    for mats in structured_candidates(variables):
        stats["structured"] += 1
        values = _exact_values(variables, mats)
        if evaluate(f.body, values):
            return SearchResult("witness", values, {k: float(v) for k, v in values.items()}, 0.0, 0, stats)

    best = SearchResult("unknown", residual=float("inf"), stats=stats)
    for attempt in range(restarts):
        if time.monotonic() > deadline:
            break
        mats = {v.name: _random_value(v, rng) for v in variables}
        start = _values_from_matrices(variables, mats)
        x0 = np.array([start[n] for n in names], dtype=float)

        def chooser(node, point=start, salt=attempt):
            scores = [sum(_violation(a, point) for a in (_select(b, lambda o: 0) or [])) for b in node.args]
            if salt % 2 == 1 and len(scores) > 1:
                return int(rng.integers(len(scores)))
            return int(np.argmin(scores))

        chosen = _select(body, chooser)
        if chosen is None:
            continue
        stats["lsq"] += 1
        x, res = _solve(chosen, names, x0, max_nfev)
        if res < best.residual:
            best = SearchResult("unknown", None, dict(zip(names, x)), res, attempt + 1, stats)
        if res > tol:
            continue
        exact = _recover_exact(f, chosen, names, x, max_nfev, deadline, snap)
        if exact is not None:
            return SearchResult("witness", exact, dict(zip(names, x)), res, attempt + 1, stats)
        best = SearchResult("approximate", None, dict(zip(names, x)), res, attempt + 1, stats)
        return best
    best.restarts = restarts
    return best


def _residual_fn(system: PolySystem, rels):
    eqm = np.array([r == "=" for r in rels])
    strict = np.array([r == ">" for r in rels])
    shift = np.where(strict, 2 * STRICT_SLACK, 0.0)

    def fun(x):
        v = system.values(x) - shift
        return np.where(eqm, v, np.minimum(v, 0.0))

    def jac(x):
        v = system.values(x) - shift
        active = eqm | (v < 0)
        j = system.jacobian(x).tocsr()
        return (sparse.diags(active.astype(float)) @ j).toarray()

    return fun, jac


def _solve(chosen, names, x0, max_nfev, fixed=None):
    polys = [a.poly for a in chosen]
    rels = [a.rel for a in chosen]
    if fixed:
        sub = {names[i]: fixed[i] for i in fixed}
        polys = [p.substitute(sub) for p in polys]
        free = [i for i in range(len(names)) if i not in fixed]
    else:
        free = list(range(len(names)))
    free_names = [names[i] for i in free]
    system = PolySystem(polys, free_names)
    fun, jac = _residual_fn(system, rels)
    x = np.array(x0, dtype=float)
    if free:
        try:
            sol = least_squares(fun, x[free], jac=jac, method="trf", max_nfev=max_nfev,
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
            x[free] = sol.x
        except (ValueError, np.linalg.LinAlgError):
            pass
    r = fun(x[free]) if free else fun(np.zeros(0))
    return x, float(np.max(np.abs(r))) if len(r) else 0.0


def _strict_slack_ok(chosen, names, x) -> bool:
    point = dict(zip(names, x))
    return all(_fast_eval(a.poly, point) > STRICT_SLACK for a in chosen if a.rel == ">")


def _recover_exact(f, chosen, names, x, max_nfev, deadline, snap):
    if not _strict_slack_ok(chosen, names, x):
        return None
    for den in DENOMINATORS:
        values = dict(zip(names, _rationalize(x, den)))
        if evaluate(f.body, values):
            return values
    if not snap:
        return None
    # progressively pin coordinates to simple rationals and re-solve the rest
    fixed = {}
    x = np.array(x, dtype=float)
    while len(fixed) < len(names) and time.monotonic() < deadline:
        free = [i for i in range(len(names)) if i not in fixed]
        gaps = [(abs(x[i] - float(Fraction(x[i]).limit_denominator(12))), i) for i in free]
        _, i = min(gaps)
        fixed[i] = Fraction(float(x[i])).limit_denominator(12)
        x[i] = float(fixed[i])
        x, res = _solve(chosen, names, x, max_nfev, fixed)
        if res > 1e-9:
            return None
        values = dict(zip(names, [fixed.get(k, Fraction(float(x[k])).limit_denominator(10**6))
                                  for k in range(len(names))]))
        if evaluate(f.body, values):
            return values
    return None
