"""SMT-LIB2 (NRA) export of prenex formulas and a reader for the same subset.

The matrix-variable grouping and parameters are kept in ``;``-comments so a
written script parses back to a structurally equal :class:`Formula`.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from ..core.cmatrix import CMatrix
from .poly import ONE_MONO, Poly
from .syntax import And, Atom, Formula, Implies, MatrixVar, Not, Or, scalar_var

_PREFIX_TAG = "; qdecide-prefix "
_PARAMS_TAG = "; qdecide-params "
_META_TAG = "; qdecide-meta "


def _num(c: Fraction) -> str:
    c = Fraction(c)
    mag = abs(c)
    s = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {s})" if c < 0 else s


def _term(mono, c) -> str:
    factors = [v for v, e in mono for _ in range(e)]
    if not factors:
        return _num(c)
    if c == 1:
        return factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})"
    return f"(* {_num(c)} {' '.join(factors)})"


def _sum(terms) -> str:
    parts = [_term(m, c) for m, c in terms]
    if not parts:
        return "0"
    if len(parts) == 1:
        return parts[0]
    return f"(+ {' '.join(parts)})"


def _node(n) -> str:
    if isinstance(n, Atom):
        terms = n.poly.sorted_terms()
        lhs = [(m, c) for m, c in terms if m != ONE_MONO]
        rhs = -n.poly.constant_value()
        return f"({n.rel} {_sum(lhs)} {_num(rhs)})"
    if isinstance(n, And):
        return "true" if not n.args else f"(and {' '.join(_node(a) for a in n.args)})"
    if isinstance(n, Or):
        return "false" if not n.args else f"(or {' '.join(_node(a) for a in n.args)})"
    if isinstance(n, Not):
        return f"(not {_node(n.arg)})"
    if isinstance(n, Implies):
        return f"(=> {_node(n.lhs)} {_node(n.rhs)})"
    raise TypeError(f"cannot export {n!r}; prenex the formula first")


def export_smt(f: Formula) -> str:
    if not f.is_prenex:
        raise ValueError("export_smt needs a prenex formula")
    lines = ["; quantified nonlinear real arithmetic, generated by qdecide"]
    lines.append(_PREFIX_TAG + json.dumps([[q, [v.to_json() for v in vs]] for q, vs in f.prefix]))
    if f.params:
        lines.append(_PARAMS_TAG + json.dumps({k: m.to_json() for k, m in f.params}))
    if f.meta:
        lines.append(_META_TAG + json.dumps(dict(f.meta)))
    lines.append("(set-logic NRA)")
    body = _node(f.body)
    for q, vs in reversed(f.prefix):
        binders = " ".join(f"({n} Real)" for v in vs for n in v.real_names())
        body = f"({q} ({binders}) {body})"
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reader
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokens(text: str):
    for line in text.splitlines():
        line = line.split(";", 1)[0]
        yield from _TOKEN.findall(line)


def _sexprs(text: str):
    stack = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def _poly(e) -> Poly:
    if isinstance(e, str):
        if re.fullmatch(r"\d+(\.\d+)?", e):
            return Poly.const(Fraction(e))
        return Poly.var(e)
    op, *args = e
    vals = [_poly(a) for a in args]
    if op == "+":
        out = Poly()
        for v in vals:
            out = out + v
        return out
    if op == "-":
        if len(vals) == 1:
            return -vals[0]
        out = vals[0]
        for v in vals[1:]:
            out = out - v
        return out
    if op == "*":
        out = Poly.const(1)
        for v in vals:
            out = out * v
        return out
    if op == "/":
        num, den = vals
        if not den.is_constant():
            raise ValueError("division by a non-constant")
        return num / den.constant_value()
    raise ValueError(f"unsupported term operator {op!r}")


def _bool(e):
    if e == "true":
        return And(())
    if e == "false":
        return Or(())
    if isinstance(e, str):
        raise ValueError(f"unexpected symbol {e!r} in Boolean position")
    op, *args = e
    if op in (">", ">=", "="):
        lhs, rhs = args
        return Atom(_poly(lhs) - _poly(rhs), op)
    if op == "<":
        lhs, rhs = args
        return Atom(_poly(rhs) - _poly(lhs), ">")
    if op == "<=":
        lhs, rhs = args
        return Atom(_poly(rhs) - _poly(lhs), ">=")
    if op == "and":
        return And(tuple(_bool(a) for a in args))
    if op == "or":
        return Or(tuple(_bool(a) for a in args))
    if op == "not":
        return Not(_bool(args[0]))
    if op == "=>":
        return Implies(_bool(args[0]), _bool(args[1]))
    raise ValueError(f"unsupported Boolean operator {op!r}")


def parse_smt(text: str) -> Formula:
    prefix_meta = params = meta = None
    for line in text.splitlines():
        if line.startswith(_PREFIX_TAG):
            prefix_meta = json.loads(line[len(_PREFIX_TAG):])
        elif line.startswith(_PARAMS_TAG):
            params = json.loads(line[len(_PARAMS_TAG):])
        elif line.startswith(_META_TAG):
            meta = json.loads(line[len(_META_TAG):])
    asserts = [e for e in _sexprs(text) if isinstance(e, list) and e and e[0] == "assert"]
    if len(asserts) != 1:
        raise ValueError("expected exactly one assert")
    node = asserts[0][1]
    blocks = []
    while isinstance(node, list) and node and node[0] in ("exists", "forall"):
        names = [b[0] for b in node[1]]
        blocks.append((node[0], names))
        node = node[2]
    body = _bool(node)
    if prefix_meta is not None:
        prefix = tuple((q, tuple(MatrixVar.from_json(v) for v in vs)) for q, vs in prefix_meta)
        expected = [(q, [n for v in vs for n in v.real_names()]) for q, vs in prefix]
        if expected != blocks:
            raise ValueError("binder lists disagree with the recorded matrix variables")
    else:
        prefix = tuple((q, tuple(scalar_var(n) for n in names)) for q, names in blocks)
    par = tuple((k, CMatrix.from_json(v)) for k, v in (params or {}).items())
    return Formula(prefix, body, par, True, tuple(sorted((meta or {}).items())))
