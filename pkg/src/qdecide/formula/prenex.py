"""Relativisation of domain constraints and prenex normal form."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .domains import encode_membership
from .syntax import (
    And,
    Atom,
    Formula,
    Implies,
    Not,
    Or,
    Quant,
    atoms,
    conj,
    free_variables,
    is_quantifier_free,
)

_FLIP = {"exists": "forall", "forall": "exists"}


def relativize(node):
    """Push every quantifier's domain into its body (conjunction / implication)."""
    if isinstance(node, Atom):
        return node
    if isinstance(node, And):
        return And(tuple(relativize(a) for a in node.args))
    if isinstance(node, Or):
        return Or(tuple(relativize(a) for a in node.args))
    if isinstance(node, Not):
        return Not(relativize(node.arg))
    if isinstance(node, Implies):
        return Implies(relativize(node.lhs), relativize(node.rhs))
    if isinstance(node, Quant):
        body = relativize(node.body)
        aux, mems = [], []
        for v in node.vars:
            a, m = encode_membership(v)
            aux.extend(a)
            if m != And(()):
                mems.append(m)
        variables = tuple(node.vars) + tuple(aux)
        if not mems:
            return Quant(node.q, variables, body)
        premise = conj(*mems)
        if node.q == "exists":
            return Quant("exists", variables, conj(premise, body))
        return Quant("forall", variables, Implies(premise, body))
    raise TypeError(f"not a formula node: {node!r}")


def _pull(node):
    """Return (prefix, quantifier-free matrix) for a relativised node."""
    if isinstance(node, Atom):
        return [], node
    if isinstance(node, (And, Or)):
        prefix, parts = [], []
        for a in node.args:
            p, m = _pull(a)
            prefix += p
            parts.append(m)
        return prefix, type(node)(tuple(parts))
    if isinstance(node, Not):
        p, m = _pull(node.arg)
        return [(_FLIP[q], vs) for q, vs in p], Not(m)
    if isinstance(node, Implies):
        pa, ma = _pull(node.lhs)
        pb, mb = _pull(node.rhs)
        return [(_FLIP[q], vs) for q, vs in pa] + pb, Implies(ma, mb)
    if isinstance(node, Quant):
        p, m = _pull(node.body)
        return [(node.q, tuple(node.vars))] + p, m
    raise TypeError(f"not a formula node: {node!r}")


def _merge(prefix):
    out = []
    for q, vs in prefix:
        if not vs:
            continue
        if out and out[-1][0] == q:
            out[-1] = (q, out[-1][1] + tuple(vs))
        else:
            out.append((q, tuple(vs)))
    return tuple(out)


def _wrap(f: Formula):
    node = f.body
    for q, vs in reversed(f.prefix):
        node = Quant(q, tuple(vs), node)
    return node


def prenex(f: Formula) -> Formula:
    """Equivalent prenex formula with relativised domains and the same quantifier order."""
    if f.is_prenex:
        return f
    node = relativize(_wrap(f))
    prefix, matrix = _pull(node)
    prefix = _merge(prefix)
    names = [n for _, vs in prefix for v in vs for n in v.real_names()]
    if len(names) != len(set(names)):
        raise ValueError("bound variable names clash; rename before prenexing")
    return Formula(prefix, matrix, f.params, True, f.meta)


def is_closed(f: Formula) -> bool:
    """Every real variable in an atom is bound by the prefix or an inner quantifier."""
    if f.is_prenex and not is_quantifier_free(f.body):
        return False
    return not free_variables(_wrap(f))


@dataclass(frozen=True)
class FormulaStats:
    real_variables: int
    existential_variables: int
    universal_variables: int
    atoms: int
    max_degree: int
    alternations: int

    def as_dict(self):
        return dict(self.__dict__)


def formula_stats(f: Formula) -> FormulaStats:
    if not f.is_prenex:
        raise ValueError("formula_stats needs a prenex formula")
    ex = sum(v.size for q, vs in f.prefix if q == "exists" for v in vs)
    un = sum(v.size for q, vs in f.prefix if q == "forall" for v in vs)
    ats = atoms(f.body)
    qs = [q for q, _ in f.prefix]
    alternations = sum(1 for a, b in zip(qs, qs[1:]) if a != b)
    return FormulaStats(ex + un, ex, un, len(ats), max((a.poly.degree() for a in ats), default=0), alternations)


def with_meta(f: Formula, **meta) -> Formula:
    merged = dict(f.meta)
    merged.update(meta)
    return replace(f, meta=tuple(sorted(merged.items())))
