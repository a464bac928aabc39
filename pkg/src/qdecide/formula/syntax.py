"""Formula syntax: polynomial atoms, Boolean structure, quantified matrix variables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..core.cmatrix import CMatrix, Cx
from .poly import Poly

RELATIONS = (">", ">=", "=")
REAL_FIELD_DOMAINS = {"simplex", "nonneg", "real"}
DOMAIN_TAGS = {
    "complex", "real", "hermitian", "psd", "density", "unitary", "norm_ball",
    "rank", "rank_at_most", "channel_choi", "simplex", "nonneg",
}


@dataclass(frozen=True)
class Domain:
    tag: str
    params: tuple = ()      # sorted (key, value) pairs, values ints or strings

    def __post_init__(self):
        if self.tag not in DOMAIN_TAGS:
            raise ValueError(f"unknown domain tag {self.tag!r}")

    @classmethod
    def of(cls, tag: str, **params) -> "Domain":
        return cls(tag, tuple(sorted(params.items())))

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    def to_json(self):
        return {"tag": self.tag, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj):
        return cls.of(obj["tag"], **obj.get("params", {}))


@dataclass(frozen=True)
class MatrixVar:
    """A quantified matrix (or vector/scalar) variable and its real flattening."""

    name: str
    rows: int
    cols: int
    domain: Domain = Domain("complex")

    @property
    def is_real(self) -> bool:
        return self.domain.tag in REAL_FIELD_DOMAINS

    def _stem(self, i, j) -> str:
        return self.name if self.rows == self.cols == 1 else f"{self.name}_{i}_{j}"

    def re_name(self, i, j) -> str:
        if self.is_real:
            return self._stem(i, j)
        return f"{self._stem(i, j)}_re"

    def im_name(self, i, j) -> str:
        return f"{self._stem(i, j)}_im"

    def real_names(self) -> list[str]:
        out = []
        for i in range(self.rows):
            for j in range(self.cols):
                out.append(self.re_name(i, j))
                if not self.is_real:
                    out.append(self.im_name(i, j))
        return out

    @property
    def size(self) -> int:
        return self.rows * self.cols * (1 if self.is_real else 2)

    def matrix(self) -> CMatrix:
        """Symbolic matrix whose entries are the flattened variables."""
        def entry(i, j):
            re = Poly.var(self.re_name(i, j))
            im = Poly() if self.is_real else Poly.var(self.im_name(i, j))
            return Cx(re, im)
        return CMatrix.from_entries(self.rows, self.cols, entry)

    def hermitian_view(self) -> CMatrix:
        """Matrix built from the upper triangle: real diagonal, conjugate mirror."""
        def entry(i, j):
            if i == j:
                return Cx(Poly.var(self.re_name(i, i)), Poly())
            a, b = (i, j) if i < j else (j, i)
            re = Poly.var(self.re_name(a, b))
            im = Poly() if self.is_real else Poly.var(self.im_name(a, b))
            return Cx(re, im if i < j else -im)
        return CMatrix.from_entries(self.rows, self.cols, entry)

    def flatten(self, m: CMatrix) -> dict:
        """Assignment of the flattened reals from an exact matrix value."""
        if m.shape != (self.rows, self.cols):
            raise ValueError(f"{self.name}: expected shape {(self.rows, self.cols)}, got {m.shape}")
        out = {}
        for i in range(self.rows):
            for j in range(self.cols):
                out[self.re_name(i, j)] = Fraction(m.re[i, j])
                if not self.is_real:
                    out[self.im_name(i, j)] = Fraction(m.im[i, j])
                elif m.im[i, j] != 0:
                    raise ValueError(f"{self.name} is real but the value has an imaginary part")
        return out

    def to_json(self):
        return {"name": self.name, "rows": self.rows, "cols": self.cols, "domain": self.domain.to_json()}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["name"], obj["rows"], obj["cols"], Domain.from_json(obj["domain"]))


def scalar_var(name: str, domain: str = "real") -> MatrixVar:
    return MatrixVar(name, 1, 1, Domain(domain))


# ---------------------------------------------------------------------------
# Boolean nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    poly: Poly
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class Implies:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Quant:
    q: str                 # "exists" or "forall"
    vars: tuple            # MatrixVars
    body: object

    def __post_init__(self):
        if self.q not in ("exists", "forall"):
            raise ValueError("quantifier must be 'exists' or 'forall'")


TRUE = And(())
FALSE = Or(())


def ge(p, q=0) -> Atom:
    return Atom(Poly.lift(p) - q, ">=")


def gt(p, q=0) -> Atom:
    return Atom(Poly.lift(p) - q, ">")


def eq(p, q=0) -> Atom:
    return Atom(Poly.lift(p) - q, "=")


def le(p, q=0) -> Atom:
    return Atom(Poly.lift(q) - p, ">=")


def lt(p, q=0) -> Atom:
    return Atom(Poly.lift(q) - p, ">")


def conj(*parts) -> And:
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.args)
        elif isinstance(p, (list, tuple)):
            flat.extend(conj(*p).args)
        else:
            flat.append(p)
    return And(tuple(flat))


def disj(*parts) -> Or:
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.args)
        else:
            flat.append(p)
    return Or(tuple(flat))


def exists(vars, body) -> Quant:
    return Quant("exists", tuple(vars), body)


def forall(vars, body) -> Quant:
    return Quant("forall", tuple(vars), body)


def iter_nodes(node):
    yield node
    if isinstance(node, (And, Or)):
        for a in node.args:
            yield from iter_nodes(a)
    elif isinstance(node, Not):
        yield from iter_nodes(node.arg)
    elif isinstance(node, Implies):
        yield from iter_nodes(node.lhs)
        yield from iter_nodes(node.rhs)
    elif isinstance(node, Quant):
        yield from iter_nodes(node.body)


def atoms(node) -> list[Atom]:
    return [n for n in iter_nodes(node) if isinstance(n, Atom)]


def is_quantifier_free(node) -> bool:
    return not any(isinstance(n, Quant) for n in iter_nodes(node))


def free_variables(node) -> set[str]:
    """Real variables used by atoms and not bound by an enclosing Quant."""
    if isinstance(node, Atom):
        return node.poly.variables()
    if isinstance(node, (And, Or)):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    if isinstance(node, Not):
        return free_variables(node.arg)
    if isinstance(node, Implies):
        return free_variables(node.lhs) | free_variables(node.rhs)
    if isinstance(node, Quant):
        bound = {n for v in node.vars for n in v.real_names()}
        return free_variables(node.body) - bound
    raise TypeError(f"not a formula node: {node!r}")


def substitute(node, values):
    """Replace variables by exact constants inside every atom."""
    if isinstance(node, Atom):
        return Atom(node.poly.substitute(values), node.rel)
    if isinstance(node, And):
        return And(tuple(substitute(a, values) for a in node.args))
    if isinstance(node, Or):
        return Or(tuple(substitute(a, values) for a in node.args))
    if isinstance(node, Not):
        return Not(substitute(node.arg, values))
    if isinstance(node, Implies):
        return Implies(substitute(node.lhs, values), substitute(node.rhs, values))
    if isinstance(node, Quant):
        return Quant(node.q, node.vars, substitute(node.body, values))
    raise TypeError(f"not a formula node: {node!r}")


def evaluate(node, values) -> bool:
    """Exact truth value of a quantifier-free node under a full assignment."""
    if isinstance(node, Atom):
        v = node.poly.evaluate(values)
        if node.rel == "=":
            return v == 0
        if node.rel == ">=":
            return v >= 0
        return v > 0
    if isinstance(node, And):
        return all(evaluate(a, values) for a in node.args)
    if isinstance(node, Or):
        return any(evaluate(a, values) for a in node.args)
    if isinstance(node, Not):
        return not evaluate(node.arg, values)
    if isinstance(node, Implies):
        return (not evaluate(node.lhs, values)) or evaluate(node.rhs, values)
    raise TypeError("evaluate needs a quantifier-free node")


# ---------------------------------------------------------------------------
# top-level formula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    """A closed formula ``Q_1 X_1 ... Q_k X_k : body``.

    Before prenexing, the domain of each prefix variable still has to be
    imposed; after :func:`prenex` the domain constraints live in ``body`` and
    ``is_prenex`` is set.
    """

    prefix: tuple                     # ((q, (MatrixVar, ...)), ...)
    body: object
    params: tuple = ()                # ((name, CMatrix), ...) for the record
    is_prenex: bool = False
    meta: tuple = field(default=(), compare=False)

    def variables(self) -> list[MatrixVar]:
        return [v for _, block in self.prefix for v in block]

    def real_variables(self) -> list[str]:
        return [n for v in self.variables() for n in v.real_names()]

    def quantifiers(self) -> list[str]:
        return [q for q, _ in self.prefix]

    def is_existential(self) -> bool:
        return all(q == "exists" for q, _ in self.prefix) and is_quantifier_free(self.body)

    def meta_dict(self) -> dict:
        return dict(self.meta)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def poly_to_json(p: Poly):
    return [[str(c), [[v, e] for v, e in m]] for m, c in p.sorted_terms()]


def poly_from_json(obj) -> Poly:
    terms = {}
    for c, mono in obj:
        m = tuple(sorted((v, int(e)) for v, e in mono))
        terms[m] = terms.get(m, 0) + Fraction(c)
    return Poly(terms)


def node_to_json(node):
    if isinstance(node, Atom):
        return {"atom": node.rel, "poly": poly_to_json(node.poly)}
    if isinstance(node, And):
        return {"and": [node_to_json(a) for a in node.args]}
    if isinstance(node, Or):
        return {"or": [node_to_json(a) for a in node.args]}
    if isinstance(node, Not):
        return {"not": node_to_json(node.arg)}
    if isinstance(node, Implies):
        return {"implies": [node_to_json(node.lhs), node_to_json(node.rhs)]}
    if isinstance(node, Quant):
        return {"quant": node.q, "vars": [v.to_json() for v in node.vars], "body": node_to_json(node.body)}
    raise TypeError(f"not a formula node: {node!r}")


def node_from_json(obj):
    if "atom" in obj:
        return Atom(poly_from_json(obj["poly"]), obj["atom"])
    if "and" in obj:
        return And(tuple(node_from_json(a) for a in obj["and"]))
    if "or" in obj:
        return Or(tuple(node_from_json(a) for a in obj["or"]))
    if "not" in obj:
        return Not(node_from_json(obj["not"]))
    if "implies" in obj:
        a, b = obj["implies"]
        return Implies(node_from_json(a), node_from_json(b))
    if "quant" in obj:
        return Quant(obj["quant"], tuple(MatrixVar.from_json(v) for v in obj["vars"]), node_from_json(obj["body"]))
    raise ValueError(f"unrecognised formula node {obj!r}")


def formula_to_json(f: Formula) -> dict:
    return {
        "prefix": [[q, [v.to_json() for v in block]] for q, block in f.prefix],
        "body": node_to_json(f.body),
        "params": {name: m.to_json() for name, m in f.params},
        "prenex": f.is_prenex,
        "meta": dict(f.meta),
    }


def formula_from_json(obj) -> Formula:
    prefix = tuple((q, tuple(MatrixVar.from_json(v) for v in block)) for q, block in obj["prefix"])
    params = tuple((k, CMatrix.from_json(v)) for k, v in obj.get("params", {}).items())
    meta = tuple(sorted(obj.get("meta", {}).items()))
    return Formula(prefix, node_from_json(obj["body"]), params, bool(obj.get("prenex", False)), meta)


def dumps(f: Formula) -> str:
    return json.dumps(formula_to_json(f), indent=1)


def loads(text: str) -> Formula:
    return formula_from_json(json.loads(text))
