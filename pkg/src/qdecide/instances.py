"""JSON instance files: one instance per file, exact scalars as strings."""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .channels import Channel, transfer_from_choi
from .core.cmatrix import CMatrix
from .core.scalars import format_exact, parse_rational
from .encoders import (
    Additivity,
    Birkhoff,
    Distillability,
    LhvDistribution,
    QuantumRepresentation,
    Separability,
    StateLhv,
    ZeroError,
    problem_name,
)
from .errors import SchemaError
from .search import PcpInstance

FORMULA_KINDS = ("separability", "n_distillable", "lhv_distribution", "state_lhv",
                 "quantum_representation", "birkhoff", "zero_error", "additivity")
KINDS = FORMULA_KINDS + ("pcp", "mortality", "gadget", "threshold")


class MortalityInstance:
    def __init__(self, matrices):
        self.matrices = list(matrices)

    def __eq__(self, other):
        return isinstance(other, MortalityInstance) and self.matrices == other.matrices


class ThresholdInstance:
    def __init__(self, channels, rho, phi, lam):
        self.channels, self.rho, self.phi, self.lam = list(channels), rho, phi, Fraction(lam)

    def __eq__(self, other):
        return (isinstance(other, ThresholdInstance) and self.rho == other.rho and self.phi == other.phi
                and self.lam == other.lam and [c.transfer for c in self.channels]
                == [c.transfer for c in other.channels])


class GadgetInstance:
    """Inputs of the channel construction (the bundle itself is rebuilt on load)."""

    def __init__(self, lam, phi, matrices, x, y, precision=256):
        self.lam = Fraction(lam)
        self.phi = phi
        self.matrices = list(matrices)
        self.x = [Fraction(v) for v in x]
        self.y = [Fraction(v) for v in y]
        self.precision = int(precision)

    def __eq__(self, other):
        return isinstance(other, GadgetInstance) and vars(self) == vars(other)


# ---------------------------------------------------------------------------
# field readers
# ---------------------------------------------------------------------------


def _need(params, key, kind):
    if key not in params:
        raise SchemaError(f"{kind}: missing field {key!r}")
    return params[key]


def _int(params, key, kind, default=None, minimum=1):
    if key not in params:
        if default is None:
            raise SchemaError(f"{kind}: missing field {key!r}")
        return default
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise SchemaError(f"{kind}: {key!r} must be an integer >= {minimum}")
    return v


def _scalar(v, where):
    if isinstance(v, float):
        raise SchemaError(f"{where}: floating literal {v!r}; write exact scalars as strings")
    try:
        return parse_rational(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: bad scalar {v!r}") from exc


def read_matrix(obj, where="matrix") -> CMatrix:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{where}: expected a row-major array of rows")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise SchemaError(f"{where}: ragged rows")
    rows = []
    for r in obj:
        row = []
        for e in r:
            if isinstance(e, list):
                if len(e) != 2:
                    raise SchemaError(f"{where}: complex entries are [re, im]")
                row.append([_scalar(e[0], where), _scalar(e[1], where)])
            else:
                row.append(_scalar(e, where))
        rows.append(row)
    return CMatrix.from_rows(rows)


def write_matrix(m: CMatrix):
    return m.to_json()


def read_channel(obj, where="channel") -> Channel:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if "kraus" in obj:
        return Channel.from_kraus([read_matrix(k, where) for k in obj["kraus"]])
    if "choi" in obj:
        return transfer_from_choi(read_matrix(obj["choi"], where))
    if "name" in obj:
        d = _int(obj, "d", where)
        name = obj["name"]
        if name == "identity":
            return Channel.identity(d)
        if name == "depolarizing":
            return Channel.depolarizing(d)
        if name == "transposition":
            return Channel.transposition(d)
        raise SchemaError(f"{where}: unknown channel name {name!r}")
    if "unitary" in obj:
        return Channel.unitary(read_matrix(obj["unitary"], where))
    raise SchemaError(f"{where}: give one of kraus, choi, unitary or name")


def write_channel(t: Channel):
    return {"choi": write_matrix(t.choi())}


def _read_distribution(obj, n, m, kind):
    arr = np.asarray(obj, dtype=object)
    if arr.shape != (m, m, n, n):
        raise SchemaError(f"{kind}: P must be nested as [i][j][k][l] with shape {(m, m, n, n)}")
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(*arr.shape):
        out[idx] = _scalar(arr[idx], kind)
    return out


def _write_distribution(p):
    arr = np.asarray(p, dtype=object)
    return np.vectorize(lambda v: format_exact(Fraction(v)), otypes=[object])(arr).tolist()


def _word_list(obj, where):
    if not isinstance(obj, list) or not all(isinstance(a, int) and not isinstance(a, bool) for a in obj):
        raise SchemaError(f"{where}: words are integer arrays")
    return tuple(obj)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def instance_from_json(doc):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError("instance file needs a 'kind'")
    kind = doc["kind"]
    p = doc.get("params", {})
    if kind not in KINDS:
        raise SchemaError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    if kind == "separability":
        terms = p.get("terms")
        return Separability(read_matrix(_need(p, "rho", kind)), _int(p, "d", kind), _int(p, "n", kind),
                            _int(p, "terms", kind) if terms is not None else None)
    if kind == "n_distillable":
        return Distillability(read_matrix(_need(p, "rho", kind)), _int(p, "d", kind), _int(p, "n", kind))
    if kind == "lhv_distribution":
        n, m = _int(p, "n", kind), _int(p, "m", kind)
        return LhvDistribution(_read_distribution(_need(p, "P", kind), n, m, kind), n, m)
    if kind == "state_lhv":
        return StateLhv(read_matrix(_need(p, "rho", kind)), _int(p, "d", kind), _int(p, "n", kind),
                        _int(p, "m", kind))
    if kind == "quantum_representation":
        n, m = _int(p, "n", kind), _int(p, "m", kind)
        return QuantumRepresentation(_read_distribution(_need(p, "P", kind), n, m, kind), n, m,
                                     _int(p, "d", kind))
    if kind == "birkhoff":
        terms = p.get("terms")
        return Birkhoff(read_channel(_need(p, "channel", kind)), _int(p, "n", kind),
                        _int(p, "terms", kind) if terms is not None else None)
    if kind == "zero_error":
        return ZeroError(read_channel(_need(p, "channel", kind)), _int(p, "n", kind), _int(p, "m", kind, 2))
    if kind == "additivity":
        pv = _need(p, "p", kind)
        if pv != "inf" and (isinstance(pv, bool) or not isinstance(pv, int)):
            raise SchemaError("additivity: p must be an integer or 'inf'")
        return Additivity(read_channel(_need(p, "channel", kind)), pv, _int(p, "d2", kind))
    if kind == "pcp":
        tiles = _need(p, "tiles", kind)
        if not isinstance(tiles, list) or not tiles:
            raise SchemaError("pcp: tiles must be a nonempty list of [top, bottom] pairs")
        enc = []
        for t in tiles:
            if not isinstance(t, list) or len(t) != 2:
                raise SchemaError("pcp: each tile is [top, bottom]")
            enc.append((_word_list(t[0], kind), _word_list(t[1], kind)))
        return PcpInstance(tuple(enc), _int(p, "m", kind))
    if kind == "mortality":
        return MortalityInstance([read_matrix(m, kind) for m in _need(p, "matrices", kind)])
    if kind == "threshold":
        return ThresholdInstance([read_channel(c, kind) for c in _need(p, "channels", kind)],
                                 read_matrix(_need(p, "rho", kind)), read_matrix(_need(p, "phi", kind)),
                                 _scalar(_need(p, "lambda", kind), kind))
    # gadget
    return GadgetInstance(_scalar(_need(p, "lambda", kind), kind), read_matrix(_need(p, "phi", kind)),
                          [read_matrix(m, kind) for m in _need(p, "matrices", kind)],
                          [_scalar(v, kind) for v in _need(p, "x", kind)],
                          [_scalar(v, kind) for v in _need(p, "y", kind)],
                          _int(p, "precision", kind, 256))


def instance_kind(inst) -> str:
    if isinstance(inst, PcpInstance):
        return "pcp"
    if isinstance(inst, MortalityInstance):
        return "mortality"
    if isinstance(inst, ThresholdInstance):
        return "threshold"
    if isinstance(inst, GadgetInstance):
        return "gadget"
    return problem_name(inst)


def instance_to_json(inst) -> dict:
    kind = instance_kind(inst)
    if kind == "separability":
        p = {"rho": write_matrix(inst.rho), "d": inst.d, "n": inst.n}
        if inst.terms is not None:
            p["terms"] = inst.terms
    elif kind == "n_distillable":
        p = {"rho": write_matrix(inst.rho), "d": inst.d, "n": inst.n}
    elif kind == "lhv_distribution":
        p = {"P": _write_distribution(inst.p), "n": inst.n, "m": inst.m}
    elif kind == "state_lhv":
        p = {"rho": write_matrix(inst.rho), "d": inst.d, "n": inst.n, "m": inst.m}
    elif kind == "quantum_representation":
        p = {"P": _write_distribution(inst.p), "n": inst.n, "m": inst.m, "d": inst.d}
    elif kind == "birkhoff":
        p = {"channel": write_channel(inst.channel), "n": inst.n}
        if inst.terms is not None:
            p["terms"] = inst.terms
    elif kind == "zero_error":
        p = {"channel": write_channel(inst.channel), "n": inst.n, "m": inst.m}
    elif kind == "additivity":
        p = {"channel": write_channel(inst.channel), "p": inst.p, "d2": inst.d2}
    elif kind == "pcp":
        p = {"tiles": [[list(a), list(b)] for a, b in inst.tiles], "m": inst.m}
    elif kind == "mortality":
        p = {"matrices": [write_matrix(m) for m in inst.matrices]}
    elif kind == "threshold":
        p = {"channels": [write_channel(c) for c in inst.channels], "rho": write_matrix(inst.rho),
             "phi": write_matrix(inst.phi), "lambda": format_exact(inst.lam)}
    else:
        p = {"lambda": format_exact(inst.lam), "phi": write_matrix(inst.phi),
             "matrices": [write_matrix(m) for m in inst.matrices],
             "x": [format_exact(v) for v in inst.x], "y": [format_exact(v) for v in inst.y],
             "precision": inst.precision}
    return {"kind": kind, "params": p}


def instances_equal(a, b) -> bool:
    """Structural equality (channels compared by transfer matrix)."""
    if type(a) is not type(b):
        return False
    ja, jb = instance_to_json(a), instance_to_json(b)
    return ja == jb


def load_instance(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_json(doc)


def save_instance(inst, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_json(inst), fh, indent=1)
        fh.write("\n")
