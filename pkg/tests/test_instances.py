import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import diag
from qdecide.channels import Channel
from qdecide.core.cmatrix import CMatrix
from qdecide.encoders import (
    Additivity,
    Birkhoff,
    Distillability,
    LhvDistribution,
    QuantumRepresentation,
    Separability,
    StateLhv,
    ZeroError,
)
from qdecide.errors import SchemaError
from qdecide.instances import (
    KINDS,
    GadgetInstance,
    MortalityInstance,
    ThresholdInstance,
    instance_from_json,
    instance_kind,
    instance_to_json,
    instances_equal,
    load_instance,
    save_instance,
)
from qdecide.search import PcpInstance

FIXTURES = Path(__file__).parent / "fixtures"
PHI_PLUS = CMatrix.projector([1, 0, 0, 1])


def _box():
    p = np.empty((2, 2, 1, 1), dtype=object)
    for i in range(2):
        for j in range(2):
            p[i, j, 0, 0] = Fraction(1, 4)
    return p


def one_of_each():
    half = CMatrix.identity(2).scale(Fraction(1, 2))
    return [
        Separability(PHI_PLUS, 2, 1, terms=3),
        Distillability(PHI_PLUS, 2, 1),
        LhvDistribution(_box(), 1, 2),
        StateLhv(PHI_PLUS, 2, 1, 2),
        QuantumRepresentation(_box(), 1, 2, 2),
        Birkhoff(Channel.depolarizing(2), 1),
        ZeroError(Channel.identity(2), 2, m=3),
        Additivity(Channel.identity(2), "inf", 2),
        PcpInstance.from_strings([("a", "ab"), ("b", "a")]),
        MortalityInstance([CMatrix.from_rows([[0, 1], [0, 0]])]),
        ThresholdInstance([Channel.identity(2)], diag(1, 0), half, Fraction(1, 3)),
        GadgetInstance(Fraction(1, 2), diag(1, 0), [CMatrix.identity(2)], [1, 0], [1, 0]),
    ]


def test_every_kind_covered():
    assert sorted(instance_kind(i) for i in one_of_each()) == sorted(KINDS)


@pytest.mark.parametrize("inst", one_of_each(), ids=lambda i: instance_kind(i))
def test_roundtrip(inst, tmp_path):
    doc = json.loads(json.dumps(instance_to_json(inst)))
    back = instance_from_json(doc)
    assert instances_equal(inst, back)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    assert instances_equal(load_instance(path), inst)


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.json")), ids=lambda p: p.stem)
def test_fixtures_load_and_roundtrip(path):
    inst = load_instance(path)
    assert instances_equal(instance_from_json(instance_to_json(inst)), inst)


def test_channel_forms_agree():
    u = [[0, 1], [1, 0]]
    a = instance_from_json({"kind": "zero_error", "params": {"channel": {"unitary": u}, "n": 1}})
    b = instance_from_json({"kind": "zero_error", "params": {"channel": {"kraus": [u]}, "n": 1}})
    assert a.channel.transfer == b.channel.transfer


def test_float_literal_rejected():
    doc = {"kind": "mortality", "params": {"matrices": [[[0.5, 0], [0, 1]]]}}
    with pytest.raises(SchemaError, match="floating"):
        instance_from_json(doc)


@pytest.mark.parametrize("doc", [
    {},
    {"kind": "nope"},
    {"kind": "pcp", "params": {"m": 2}},
    {"kind": "pcp", "params": {"m": 2, "tiles": [[[1]]]}},
    {"kind": "mortality", "params": {"matrices": [[["1", "0"], ["1"]]]}},
    {"kind": "zero_error", "params": {"channel": {"name": "amplitude", "d": 2}, "n": 1}},
    {"kind": "additivity", "params": {"channel": {"name": "identity", "d": 2}, "p": "two", "d2": 1}},
    {"kind": "lhv_distribution", "params": {"P": [["1"]], "n": 1, "m": 2}},
])
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        instance_from_json(doc)


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        load_instance(p)
