from fractions import Fraction as F
import json

import pytest
from hypothesis import given, settings, strategies as st

from negdep.errors import DimensionMismatch, ParseError, ZeroMass, ZeroProbabilityCondition
from negdep.families import nu_family, product_measure
from negdep.measure import (
    INFINITY, ExternalField, Measure, complement_measure, condition, impose_field, measure_from_json, normalize,
    project, rank_rescale, rank_sequence, symmetry_type,
)

import oracles


def M(n, table):
    return Measure.from_dict(n, table)


weights = st.lists(st.fractions(min_value=0, max_value=5, max_denominator=7), min_size=8, max_size=8).filter(any)


def test_encoding_coordinate_one_is_leftmost():
    mu = M(3, {"100": 1})
    assert mu.weights[1] == 1
    assert mu.to_json_dict()["weights"] == [{"set": "100", "w": "1"}]


def test_normalize_examples():
    mu = Measure(2, (1, 1, 2, 2))
    assert normalize(mu).weights == (F(1, 6), F(1, 6), F(1, 3), F(1, 3))
    u = Measure(2, (F(1, 4),) * 4)
    assert normalize(u) is u
    with pytest.raises(ZeroMass):
        Measure(2, (0, 0, 0, 0))


@given(weights)
def test_normalize_idempotent(w):
    mu = Measure(3, tuple(w))
    assert normalize(normalize(mu)) == normalize(mu)
    assert normalize(mu).total == 1


def test_condition_examples():
    u = Measure(2, (1, 1, 1, 1))
    assert condition(u, {2: 1}).weights == (F(1, 2), F(1, 2))
    mu = M(2, {"00": 1, "11": 1})
    c = condition(mu, {1: 1})
    assert c.weights == (0, 1) and c.coords == (2,)
    # survivors are relabelled 1..m; original labels stay in coords
    with pytest.raises(ZeroProbabilityCondition):
        condition(c, {1: 0})
    with pytest.raises(ZeroProbabilityCondition):
        condition(mu, {1: 1, 2: 0})
    with pytest.raises(DimensionMismatch):
        condition(mu, {3: 1})


def test_impose_field_examples():
    u = Measure(2, (1, 1, 1, 1))
    assert impose_field(u, [2, 1]).weights == (F(1, 6), F(1, 3), F(1, 6), F(1, 3))
    assert impose_field(u, ["Infinity", 1]).weights == (F(1, 2), F(1, 2))
    assert impose_field(u, [0, 1]).coords == (2,)
    mu = Measure(2, (1, 2, 3, 4))
    assert impose_field(mu, [1, 1]) == normalize(mu)
    with pytest.raises(DimensionMismatch):
        impose_field(u, [1])


def test_field_boundary_parsing():
    W = ExternalField((F(0), "inf", 3))
    assert W.boundary == {1: 0, 2: 1}
    assert W.entries[1] is INFINITY


def test_project_examples():
    u = Measure(2, (1, 1, 1, 1))
    assert normalize(project(u, [1])).weights == (F(1, 2), F(1, 2))
    mu = M(2, {"00": F(1, 2), "11": F(1, 2)})
    assert project(mu, [1]).weights == (F(1, 2), F(1, 2))
    assert project(mu, [1, 2]) is mu


@given(weights, st.sets(st.integers(1, 3), min_size=1))
def test_project_matches_oracle(w, J):
    mu = Measure(3, tuple(w))
    J = sorted(J)
    expect = oracles.project(oracles.weights_of(mu), 3, J)
    got = project(mu, J)
    assert all(got.weights[y] == expect.get(y, 0) for y in range(1 << len(J)))


def test_rank_sequence_examples():
    assert rank_sequence(Measure(3, (1,) * 8)) == (F(1, 8), F(3, 8), F(3, 8), F(1, 8))
    assert rank_sequence(M(2, {"11": 1})) == (0, 0, 1)
    # direct summation of the nu family table at k = 2, beta = 1/2
    b = F(1, 2)
    raw = [0, 1 + 3 * b * b, 6 * b, 3 * b * b + 1, 0]
    tot = sum(raw)
    assert rank_sequence(nu_family(2, b)) == tuple(F(x) / tot for x in raw)


def test_rank_rescale_examples():
    mu = Measure(3, (1, 2, 3, 4, 5, 6, 7, 8))
    assert rank_rescale(mu, [1, 1, 1, 1]) == normalize(mu)
    lvl = rank_rescale(Measure(2, (1, 1, 1, 1)), [0, 1, 0])
    assert lvl.weights == (0, F(1, 2), F(1, 2), 0)
    p = product_measure([F(1, 2)] * 3)
    assert rank_rescale(p, [1, 2, 4, 8]) == impose_field(p, [2, 2, 2])


@given(weights)
def test_complement_reverses_rank_sequence(w):
    mu = Measure(3, tuple(w))
    assert rank_sequence(complement_measure(mu)) == tuple(reversed(rank_sequence(mu)))


def test_complement_examples():
    assert complement_measure(M(2, {"00": 1})) == M(2, {"11": 1})
    u = Measure(3, (1,) * 8)
    assert complement_measure(u) == u


def test_symmetry_type_examples():
    assert symmetry_type(Measure(3, (1,) * 8)).kind == "Exchangeable"
    s = symmetry_type(nu_family(3, F(1, 2)))
    assert (s.kind, s.pivot) == ("AlmostExchangeable", 1)
    assert symmetry_type(M(3, {"000": 1, "110": 1})).kind == "AlmostExchangeable"
    assert symmetry_type(M(3, {"000": 1, "110": 2, "100": 3})).kind == "Neither"


def test_json_round_trip_and_errors():
    mu = nu_family(2, F(1, 3))
    assert measure_from_json(mu.dumps()) == mu
    assert measure_from_json(mu.dumps(zeros=True)) == mu
    bad = [
        '{"n": 2, "weights": [{"set": "10", "w": "1/0"}]}',
        '{"n": 2, "weights": [{"set": "10", "w": "1"}, {"set": "10", "w": "2"}]}',
        '{"n": 2, "weights": [{"set": "1", "w": "1"}]}',
        '{"n": 2, "weights": [{"set": "10", "w": 0.5}]}',
        '{"n": 2}',
        'not json',
    ]
    for doc in bad:
        with pytest.raises(ParseError):
            measure_from_json(doc)
    with pytest.raises(ZeroMass):
        measure_from_json('{"n": 1, "weights": [{"set": "1", "w": "0"}]}')
    json.loads(mu.dumps())
