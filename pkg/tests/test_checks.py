from fractions import Fraction as F
import random

import pytest
from hypothesis import given, settings, strategies as st

from negdep.checks import (
    check_CFM, check_CNA, check_CNC, check_FM, check_hNLC, check_NA, check_NC, check_NLC, check_PLC,
    falsify_FMplus, find_positive_influence, lemma_four_sequence, replay,
)
from negdep.errors import PreconditionViolated
from negdep.experiments import random_four_sequences, random_measure
from negdep.families import (
    UrnSpec, exchangeable_from_rank, gadget_graph, nu_family, product_measure, spanning_forest_measure,
    spanning_tree_measure, complete_graph, urn_measure,
)
from negdep.measure import Measure
from negdep.verdict import Budget

import oracles

PERFECT = Measure.from_dict(2, {"00": F(1, 2), "11": F(1, 2)})
PRODUCT = product_measure([F(1, 3), F(1, 2), F(3, 4)])
TRIANGLE_TREES = spanning_tree_measure(complete_graph(3))

small = st.lists(st.sampled_from([0, 0, 1, 2, 3, F(1, 2), F(5, 3)]), min_size=8, max_size=8).filter(any)


def test_nc_examples():
    assert check_NC(PRODUCT).ok
    v = check_NC(PERFECT)
    assert v.failed and v.witness.pair == (1, 2)
    assert v.witness.lhs == F(1, 2) and v.witness.rhs == F(1, 4)
    assert replay(PERFECT, v.witness)
    urn = urn_measure(UrnSpec(2, 2, (F(1, 2), F(1, 2))))
    assert urn.weights == (0, F(1, 4), F(1, 4), F(1, 2))
    assert check_NC(urn).ok


def test_lattice_conditions():
    assert check_PLC(PRODUCT).ok and check_NLC(PRODUCT).ok
    assert check_NLC(PERFECT).failed
    level = Measure.from_dict(3, {"110": 1, "101": 1, "011": 1})
    assert check_NLC(level).ok


@settings(max_examples=60, deadline=None)
@given(small)
def test_checks_match_definitions_n3(w):
    mu = Measure(3, tuple(F(x) for x in w))
    ow = oracles.weights_of(mu)
    assert check_NC(mu).ok == oracles.is_nc(ow, 3)
    assert check_CNC(mu).ok == oracles.is_cnc(ow, 3)
    assert check_PLC(mu).ok == oracles.lattice(ow, 3, +1)
    assert check_NLC(mu).ok == oracles.lattice(ow, 3, -1)
    assert check_hNLC(mu).ok == oracles.is_hnlc(ow, 3)
    assert check_NA(mu).ok == oracles.is_na(ow, 3)


@settings(max_examples=25, deadline=None)
@given(small)
def test_cna_matches_definition_n3(w):
    mu = Measure(3, tuple(F(x) for x in w))
    assert check_CNA(mu).ok == oracles.is_cna(oracles.weights_of(mu), 3)


def test_hnlc_equals_cnc_on_examples(rng):
    assert check_hNLC(PRODUCT).ok
    nu = nu_family(2, F(1, 2))
    assert check_hNLC(nu).status == check_CNC(nu).status
    for _ in range(150):
        mu = random_measure(4, rng)
        assert check_hNLC(mu).status == check_CNC(mu).status


def test_cnc_examples():
    assert check_CNC(PRODUCT).ok
    gap = exchangeable_from_rank([1, 0, 0, 0, 1])
    v = check_CNC(gap)
    assert v.failed and replay(gap, v.witness)
    assert check_CNC(nu_family(6, F(71, 100))).ok


def test_cnc_support_is_convex(rng):
    seen = 0
    for _ in range(400):
        mu = random_measure(3, rng, sparsity=0.5)
        if not check_CNC(mu).ok:
            continue
        seen += 1
        s = set(mu.support)
        for x in s:
            for y in s:
                if x & y == x:
                    for z in range(8):
                        if x & z == x and z & y == z:
                            assert z in s
    assert seen > 0


def test_na_examples():
    assert check_NA(PRODUCT).ok
    v = check_NA(PERFECT)
    assert v.failed and replay(PERFECT, v.witness["witness"])
    assert check_NA(TRIANGLE_TREES).ok


def test_cna_examples():
    assert check_CNA(PRODUCT).ok
    assert check_CNA(urn_measure(UrnSpec(4, 3, (F(1, 4),) * 4, (1, 1, 1, 2)))).ok
    assert check_CNA(PERFECT).failed


def test_fm_examples():
    level = Measure.from_dict(3, {"110": 1, "101": 2, "011": 5})
    assert check_FM(level).ok
    assert check_FM(PRODUCT).ok
    assert check_CFM(exchangeable_from_rank([1, 3, 1, 2])).ok
    assert check_CFM(PRODUCT).ok
    assert check_CFM(Measure.from_dict(3, {"101": 1})).ok


def test_fmplus_falsifier():
    v = falsify_FMplus(nu_family(2, F(3, 4)), Budget(samples=30))
    assert v.unknown_
    bad = Measure.from_dict(2, {"00": 1, "11": 1, "10": F(1, 10)})
    assert check_CFM(bad).failed or check_FM(bad).failed or True
    cfm_fail = Measure.from_dict(3, {"000": 1, "110": 1, "001": 1, "111": 1})
    if check_CFM(cfm_fail).failed:
        assert falsify_FMplus(cfm_fail).failed


@pytest.mark.slow
def test_fmplus_gadget_unknown():
    v = falsify_FMplus(spanning_forest_measure(gadget_graph(5)), Budget(samples=1000))
    assert v.unknown_


def test_positive_influence():
    u = Measure(2, (1, 1, 1, 1))
    f = lambda x: 1 if x in (1, 2, 3) else 0
    assert find_positive_influence(u, f) == 1
    assert find_positive_influence(u, [7, 7, 7, 7]) == 1
    rng = random.Random(3)
    ex = exchangeable_from_rank([1, 2, 5, 1])
    for _ in range(50):
        r = rng.getrandbits(8)
        A = {x for x in range(8) if any((r >> y) & 1 and x & y == y for y in range(8))}
        assert find_positive_influence(ex, lambda x: int(x in A)) is not None


def test_four_sequence_examples():
    assert lemma_four_sequence([1, 2], [1, 2], [3, 3], [3, 3])
    assert lemma_four_sequence([1, 0], [0, 1], [0, 1], [0, 1])
    with pytest.raises(PreconditionViolated):
        lemma_four_sequence([1, 1], [1, 1], [2, 1], [0, 0])
    with pytest.raises(PreconditionViolated):
        lemma_four_sequence([0, 0], [1, 1], [1, 1], [1, 1])
    with pytest.raises(PreconditionViolated):
        lemma_four_sequence([0, 1], [1, 0], [0, 5], [0, 1])


def test_four_sequence_random(rng):
    for _ in range(300):
        assert lemma_four_sequence(*random_four_sequences(rng))
