from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from negdep import Measure
from negdep.dominance import (
    check_cond_dominance, check_NMP, check_SCP, stochastic_dominates, stochastically_covers, upset_dominates,
)
from negdep.errors import DimensionMismatch
from negdep.families import gadget_graph, nu_family, product_measure, spanning_forest_measure
from negdep.measure import condition

import oracles

weights3 = st.lists(st.integers(0, 4), min_size=8, max_size=8).filter(any)


def test_single_coordinate():
    hi = Measure(1, (F(3, 10), F(7, 10)))
    half = Measure(1, (1, 1))
    ok, c = stochastic_dominates(hi, half)
    assert ok
    left, right = c.marginals()
    assert left == {0: F(3, 10), 1: F(7, 10)} and right == {0: F(1, 2), 1: F(1, 2)}
    ok, ev = stochastic_dominates(half, hi)
    assert not ok and half.prob(ev) < hi.prob(ev)


def test_reflexive(rng):
    for _ in range(20):
        mu = Measure(3, tuple(rng.randint(0, 3) for _ in range(7)) + (1,))
        ok, c = stochastic_dominates(mu, mu)
        assert ok and all(a & b == b for a, b in c.weights)
        assert stochastically_covers(mu, mu)[0]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        stochastic_dominates(Measure(1, (1, 1)), Measure(2, (1, 1, 1, 1)))


@settings(max_examples=80, deadline=None)
@given(weights3, weights3)
def test_flow_matches_upsets(a, b):
    mu, nu = Measure(3, tuple(a)), Measure(3, tuple(b))
    flow = stochastic_dominates(mu, nu)[0]
    assert flow == upset_dominates(mu, nu) == oracles.dominates(oracles.weights_of(mu), oracles.weights_of(nu), 3)


def test_covers_examples():
    level1 = Measure.from_dict(3, {"100": 1, "010": 1, "001": 1})
    c0, c1 = condition(level1, {1: 0}), condition(level1, {1: 1})
    ok, coup = stochastically_covers(c0, c1)
    assert ok and sum(coup.weights.values()) == 1
    low = Measure.from_dict(2, {"00": 1})
    top = Measure.from_dict(2, {"11": 1})
    ok, info = stochastically_covers(top, low)
    assert not ok and info["upper_mass"] > info["lower_mass"]
    assert stochastic_dominates(top, low)[0]


def test_nmp_scp_products(rng):
    for _ in range(10):
        mu = product_measure([F(rng.randint(1, 9), 10) for _ in range(4)])
        assert check_NMP(mu).ok
        assert check_SCP(mu).ok
        assert check_cond_dominance(mu).ok


def test_nu4_thresholds():
    assert check_NMP(nu_family(4, F(71, 100))).failed
    assert check_SCP(nu_family(4, F(71, 100))).failed
    assert check_SCP(nu_family(4, F(4, 5))).ok
    assert check_NMP(nu_family(4, F(4, 5))).ok


def test_nu2_covering_needs_beta_plus_square():
    # beta^2 >= 1/3 but beta + beta^2 < 1: the configuration 100 has nowhere to go
    v = check_SCP(nu_family(2, F(3, 5)))
    assert v.failed and v.witness["coordinate"] == 2
    assert check_SCP(nu_family(2, F(31, 50))).ok
    assert check_NMP(nu_family(2, F(3, 5))).ok


def test_gadget_nmp():
    v = check_NMP(spanning_forest_measure(gadget_graph(5)))
    assert v.failed
    assert v.witness["upper_mass"] < v.witness["lower_mass"]
    assert check_NMP(spanning_forest_measure(gadget_graph(2))).ok
