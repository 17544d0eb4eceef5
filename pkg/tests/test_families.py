from fractions import Fraction as F
import itertools
import math

import pytest

from negdep import Measure
from negdep.errors import OddGroundSet, ParameterOutOfRange, ParseError, ZeroMass
from negdep.experiments import example_urn_lc, example_urn_rayleigh, mason_sweep, urn_cna_sweep
from negdep.families import (
    Graph, UrnSpec, complete_graph, dowling_app_check, exchangeable_from_rank, forests, gadget_graph,
    graphic_matroid, independence_numbers, mason_check, matroid_measure, nu_family, nu_rank_sequence,
    parse_family, product_measure, spanning_forest_measure, spanning_tree_measure, urn_measure, urn_rank_sequence,
)
from negdep.measure import impose_field, normalize, rank_sequence, symmetry_type
from negdep.checks import check_NC

import oracles


def placements(spec: UrnSpec) -> dict[int, F]:
    """Occupancy law by running over all ``n^m`` ball placements."""
    out: dict[int, F] = {}
    for balls in itertools.product(range(spec.n), repeat=spec.m):
        pr = F(1)
        for b in balls:
            pr *= spec.p[b]
        x = sum(1 << i for i in range(spec.n) if balls.count(i) >= spec.thresholds[i])
        out[x] = out.get(x, F(0)) + pr
    return out


def test_nu_table():
    nu = nu_family(2, F(1, 2))
    from negdep.measure import parse_bitstring
    get = lambda s: nu.weights[parse_bitstring(s, 4)]
    assert get("1000") == 1 and get("0100") == F(1, 4) and get("1100") == F(1, 2)
    assert get("0111") == 1 and get("1111") == 0
    assert symmetry_type(nu).kind == "AlmostExchangeable"
    for bad in (0, 1, F(3, 2)):
        with pytest.raises(ParameterOutOfRange):
            nu_family(2, bad)


def test_nu_rank_sequence_matches_summation():
    for k in (2, 3, 4):
        for beta in (F(1, 2), F(71, 100)):
            assert nu_rank_sequence(k, beta) == tuple(rank_sequence(nu_family(k, beta)))
    r = nu_rank_sequence(2, F(1, 2))
    # rows of the weight table, summed by hand: level 1 is 1 + 3/4, level 2 is 6/2, level 3 is 3/4 + 1
    t = F(7, 4) + 3 + F(7, 4)
    assert r == (0, F(7, 4) / t, 3 / t, F(7, 4) / t, 0)


def test_exchangeable_from_rank():
    assert rank_sequence(exchangeable_from_rank([1, 1, 1])) == (F(1, 3),) * 3
    u = exchangeable_from_rank([math.comb(3, i) for i in range(4)])
    assert normalize(u).weights == (F(1, 8),) * 8
    assert symmetry_type(exchangeable_from_rank([1, 5, 0, 2])).kind == "Exchangeable"
    with pytest.raises(ZeroMass):
        exchangeable_from_rank([0, 0, 0])


def test_urn_examples():
    one = urn_measure(UrnSpec(2, 1, (F(1, 2), F(1, 2))))
    assert normalize(one).weights == (0, F(1, 2), F(1, 2), 0)
    two = urn_measure(UrnSpec(2, 2, (F(1, 2), F(1, 2))))
    assert normalize(two).weights == (0, F(1, 4), F(1, 4), F(1, 2))


def test_urn_field_proportions():
    eps = F(1, 100)
    spec = UrnSpec(3, 2, (F(98, 100), eps, eps))
    mu = normalize(urn_measure(spec))
    ref = placements(spec)
    assert all(mu.weights[x] == ref.get(x, 0) for x in range(8))
    nu = impose_field(mu, (eps, 1, 1))
    z = sum(nu.weights)
    # eta_1 = eta_2 = 1 needs the two balls in urns 1 and 2: 2 * 98/100 * eps, times the field eps
    p12 = (nu.weights[0b011]) / z
    assert p12 == eps * 2 * F(98, 100) * eps / sum(
        w * (eps if x & 1 else 1) for x, w in ref.items())


def test_urn_dp_matches_enumeration(rng):
    for _ in range(25):
        n, m = rng.randint(1, 4), rng.randint(0, 4)
        raw = [rng.randint(0, 5) for _ in range(n)]
        if not any(raw):
            raw[0] = 1
        p = tuple(F(x, sum(raw)) for x in raw)
        th = tuple(rng.randint(1, 2) for _ in range(n))
        spec = UrnSpec(n, m, p, th)
        mu = normalize(urn_measure(spec))
        ref = placements(spec)
        assert all(mu.weights[x] == ref.get(x, 0) for x in range(1 << n))


def test_urn_rank_classes():
    spec = UrnSpec(4, 3, (F(1, 2), F(1, 6), F(1, 6), F(1, 6)), (1, 2, 2, 2))
    r = urn_rank_sequence([(1, F(1, 2), 1), (3, F(1, 6), 2)], 3)
    assert tuple(r) == tuple(rank_sequence(urn_measure(spec)))


def test_triangle_and_k4():
    K3 = complete_graph(3)
    f = spanning_forest_measure(K3)
    assert len(f.support) == 7
    assert rank_sequence(f) == (F(1, 7), F(3, 7), F(3, 7), 0)
    t = normalize(spanning_tree_measure(K3))
    assert sorted(x for x in t.weights if x) == [F(1, 3)] * 3
    assert len(spanning_tree_measure(complete_graph(4)).support) == 16
    # forests by a direct cycle check on 8 subsets
    assert set(forests(K3)) == {x for x in range(8) if x != 7}


def test_gadget_edges():
    assert len(gadget_graph(1).edges) == 3
    assert len(gadget_graph(2).edges) == 5
    assert len(gadget_graph(5).edges) == 11
    with pytest.raises(ParameterOutOfRange):
        gadget_graph(0)


def test_matroids():
    M = graphic_matroid(complete_graph(3))
    assert independence_numbers(M) + (0,) == (1, 3, 3, 0)
    assert matroid_measure(M).weights == spanning_forest_measure(complete_graph(3)).weights
    empty = graphic_matroid(Graph(("a", "b", "c"), ()))
    assert independence_numbers(empty) == (1,)
    assert mason_check(M).ok
    extra = Graph(("0", "1", "2", "3", "4"), (("0", "1"), ("1", "2"), ("0", "2"), ("3", "4")))
    v = dowling_app_check(graphic_matroid(extra))
    assert v.ok
    a = [x for x in independence_numbers(graphic_matroid(extra))]
    assert a == [1, 4, 6, 3]
    with pytest.raises(OddGroundSet):
        dowling_app_check(M)


def test_mason_small():
    out = mason_sweep(4)
    assert out["failures"] == [] and out["graphs"] > 0


def test_product():
    assert normalize(product_measure([F(1, 2)] * 3)).weights == (F(1, 8),) * 8
    p = product_measure([1, F(1, 2)])
    assert all(p.weights[x] == 0 for x in range(4) if not x & 1)
    assert check_NC(p).ok


def test_parse_family():
    assert parse_family("product:p=1/2,1/2").n == 2
    assert parse_family("nu:k=2,beta=1/2").weights == nu_family(2, F(1, 2)).weights
    u = normalize(parse_family("urn:n=2,m=2,p=1/2,1/2"))
    assert u.weights[3] == F(1, 2)
    for bad in ("nope", "nu:k=2", "zzz:k=1", "nu:k=2,beta=1/0"):
        with pytest.raises(ParseError):
            parse_family(bad)


def test_urn_examples_exact():
    lc = example_urn_lc(F(1, 100), 10000)
    assert lc["lc_fails"] and lc["a2"] ** 2 < lc["a1"] * lc["a3"]
    r = example_urn_rayleigh(F(1, 100))
    assert r["strict_positive_correlation"] and r["p11"] > r["p1"] * r["p2"]


def test_urn_cna_small():
    out = urn_cna_sweep(10, seed=5)
    assert out["instances"] == 10
    assert out["dp_mismatches"] == [] and out["cna_failures"] == []
