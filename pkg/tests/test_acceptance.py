"""Acceptance criteria 1-18, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from negdep import Budget, Status
from negdep.checks import check_CNA, check_CNC, check_hNLC, check_NC, lemma_four_sequence, replay
from negdep.dominance import check_NMP, check_SCP, stochastic_dominates, upset_dominates
from negdep.events import upset_masks
from negdep.experiments import (
    example_urn_lc, example_urn_rayleigh, lemma41_pool, mason_sweep, nlc_heredity_search, projection_ulc_pool,
    random_exchangeable, random_four_sequences, random_measure, urn_cna_sweep,
)
from negdep.families import gadget_graph, nu_family, nu_rank_sequence, spanning_forest_measure
from negdep.inference import PropertyLedger, deduce, explain
from negdep.measure import Measure, impose_field
from negdep.rayleigh import check_NCplus, check_ULC, check_unimodal

import oracles

SEED = 20240611


def _line(num: int, ok: bool, secs: float, note: str = "") -> None:
    msg = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} ({secs:.2f}s){' ' + note if note else ''}"
    print("\n" + msg if "pytest" in sys.modules and not __name__ == "__main__" else msg, flush=True)


@pytest.fixture
def criterion(capsys):
    def run(num, body):
        t0 = time.perf_counter()
        try:
            note = body()
        except BaseException:
            with capsys.disabled():
                _line(num, False, time.perf_counter() - t0)
            raise
        with capsys.disabled():
            _line(num, True, time.perf_counter() - t0, note or "")
    return run


# -- bodies -------------------------------------------------------------------------


def c01():
    assert check_ULC(nu_rank_sequence(6, F(71, 100))).failed
    assert check_ULC(nu_rank_sequence(6, F(5, 7))).ok
    assert check_ULC(nu_rank_sequence(6, F(5, 7) - F(1, 1000))).failed
    assert check_ULC(nu_family(6, F(71, 100))).failed


def c02():
    # the unimodality boundary is (1 - beta)^2 = 2/24
    assert (1 - F(71, 100)) ** 2 > F(2, 24) > (1 - F(72, 100)) ** 2
    assert check_unimodal(nu_rank_sequence(23, F(71, 100))).failed
    assert check_unimodal(nu_rank_sequence(23, F(72, 100))).ok


def c03():
    low, high = nu_family(4, F(71, 100)), nu_family(4, F(4, 5))
    assert check_NMP(low).failed and check_SCP(low).failed
    assert check_NMP(high).ok and check_SCP(high).ok


def c04():
    mu = nu_family(2, F(1, 2))
    v = check_NCplus(mu)
    assert v.failed
    w = v.witness
    assert replay(mu, w)
    assert w.lhs > w.rhs
    return f"method={v.method}"


def c05():
    mu = nu_family(6, F(71, 100))
    assert 2 * F(71, 100) ** 2 >= 1
    assert check_CNC(mu).ok
    b = Budget(samples=10_000, seed=SEED)
    nc = check_NCplus(mu, b)
    assert not nc.failed
    L = PropertyLedger(mu, b)
    L.run_direct(["AlmostExchangeable", "CNC"])
    L.record("NCplus", nc)
    deduce(L)
    na = L.get("NAplus")
    if nc.ok:
        assert na.status is Status.HOLDS
        tree = explain(L, "NAplus")
        assert tree["source"] == "rule R5"
        assert {p["property"] for p in tree["premises"]} == {"AlmostExchangeable", "NCplus"}
    else:
        assert na is None or na.unknown_
        assert nc.evidence
    return f"NCplus={nc.status.value} via {nc.method}"


def c06():
    rng = random.Random(SEED)
    for _ in range(1000):
        mu = random_measure(4, rng, sparsity=0.2)
        assert check_CNC(mu).status == check_hNLC(mu).status


def c07():
    rng = random.Random(SEED)
    for _ in range(200):
        mu = random_exchangeable(rng.randint(1, 5), rng)
        u, c, a = check_ULC(mu).status, check_CNC(mu).status, check_CNA(mu).status
        assert u == c == a


def c08():
    out = urn_cna_sweep(100, SEED)
    assert out["instances"] == 100
    assert out["dp_mismatches"] == [] and out["cna_failures"] == []


def c09():
    out = example_urn_lc(F(1, 100), 10_000)
    assert out["a2"] ** 2 < out["a1"] * out["a3"]


def c10():
    eps = F(1, 100)
    out = example_urn_rayleigh(eps)
    assert out["p11"] > out["p1"] * out["p2"]
    w = impose_field(out["measure"], (eps, 1, 1)).weights
    # urns 0, 1, 2 are coordinates 1, 2, 3; ratios 2e^2 : (1-2e)^2 e : e^2 + 2e^2(1-2e)
    both, none_ = w[0b110] + w[0b111], w[0b000] + w[0b001]
    one = w[0b010] + w[0b011]
    assert both * (1 - 2 * eps) ** 2 * eps == none_ * 2 * eps**2
    assert one * 2 * eps**2 == both * (eps**2 + 2 * eps**2 * (1 - 2 * eps))
    assert check_NC(impose_field(out["measure"], (eps, 1, 1))).failed
    assert check_NCplus(out["measure"]).failed


def c11():
    v = check_NMP(spanning_forest_measure(gadget_graph(5)))
    assert v.failed
    A = v.witness["upset"]
    assert v.witness["upper_mass"] < v.witness["lower_mass"]
    assert check_NMP(spanning_forest_measure(gadget_graph(2))).ok


def c12():
    out = lemma41_pool(500, SEED)
    assert out["instances"] == 500 and out["violations"] == []


def c13():
    out = projection_ulc_pool(500, SEED, fields=100, max_size=5)
    assert out["violations"] == []


def c14():
    out = nlc_heredity_search(100_000, SEED)
    assert out["found"]
    mu = out["measure"]
    w = oracles.weights_of(mu)
    assert oracles.lattice(w, 3, -1)
    i, j = out["projection"]
    assert not oracles.lattice(oracles.project(w, 3, [i, j]), 2, -1)
    return f"found after {out['samples']} samples"


def _filter_count(n: int) -> int:
    pts = 1 << n
    count = 0
    for S in range(1 << pts):
        if all(not (S >> x) & 1 or all((S >> (x | (1 << i))) & 1 for i in range(n)) for x in range(pts)):
            count += 1
    return count


def c15():
    for n, want in ((1, 3), (2, 6), (3, 20), (4, 168)):
        assert len(upset_masks(n)) == want == _filter_count(n)
    first = sorted(int(x) for x in upset_masks(5))
    upset_masks.cache_clear() if hasattr(upset_masks, "cache_clear") else None
    again = sorted(int(x) for x in upset_masks(5))
    assert len(first) == 7581 and first == again


def c16():
    rng = random.Random(SEED)
    for _ in range(10_000):
        assert lemma_four_sequence(*random_four_sequences(rng))


def c17():
    out = mason_sweep(5)
    assert out["failures"] == []
    return f"{out['graphs']} graphs"


def c18():
    rng = random.Random(SEED)
    for _ in range(500):
        mu, nu = random_measure(3, rng), random_measure(3, rng)
        flow = stochastic_dominates(mu, nu)[0]
        assert flow == upset_dominates(mu, nu)
        assert flow == oracles.dominates(oracles.weights_of(mu), oracles.weights_of(nu), 3)


BODIES = [c01, c02, c03, c04, c05, c06, c07, c08, c09, c10, c11, c12, c13, c14, c15, c16, c17, c18]


@pytest.mark.parametrize("num", range(1, 19), ids=[f"criterion_{k:02d}" for k in range(1, 19)])
def test_criterion(num, criterion):
    criterion(num, BODIES[num - 1])


if __name__ == "__main__":
    failed = 0
    for num, body in enumerate(BODIES, 1):
        t0 = time.perf_counter()
        try:
            note = body()
            _line(num, True, time.perf_counter() - t0, note or "")
        except Exception as exc:
            failed += 1
            _line(num, False, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")
    sys.exit(1 if failed else 0)
