from fractions import Fraction as F

import pytest

from negdep import Budget, Measure, Status, Verdict
from negdep.errors import Inconsistent, NoVerdict
from negdep.experiments import random_measure
from negdep.families import exchangeable_from_rank, nu_family, product_measure
from negdep.inference import PROPERTIES, RULES, PropertyLedger, audit, deduce, explain

CHEAP = ("NC", "PLC", "NLC", "hNLC", "CNC", "NA", "CNA", "FM", "CFM", "NMP", "SCP", "ULC", "LC", "Unimodal",
         "Exchangeable", "AlmostExchangeable", "ProductRescaling", "APP", "CAPP", "CondDominance", "RankGapFree")

H = Verdict.holds("given")
X = Verdict.fails("given", {})


def ledger(**given) -> PropertyLedger:
    L = PropertyLedger()
    for k, v in given.items():
        L.record(k, v)
    return L


def test_exchangeable_ulc_gives_naplus():
    L = deduce(ledger(Exchangeable=H, ULC=H))
    assert L.status("NAplus") is Status.HOLDS
    assert L.entries["NAplus"].rule == "R6"


def test_almost_exchangeable_ncplus():
    L = deduce(ledger(AlmostExchangeable=H, NCplus=H))
    assert L.status("NAplus") is Status.HOLDS and L.entries["NAplus"].rule == "R5"


def test_nmp_gives_fm():
    L = deduce(ledger(NMP=H))
    assert L.status("FM") is Status.HOLDS and L.entries["FM"].rule == "R7"


def test_contrapositive():
    L = deduce(ledger(Exchangeable=H, ULC=X))
    assert L.status("CNC") is Status.FAILS
    assert L.status("NAplus") is Status.FAILS


def test_inconsistency_is_fatal():
    L = ledger(Exchangeable=H, ULC=H, CNC=X)
    with pytest.raises(Inconsistent):
        L.deduce()


def test_deduce_is_a_fixpoint():
    L = deduce(ledger(Exchangeable=H, ULC=H, NMP=H))
    before = {k: (e.verdict.status, e.rule) for k, e in L.entries.items()}
    deduce(L)
    assert {k: (e.verdict.status, e.rule) for k, e in L.entries.items()} == before


def test_only_known_rules():
    assert {r.id for r in RULES} <= {f"R{i}" for i in range(1, 12)}
    assert all(r.conclusion in PROPERTIES and set(r.premises) <= set(PROPERTIES) for r in RULES)


def test_explain_tree():
    L = deduce(ledger(AlmostExchangeable=H, NCplus=Verdict.holds("branch-and-bound")))
    tree = explain(L, "NAplus")
    assert tree["source"] == "rule R5"
    leaves = {p["property"]: p["source"] for p in tree["premises"]}
    assert leaves == {"AlmostExchangeable": "direct: given", "NCplus": "direct: branch-and-bound"}
    with pytest.raises(NoVerdict):
        explain(L, "SCP")


def test_explain_direct_leaf():
    L = PropertyLedger(product_measure([F(1, 2), F(1, 3)]))
    L.run_direct(["NC"])
    leaf = explain(L, "NC")
    assert leaf["source"].startswith("direct") and "premises" not in leaf


def test_nu6_naplus_provenance():
    L = PropertyLedger(nu_family(6, F(71, 100)), Budget(samples=200))
    L.run_direct(["AlmostExchangeable", "ULC"])
    L.record("NCplus", Verdict.holds("branch-and-bound"))
    deduce(L)
    assert L.status("ULC") is Status.FAILS
    assert explain(L, "NAplus")["source"] == "rule R5"


def test_empty_audit():
    assert audit(PropertyLedger()) == {"agree": [], "disagree": [], "unknown": []}


def test_audit_examples():
    L = PropertyLedger(exchangeable_from_rank([1, 4, 6, 4, 1]))
    L.run_direct(["Exchangeable", "ULC", "CNA"])
    deduce(L)
    rep = audit(L)
    assert "CNA" in rep["agree"] and not rep["disagree"]
    P = PropertyLedger(product_measure([F(1, 3), F(1, 2), F(1, 5)]))
    P.run_direct(["ProductRescaling", "FM"])
    deduce(P)
    assert "FM" in audit(P)["agree"]


def test_unknown_listing():
    L = ledger(NCplus=Verdict.unknown("sampled"))
    rep = audit(deduce(L))
    assert any(u["property"] == "NCplus" and u["cheapest_rule"] for u in rep["unknown"])


def test_soundness_on_random_measures(rng):
    checked = 0
    for _ in range(120):
        L = PropertyLedger(random_measure(4, rng, sparsity=rng.choice([0.0, 0.3, 0.6])), Budget(samples=0))
        L.run_direct(CHEAP)
        deduce(L)
        checked += 1
        assert not audit(L)["disagree"]
    assert checked == 120


def test_capp_with_rank_gap():
    # level 0 and three level-3 configurations: every antipodal comparison is 0 >= 0 or strict
    mu = Measure.from_dict(4, {"0000": F(1, 4), "1110": F(1, 2), "1101": F(4, 3), "1011": F(9, 2)})
    L = PropertyLedger(mu)
    L.run_direct(["CAPP", "ULC", "RankGapFree"])
    assert L.status("CAPP") is Status.HOLDS and L.status("ULC") is Status.FAILS
    assert L.status("RankGapFree") is Status.FAILS
    deduce(L)
    assert not audit(L)["disagree"]
