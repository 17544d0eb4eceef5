"""Property ledger: direct verdicts plus closure under the implication rules.

Every rule is a Horn implication ``P1 and ... and Pk => C`` between property
names.  Forward use needs every premise to hold; the contrapositive fires
when ``C`` fails and all premises but one hold, making the last one fail.
Equivalences are entered as two implications.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from ._exact import jsonable
from .errors import CapExceeded, Inconsistent, NegDepError, NoVerdict, OddDimension
from .measure import Measure, popcount, symmetry_type
from .verdict import Budget, Status, Verdict

LCM_RANGE = (2, 3, 4, 5)

PROPERTIES = (
    "NC", "PLC", "NLC", "hNLC", "CNC", "NA", "CNA", "NCplus", "NAplus", "FM", "CFM", "FMplus",
    "NMP", "SCP", "ULC", "LC", "Unimodal", *(f"LCm({m})" for m in LCM_RANGE), "APP", "CAPP",
    "Exchangeable", "AlmostExchangeable", "ProductRescaling", "hNLCplus", "CondDominance", "RankGapFree",
)


@dataclass(frozen=True)
class Rule:
    id: str
    premises: tuple[str, ...]
    conclusion: str
    citation: str

    def __str__(self):
        return f"{self.id}: {' & '.join(self.premises)} => {self.conclusion}"


def _iff(rid: str, cond: tuple[str, ...], a: str, b: str, cite: str) -> list[Rule]:
    return [Rule(rid, cond + (a,), b, cite), Rule(rid, cond + (b,), a, cite)]


def _build_rules() -> tuple[Rule, ...]:
    rules: list[Rule] = []
    rules += _iff("R1", (), "CNC", "hNLC", "CNC is equivalent to the hereditary negative lattice condition")
    rules += _iff("R2", (), "NCplus", "hNLCplus", "NC+ is equivalent to the hereditary negative lattice condition under fields")
    rules += [
        Rule("R3", ("CNC", "CFM"), "CNA", "CNC together with CFM gives CNA"),
        Rule("R3", ("NCplus", "FMplus"), "NAplus", "NC+ together with FM+ gives NA+"),
        Rule("R4", ("AlmostExchangeable",), "FMplus", "almost exchangeable measures are FM+"),
    ]
    # the exchangeable rule is tried before its almost exchangeable weakening
    ex = ("Exchangeable",)
    group = ("CNC", "CNA", "NCplus", "NAplus", "ULC")
    for a in group:
        for b in group:
            if a != b:
                rules.append(Rule("R6", ex + (a,), b, "for exchangeable measures CNC, CNA, NC+, NA+ and ULC coincide"))
    ae = ("AlmostExchangeable",)
    rules += _iff("R5", ae, "CNC", "CNA", "for almost exchangeable measures CNC and CNA coincide")
    rules += _iff("R5", ae, "NCplus", "NAplus", "for almost exchangeable measures NC+ and NA+ coincide")
    rules += [
        Rule("R7", ("NMP",), "FM", "the normalized matching property implies FM"),
        Rule("R8", ("ProductRescaling",), "NMP", "rank rescalings of product measures have the NMP"),
        # without the gap-free premise CAPP can hold with 0 >= 0 everywhere while the rank sequence has an internal zero
        Rule("R9", ("CAPP", "RankGapFree"), "ULC", "the conditional antipodal pairs property implies ULC"),
    ]
    for m in LCM_RANGE:
        rules.append(Rule("R10", ("NCplus",), f"LCm({m})", "NC+ implies LC[5], hence LC[m] for m <= 5"))
    for m in (5, 4, 3):
        rules.append(Rule("R10", (f"LCm({m})",), f"LCm({m - 1})", "LC[m] implies LC[m-1]"))
    for m in (2, 3):
        rules.append(Rule("R10", (f"LCm({m})",), "NCplus", "NC+, LC[2] and LC[3] are equivalent"))
    for a, b in (("NAplus", "CNA"), ("CNA", "CNC"), ("NAplus", "NCplus"), ("NCplus", "CNC"), ("CNA", "NA"),
                 ("NA", "NC"), ("CNC", "NC"), ("FMplus", "CFM"), ("CFM", "FM"), ("ULC", "LC"), ("LC", "Unimodal"),
                 ("NAplus", "CondDominance"), ("Exchangeable", "AlmostExchangeable"), ("ULC", "RankGapFree")):
        rules.append(Rule("R11", (a,), b, "definitional implication"))
    return tuple(rules)


RULES: tuple[Rule, ...] = _build_rules()


# -- direct checkers -----------------------------------------------------------


def check_symmetry(mu: Measure, which: str) -> Verdict:
    sym = symmetry_type(mu)
    if which == "Exchangeable":
        ok = sym.kind == "Exchangeable"
    else:
        ok = sym.kind in ("Exchangeable", "AlmostExchangeable")
    cert = {"symmetry": str(sym)}
    return Verdict.holds("symmetry-scan", cert) if ok else Verdict.fails("symmetry-scan", cert)


def check_rank_gap_free(mu: Measure) -> Verdict:
    """The rank sequence has no internal zeros."""
    from .measure import rank_sequence
    from .rayleigh import _internal_zero

    r = rank_sequence(mu)
    z = _internal_zero(r)
    if z is None:
        return Verdict.holds("rank-scan", {"rank_sequence": list(r)})
    return Verdict.fails("rank-scan", {"index": z, "rank_sequence": list(r)})


def check_product_rescaling(mu: Measure) -> Verdict:
    """Is ``mu(eta)`` proportional to ``a_{|eta|} prod w_i^{eta_i}`` (after dropping constant coordinates)?"""
    n = mu.n
    supp = mu.support
    always1 = [i for i in range(n) if all((x >> i) & 1 for x in supp)]
    always0 = [i for i in range(n) if not any((x >> i) & 1 for x in supp)]
    free = [i for i in range(n) if i not in always1 and i not in always0]
    fixed = sum(1 << i for i in always1)
    m = len(free)

    def full(local: int) -> int:
        return fixed | sum(1 << free[t] for t in range(m) if (local >> t) & 1)

    w = [mu.weights[full(x)] for x in range(1 << m)]
    levels = {popcount(x) for x in range(1 << m) if w[x]}
    for x in range(1 << m):
        if popcount(x) in levels and not w[x]:
            return Verdict.fails("ratio-fit", {"reason": "support is not a union of levels", "free_coords": [i + 1 for i in free]})
    mids = [k for k in sorted(levels) if 0 < k < m]
    if not mids:
        return Verdict.holds("ratio-fit", {"levels": sorted(levels)})
    k = mids[0]
    ratio = [Fraction(1)] * m
    for t in range(1, m):
        # a (k-1)-subset avoiding free positions 0 and t
        rest = [u for u in range(m) if u not in (0, t)][: k - 1]
        base = sum(1 << u for u in rest)
        ratio[t] = w[base | (1 << t)] / w[base | 1]
    a: dict[int, Fraction] = {}
    for x in range(1 << m):
        if not w[x]:
            continue
        prod = Fraction(1)
        for t in range(m):
            if (x >> t) & 1:
                prod *= ratio[t]
        val = w[x] / prod
        if a.setdefault(popcount(x), val) != val:
            return Verdict.fails("ratio-fit", {"reason": "weights are not a product within a level", "level": popcount(x)})
    return Verdict.holds("ratio-fit", {"field": [str(r) for r in ratio], "levels": sorted(levels)})


def _direct_registry() -> dict[str, Callable[[Measure, Budget], Verdict]]:
    from . import checks, dominance, rayleigh

    reg: dict[str, Callable[[Measure, Budget], Verdict]] = {
        "NC": lambda mu, b: checks.check_NC(mu),
        "PLC": lambda mu, b: checks.check_PLC(mu),
        "NLC": lambda mu, b: checks.check_NLC(mu),
        "hNLC": lambda mu, b: checks.check_hNLC(mu),
        "CNC": lambda mu, b: checks.check_CNC(mu),
        "NA": lambda mu, b: checks.check_NA(mu),
        "CNA": lambda mu, b: checks.check_CNA(mu),
        "NCplus": lambda mu, b: rayleigh.check_NCplus(mu, b),
        "NAplus": lambda mu, b: rayleigh.falsify_NAplus(mu, b),
        "FM": lambda mu, b: checks.check_FM(mu),
        "CFM": lambda mu, b: checks.check_CFM(mu),
        "FMplus": lambda mu, b: checks.falsify_FMplus(mu, b),
        "NMP": lambda mu, b: dominance.check_NMP(mu),
        "SCP": lambda mu, b: dominance.check_SCP(mu),
        "ULC": lambda mu, b: rayleigh.check_ULC(mu),
        "LC": lambda mu, b: rayleigh.check_LC_measure(mu),
        "Unimodal": lambda mu, b: rayleigh.check_unimodal(mu),
        "APP": lambda mu, b: rayleigh.check_APP(mu),
        "CAPP": lambda mu, b: rayleigh.check_CAPP(mu),
        "Exchangeable": lambda mu, b: check_symmetry(mu, "Exchangeable"),
        "AlmostExchangeable": lambda mu, b: check_symmetry(mu, "AlmostExchangeable"),
        "ProductRescaling": lambda mu, b: check_product_rescaling(mu),
        "CondDominance": lambda mu, b: dominance.check_cond_dominance(mu),
        "RankGapFree": lambda mu, b: check_rank_gap_free(mu),
    }
    for m in LCM_RANGE:
        reg[f"LCm({m})"] = lambda mu, b, m=m: rayleigh.check_LCm(mu, m, b)
    return reg


# -- the ledger ----------------------------------------------------------------


@dataclass
class Entry:
    verdict: Verdict
    source: str  # "direct" | "derived"
    rule: str | None = None
    premises: tuple[str, ...] = ()
    citation: str | None = None


@dataclass
class PropertyLedger:
    measure: Measure | None = None
    budget: Budget = field(default_factory=Budget)
    direct: dict[str, Verdict] = field(default_factory=dict)
    entries: dict[str, Entry] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)

    # -- recording ----------------------------------------------------------

    def record(self, prop: str, verdict: Verdict) -> None:
        if prop not in PROPERTIES:
            raise KeyError(f"unknown property {prop!r}")
        self.direct[prop] = verdict
        cur = self.entries.get(prop)
        if cur is not None and not cur.verdict.unknown_ and not verdict.unknown_ and cur.verdict.status != verdict.status:
            raise Inconsistent(prop, cur, verdict)
        if cur is None or cur.verdict.unknown_:
            self.entries[prop] = Entry(verdict, "direct")

    def run_direct(self, props: Iterable[str]) -> None:
        reg = _direct_registry()
        if self.measure is None:
            raise NoVerdict("the ledger has no measure to check")
        for prop in props:
            if prop in self.direct or prop in self.skipped:
                continue
            try:
                self.record(prop, reg[prop](self.measure, self.budget))
            except (CapExceeded, OddDimension) as exc:
                self.skipped[prop] = f"{type(exc).__name__}: {exc}"

    def status(self, prop: str) -> Status | None:
        e = self.entries.get(prop)
        return None if e is None else e.verdict.status

    def get(self, prop: str) -> Verdict | None:
        e = self.entries.get(prop)
        return None if e is None else e.verdict

    # -- closure --------------------------------------------------------------

    def _derive(self, prop: str, status: Status, rule: Rule, premises: tuple[str, ...]) -> bool:
        cur = self.entries.get(prop)
        if cur is not None and cur.verdict.status == status:
            return False
        if cur is not None and not cur.verdict.unknown_:
            raise Inconsistent(prop, cur, (status.value, rule.id, premises))
        v = Verdict(status, f"rule {rule.id}", certificate={"rule": rule.id, "premises": list(premises)} if status is Status.HOLDS else None,
                    witness={"rule": rule.id, "premises": list(premises)} if status is Status.FAILS else None)
        self.entries[prop] = Entry(v, "derived", rule.id, premises, rule.citation)
        return True

    def deduce(self) -> PropertyLedger:
        changed = True
        while changed:
            changed = False
            for rule in RULES:
                st = [self.status(p) for p in rule.premises]
                if all(s is Status.HOLDS for s in st):
                    changed |= self._derive(rule.conclusion, Status.HOLDS, rule, rule.premises)
                if self.status(rule.conclusion) is Status.FAILS:
                    open_ = [p for p, s in zip(rule.premises, st) if s is not Status.HOLDS]
                    if len(open_) == 1:
                        rest = tuple(p for p in rule.premises if p != open_[0]) + (rule.conclusion,)
                        changed |= self._derive(open_[0], Status.FAILS, rule, rest)
        return self

    # -- reporting -------------------------------------------------------------

    def explain(self, prop: str) -> dict:
        e = self.entries.get(prop)
        if e is None:
            raise NoVerdict(prop)
        node = {"property": prop, "status": e.verdict.status.value}
        if e.source == "direct":
            node["source"] = f"direct: {e.verdict.method}"
            return node
        node["source"] = f"rule {e.rule}"
        node["citation"] = e.citation
        node["premises"] = [self.explain(p) for p in e.premises]
        return node

    def audit(self) -> dict:
        agree, disagree = [], []
        for prop, v in self.direct.items():
            e = self.entries[prop]
            if v.unknown_:
                continue
            derived = self._rederive(prop)
            if derived is None:
                continue
            (agree if derived == v.status else disagree).append(prop)
        unknowns = []
        for prop in PROPERTIES:
            e = self.entries.get(prop)
            if e is not None and not e.verdict.unknown_:
                continue
            if e is None and prop not in self.direct and prop not in self.skipped:
                continue
            cands = [r for r in RULES if r.conclusion == prop]
            best = min(cands, key=lambda r: sum(self.status(p) is not Status.HOLDS for p in r.premises), default=None)
            unknowns.append({"property": prop, "cheapest_rule": str(best) if best else None,
                             "missing": [p for p in best.premises if self.status(p) is not Status.HOLDS] if best else []})
        return {"agree": sorted(agree), "disagree": sorted(disagree), "unknown": unknowns}

    def _rederive(self, prop: str) -> Status | None:
        """Status the rules alone give ``prop``, from the other properties' current verdicts."""
        shadow = PropertyLedger(None, self.budget)
        for p, e in self.entries.items():
            if p != prop and e.source == "direct":
                shadow.entries[p] = e
        try:
            shadow.deduce()
        except Inconsistent:
            return None
        return shadow.status(prop)

    def to_dict(self) -> dict:
        props = {}
        for prop in PROPERTIES:
            e = self.entries.get(prop)
            if e is None:
                if prop in self.skipped:
                    props[prop] = {"status": "Unknown", "skipped": self.skipped[prop]}
                continue
            d = e.verdict.to_dict()
            d["provenance"] = self.explain(prop)
            props[prop] = d
        return {"properties": props}

    def dumps(self) -> str:
        return json.dumps(jsonable(self.to_dict()), indent=1, sort_keys=True)


def deduce(ledger: PropertyLedger) -> PropertyLedger:
    return ledger.deduce()


def explain(ledger: PropertyLedger, prop: str) -> dict:
    return ledger.explain(prop)


def audit(ledger: PropertyLedger) -> dict:
    return ledger.audit()
