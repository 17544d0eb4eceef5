"""Scripted experiments shared by the command line and the test suites:
threshold tables for the nu family, the urn examples, seeded random
measure generators, and the small sweeps."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Iterator

from .checks import check_NLC
from .errors import CapExceeded
from .families import (
    UrnSpec, exchangeable_from_rank, graphic_matroid, mason_check, multigraphs, nu_family, nu_rank_sequence,
    product_measure, urn_measure, urn_measure_enumerated, urn_rank_sequence,
)
from .measure import Measure, condition, impose_field, popcount, project
from .rayleigh import check_NAplus, check_ULC, check_unimodal
from .dominance import check_NMP, check_SCP
from .verdict import Budget


# -- thresholds of the nu family ---------------------------------------------------


def _bracket(holds, grid: int = 1000) -> tuple[Fraction, Fraction]:
    """Adjacent grid points ``(lo, hi)`` with ``holds(lo)`` false and ``holds(hi)`` true (monotone predicate)."""
    lo, hi = 1, grid - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(Fraction(mid, grid)):
            hi = mid
        else:
            lo = mid
    return Fraction(lo, grid), Fraction(hi, grid)


def nu_thresholds(k: int) -> dict[str, dict]:
    """Exact threshold predicates in squared, cleared form, with bracketing grid points."""
    q = Fraction(2, k + 1)
    preds = {
        "a": ("NAplus", lambda b: 2 * b * b >= 1),
        "b": ("ULC", lambda b: b >= 1 - q),
        "c": ("Unimodal", lambda b: b >= 1 or (1 - b) ** 2 <= q),
        "d": ("NMP", lambda b: b * b >= 1 - q),
        "e": ("SCP", lambda b: b * b >= 1 - q),
    }
    out = {}
    for key, (prop, pred) in preds.items():
        grid = 10000 if key == "a" else 1000
        lo, hi = _bracket(pred, grid)
        if key == "b":
            lo, hi = 1 - q - Fraction(1, 1000), 1 - q
        out[key] = {"property": prop, "below": lo, "at_or_above": hi}
    return out


def prop41_table(k: int, budget: Budget | None = None) -> dict[str, dict]:
    """Verdicts just below and at/above each threshold."""
    budget = budget or Budget()
    table = nu_thresholds(k)
    for key, row in table.items():
        res = []
        for beta in (row["below"], row["at_or_above"]):
            if key == "a":
                v = check_NAplus(nu_family(k, beta), budget)
            elif key in ("b", "c"):
                seq = nu_rank_sequence(k, beta)
                v = check_ULC(seq) if key == "b" else check_unimodal(seq)
            elif key == "d":
                v = check_NMP(nu_family(k, beta))
            else:
                v = check_SCP(nu_family(k, beta))
            res.append(v)
        row["verdicts"] = res
    return table


# -- urn examples --------------------------------------------------------------------


def example_urn_lc(eps: Fraction = Fraction(1, 100), urns: int = 10_000) -> dict:
    """Three balls, one urn of probability ``eps`` and ``urns`` urns sharing the rest."""
    classes = [(1, eps, 1), (urns, (1 - eps) / urns, 1)]
    r = urn_rank_sequence(classes, 3)
    a1, a2, a3 = r[1], r[2], r[3]
    return {"a1": a1, "a2": a2, "a3": a3, "lc_fails": a2 * a2 < a1 * a3, "rank_length": len(r)}


def example_urn_rayleigh(eps: Fraction = Fraction(1, 100)) -> dict:
    """Two balls, three urns, field ``(eps, 1, 1)``: the two light urns correlate positively."""
    mu = urn_measure(UrnSpec(3, 2, (1 - 2 * eps, eps, eps)))
    nu = impose_field(mu, [eps, Fraction(1), Fraction(1)])
    w = nu.weights
    both = sum(x for i, x in enumerate(w) if i & 0b110 == 0b110)
    first = sum(x for i, x in enumerate(w) if i & 0b010)
    second = sum(x for i, x in enumerate(w) if i & 0b100)
    return {"measure": mu, "p11": both, "p1": first, "p2": second, "strict_positive_correlation": both > first * second}


# -- random generators ------------------------------------------------------------------


def random_rational(rng: random.Random, top: int = 9) -> Fraction:
    return Fraction(rng.randint(1, top), rng.randint(1, top))


def random_measure(n: int, rng: random.Random, sparsity: float = 0.2, top: int = 9) -> Measure:
    while True:
        w = [Fraction(0) if rng.random() < sparsity else random_rational(rng, top) for _ in range(1 << n)]
        if any(w):
            return Measure(n, tuple(w), label="random")


def random_exchangeable(n: int, rng: random.Random) -> Measure:
    """Random rank weights; about half are built ULC, the rest are arbitrary with some zeros."""
    if rng.random() < 0.5:
        t = [random_rational(rng) for _ in range(n)]
        coeffs = [Fraction(1)]
        for x in t:
            coeffs = [a + x * b for a, b in zip(coeffs + [Fraction(0)], [Fraction(0)] + coeffs)]
        return exchangeable_from_rank(coeffs)
    while True:
        a = [Fraction(0) if rng.random() < 0.2 else random_rational(rng) for _ in range(n + 1)]
        if any(a):
            return exchangeable_from_rank(a)


def random_urn_spec(rng: random.Random, max_urns: int = 5, max_balls: int = 4) -> UrnSpec:
    n = rng.randint(2, max_urns)
    m = rng.randint(1, max_balls)
    raw = [Fraction(rng.randint(0, 6)) for _ in range(n)]
    if not any(raw):
        raw[0] = Fraction(1)
    tot = sum(raw)
    p = tuple(x / tot for x in raw)
    th = tuple(rng.randint(1, m) for _ in range(n))
    return UrnSpec(n, m, p, th)


def ncplus_pool(count: int, seed: int) -> Iterator[tuple[str, Measure]]:
    """Measures on four coordinates that are Rayleigh by construction.

    Cycles through products under random fields, exchangeable measures with
    real-rooted rank generating polynomials (hence ULC), and members of the
    nu family with ``2 beta^2 >= 1``, conditioned or projected to four
    coordinates.
    """
    rng = random.Random(seed)
    for idx in range(count):
        kind = idx % 3
        if kind == 0:
            p = [random_rational(rng) for _ in range(4)]
            p = [x / (1 + x) for x in p]
            W = [random_rational(rng) for _ in range(4)]
            yield "product", impose_field(product_measure(p), W)
        elif kind == 1:
            t = [Fraction(0) if rng.random() < 0.15 else random_rational(rng) for _ in range(4)]
            coeffs = [Fraction(1)]
            for x in t:
                coeffs = [a + x * b for a, b in zip(coeffs + [Fraction(0)], [Fraction(0)] + coeffs)]
            yield "exchangeable-ulc", exchangeable_from_rank(coeffs)
        else:
            while True:
                beta = Fraction(rng.randint(7072, 9999), 10000)
                if 2 * beta * beta >= 1:
                    break
            k = rng.choice((2, 3))
            mu = nu_family(k, beta)
            if k == 3:
                coords = rng.sample(range(1, 7), 2)
                if rng.random() < 0.5:
                    try:
                        mu = condition(mu, {c: rng.randint(0, 1) for c in coords})
                    except Exception:
                        mu = project(mu, [c for c in range(1, 7) if c not in coords])
                else:
                    mu = project(mu, [c for c in range(1, 7) if c not in coords])
            yield "nu", mu


# -- sweeps ------------------------------------------------------------------------------


def mason_sweep(max_edges: int = 5) -> dict:
    total = 0
    failures = []
    for G in multigraphs(max_edges):
        total += 1
        v = mason_check(graphic_matroid(G))
        if not v.ok:
            failures.append(G.to_json_dict())
    return {"graphs": total, "failures": failures}


def urn_cna_sweep(count: int, seed: int) -> dict:
    from .checks import check_CNA

    rng = random.Random(seed)
    mismatches, failures = [], []
    for _ in range(count):
        spec = random_urn_spec(rng)
        mu = urn_measure(spec)
        if mu != urn_measure_enumerated(spec):
            mismatches.append(spec)
        if not check_CNA(mu).ok:
            failures.append(spec)
    return {"instances": count, "dp_mismatches": mismatches, "cna_failures": failures}


def nlc_heredity_search(samples: int, seed: int, n: int = 3) -> dict:
    """A measure satisfying NLC with a two-coordinate projection that does not."""
    rng = random.Random(seed)
    for s in range(1, samples + 1):
        mu = random_measure(n, rng, sparsity=0.5)
        if not check_NLC(mu).ok:
            continue
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                pj = project(mu, [i, j])
                v = check_NLC(pj)
                if v.failed:
                    return {"found": True, "samples": s, "measure": mu, "projection": [i, j], "witness": v.witness}
    return {"found": False, "samples": samples}


def lemma41_pool(count: int, seed: int) -> dict:
    from .rayleigh import lemma41_inequality

    bad = [(kind, mu.to_json_dict()) for kind, mu in ncplus_pool(count, seed) if not lemma41_inequality(mu)]
    return {"instances": count, "violations": bad}


def projection_ulc_pool(count: int, seed: int, fields: int = 100, max_size: int = 5) -> dict:
    """ULC of every projection onto at most ``max_size`` coordinates, under sampled fields."""
    from .rayleigh import sample_LCm

    bad = []
    for idx, (kind, mu) in enumerate(ncplus_pool(count, seed)):
        v = sample_LCm(mu, max_size, Budget(samples=fields, seed=seed + idx))
        if v.failed:
            bad.append({"kind": kind, "measure": mu.to_json_dict(), "witness": v.witness})
    return {"instances": count, "fields_per_measure": fields, "violations": bad}


# -- search harnesses ------------------------------------------------------------------


def ulc_margin(seq) -> Fraction:
    """Smallest ratio ``a_i^2 C(n,i-1) C(n,i+1) / (a_{i-1} a_{i+1} C(n,i)^2)`` over interior ``i``.

    At least 1 exactly when the sequence is ULC without internal zeros; 0 for an internal zero.
    """
    a = [Fraction(x) for x in seq]
    n = len(a) - 1
    nz = [i for i, x in enumerate(a) if x]
    if nz and any(not a[i] for i in range(nz[0], nz[-1] + 1)):
        return Fraction(0)
    best = None
    for i in range(1, n):
        den = a[i - 1] * a[i + 1] * math.comb(n, i) ** 2
        if den:
            r = a[i] ** 2 * math.comb(n, i - 1) * math.comb(n, i + 1) / den
            best = r if best is None else min(best, r)
    return Fraction(1) if best is None else best


def _projected_ranks(ints: list[int], n: int, S: tuple[int, ...]) -> list[int]:
    mask = sum(1 << k for k in S)
    r = [0] * (len(S) + 1)
    for idx, w in enumerate(ints):
        if w:
            r[popcount(idx & mask)] += w
    return r


def lcm_gap_search(m: int, count: int, fields: int, seed: int) -> dict:
    """Members of the nu family with ``2 beta^2 >= 1`` under random fields, scored by their worst
    ULC margin over projections onto at most ``m`` coordinates.  Logs only; never certifies."""
    from .checks import sample_fields, weighted_ints

    rng = random.Random(seed)
    k = max(2, (m + 1) // 2)
    if 2 * k > 12:
        raise CapExceeded("lcm-gap search is capped at m <= 12")
    log = []
    for idx in range(count):
        while True:
            beta = Fraction(rng.randint(7072, 10000), 10000)
            if 2 * beta * beta >= 1:
                break
        mu = nu_family(k, beta)
        n = mu.n
        worst = None
        for W in sample_fields(n, Budget(samples=fields, seed=seed + idx), rng):
            ints = weighted_ints(mu, W)
            for s in range(2, min(m, n) + 1):
                for S in itertools.combinations(range(n), s):
                    g = ulc_margin(_projected_ranks(ints, n, S))
                    if worst is None or g < worst[0]:
                        worst = (g, [k_ + 1 for k_ in S], [str(w) for w in W])
        log.append({"beta": beta, "k": k, "worst_margin": worst[0], "worst_margin_float": float(worst[0]),
                    "S": worst[1], "field": worst[2], "violation": worst[0] < 1})
    log.sort(key=lambda e: e["worst_margin"])
    return {"m": m, "instances": count, "fields_per_instance": fields,
            "violations": sum(e["violation"] for e in log), "log": log}


def usf_rayleigh_search(max_edges: int, budget: Budget) -> dict:
    """Uniform spanning forest measures of every small multigraph against the NC+ falsifier."""
    from .families import spanning_forest_measure
    from .rayleigh import check_NCplus

    tally = {"Holds": 0, "Fails": 0, "Unknown": 0}
    fails, unknown = [], []
    for G in multigraphs(max_edges):
        v = check_NCplus(spanning_forest_measure(G), budget)
        tally[v.status.value] += 1
        if v.failed:
            fails.append({"graph": G.to_json_dict(), "verdict": v.to_dict()})
        elif v.unknown_:
            unknown.append(G.to_json_dict())
    return {"max_edges": max_edges, "graphs": sum(tally.values()), "tally": tally, "falsified": fails, "undecided": unknown}


def cnc_vs_cna_search(count: int, seed: int, n: int = 4) -> dict:
    """Random measures that pass CNC, brute-checked for CNA."""
    from .checks import check_CNA, check_CNC

    rng = random.Random(seed)
    cnc = 0
    found = []
    for _ in range(count):
        mu = random_measure(n, rng, sparsity=0.7)
        if not check_CNC(mu).ok:
            continue
        cnc += 1
        v = check_CNA(mu)
        if v.failed:
            found.append({"measure": mu.to_json_dict(), "witness": v.witness})
    return {"n": n, "samples": count, "cnc_measures": cnc, "cnc_not_cna": found}


def random_four_sequences(rng: random.Random, length: int | None = None, top: int = 9):
    """Random ``(alpha, beta, gamma, delta)`` meeting the four-sequence hypotheses (rejection on the mean condition)."""
    n = length or rng.randint(1, 6)
    while True:
        a = [Fraction(rng.randint(0, top)) for _ in range(n)]
        b = [Fraction(rng.randint(0, top)) for _ in range(n)]
        if not any(a) or not any(b):
            continue
        d, c = [], []
        lo = Fraction(0)
        for i in range(n):
            lo += Fraction(rng.randint(0, 3), rng.randint(1, 3))
            d.append(lo)
        prev = Fraction(0)
        for i in range(n):
            prev = max(prev, d[i]) + Fraction(rng.randint(0, 2), rng.randint(1, 4))
            c.append(prev)
        Sa, Sb = sum(a), sum(b)
        if sum(x * y for x, y in zip(a, c)) * Sb <= sum(x * y for x, y in zip(b, d)) * Sa:
            return a, b, c, d
