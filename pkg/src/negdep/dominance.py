"""Stochastic dominance and covering through exact max-flow feasibility."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from ._exact import bitstring, jsonable
from .errors import DimensionMismatch, ZeroProbabilityCondition
from .events import Event
from .measure import Measure, condition, popcount
from .verdict import Verdict


class _Dinic:
    """Integer max-flow; capacities ``None`` are unbounded."""

    def __init__(self, size: int):
        self.size = size
        self.head: list[list[int]] = [[] for _ in range(size)]
        self.to: list[int] = []
        self.cap: list[int | None] = []

    def add(self, u: int, v: int, c: int | None) -> int:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        return len(self.to) - 2

    def _res(self, e: int, bound: int) -> int:
        c = self.cap[e]
        return bound if c is None else c

    def run(self, s: int, t: int, bound: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.size
            level[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for e in self.head[u]:
                    if self._res(e, bound) > 0 and level[self.to[e]] < 0:
                        level[self.to[e]] = level[u] + 1
                        q.append(self.to[e])
            if level[t] < 0:
                return flow
            it = [0] * self.size

            def push(u: int, f: int) -> int:
                if u == t:
                    return f
                while it[u] < len(self.head[u]):
                    e = self.head[u][it[u]]
                    v = self.to[e]
                    r = self._res(e, bound)
                    if r > 0 and level[v] == level[u] + 1:
                        got = push(v, min(f, r))
                        if got:
                            if self.cap[e] is not None:
                                self.cap[e] -= got
                            if self.cap[e ^ 1] is not None:
                                self.cap[e ^ 1] += got
                            return got
                    it[u] += 1
                return 0

            while True:
                f = push(s, bound)
                if not f:
                    break
                flow += f

    def reachable(self, s: int, bound: int) -> set[int]:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                if self._res(e, bound) > 0 and self.to[e] not in seen:
                    seen.add(self.to[e])
                    q.append(self.to[e])
        return seen


@dataclass(frozen=True)
class Coupling:
    """Joint law of ``(eta, zeta)`` with the two given marginals."""

    n: int
    relation: str  # "dominates" | "covers"
    weights: dict[tuple[int, int], Fraction]

    def marginals(self) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
        left: dict[int, Fraction] = {}
        right: dict[int, Fraction] = {}
        for (a, b), w in self.weights.items():
            left[a] = left.get(a, Fraction(0)) + w
            right[b] = right.get(b, Fraction(0)) + w
        return left, right

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "relation": self.relation,
            "pairs": [
                {"upper": bitstring(a, self.n), "lower": bitstring(b, self.n), "w": jsonable(w)}
                for (a, b), w in sorted(self.weights.items())
            ],
        }

    to_dict = to_json_dict


def _geq(a: int, b: int) -> bool:
    return a & b == b


def _covers_or_equal(a: int, b: int) -> bool:
    return a == b or (a & b == b and popcount(a ^ b) == 1)


def _flow(mu: Measure, nu: Measure, related: Callable[[int, int], bool], relation: str):
    if mu.n != nu.n:
        raise DimensionMismatch(f"measures on {mu.n} and {nu.n} coordinates")
    a, b = mu.int_weights, nu.int_weights
    A, B = mu.int_total, nu.int_total
    top = [x for x in range(1 << mu.n) if a[x]]
    bot = [y for y in range(1 << nu.n) if b[y]]
    s, t = 0, 1
    net = _Dinic(2 + len(top) + len(bot))
    arcs = {}
    for u, x in enumerate(top):
        net.add(s, 2 + u, a[x] * B)
    for v, y in enumerate(bot):
        net.add(2 + len(top) + v, t, b[y] * A)
    for u, x in enumerate(top):
        for v, y in enumerate(bot):
            if related(x, y):
                arcs[(x, y)] = net.add(2 + u, 2 + len(top) + v, None)
    total = A * B
    value = net.run(s, t, total)
    if value == total:
        weights = {}
        for key, e in arcs.items():
            f = net.cap[e ^ 1]
            if f:
                weights[key] = Fraction(f, total)
        return True, Coupling(mu.n, relation, weights)
    R = net.reachable(s, total)
    reach = [top[u] for u in range(len(top)) if 2 + u in R]
    return False, reach


def _down_closure(points, n: int) -> int:
    members = 0
    for x in range(1 << n):
        if any(_geq(p, x) for p in points):
            members |= 1 << x
    return members


def stochastic_dominates(mu: Measure, nu: Measure):
    """``(True, Coupling)`` if ``mu`` dominates ``nu``, else ``(False, Event)``
    with an up-set ``A`` such that ``mu(A) < nu(A)``."""
    ok, out = _flow(mu, nu, _geq, "dominates")
    if ok:
        return True, out
    full = (1 << (1 << mu.n)) - 1
    return False, Event(mu.n, full ^ _down_closure(out, mu.n))


def stochastically_covers(mu: Measure, nu: Measure):
    """``(True, Coupling)`` with ``eta = zeta`` or ``eta`` covering ``zeta``
    almost surely; otherwise ``(False, info)`` describing a Hall deficiency."""
    ok, out = _flow(mu, nu, _covers_or_equal, "covers")
    if ok:
        return True, out
    X = sorted(out)
    nbr = sorted({y for y in range(1 << nu.n) if nu.weights[y] and any(_covers_or_equal(x, y) for x in X)})
    info = {
        "upper_set": [bitstring(x, mu.n) for x in X],
        "reachable_lower": [bitstring(y, mu.n) for y in nbr],
        "upper_mass": mu.prob(X),
        "lower_mass": nu.prob(nbr),
    }
    return False, info


def level_measure(mu: Measure, level: int) -> Measure | None:
    w = tuple(x if popcount(i) == level else Fraction(0) for i, x in enumerate(mu.weights))
    if not any(w):
        return None
    return Measure(mu.n, w, mu.label, mu.coords)


def check_NMP(mu: Measure) -> Verdict:
    levels = {l: level_measure(mu, l) for l in range(mu.n + 1)}
    levels = {l: m for l, m in levels.items() if m is not None}
    keys = sorted(levels)
    checked = 0
    for k in keys:
        for l in keys:
            if l <= k:
                continue
            checked += 1
            ok, out = stochastic_dominates(levels[l], levels[k])
            if not ok:
                return Verdict.fails("level-flows", {
                    "upper_level": l, "lower_level": k, "upset": out,
                    "upper_mass": levels[l].prob(out), "lower_mass": levels[k].prob(out),
                })
    return Verdict.holds("level-flows", {"level_pairs": checked})


def _both_conditionings(mu: Measure, i: int):
    try:
        return condition(mu, {i: 0}), condition(mu, {i: 1})
    except ZeroProbabilityCondition:
        return None


def check_SCP(mu: Measure) -> Verdict:
    checked = 0
    for i in range(1, mu.n + 1):
        pair = _both_conditionings(mu, i)
        if pair is None:
            continue
        checked += 1
        ok, out = stochastically_covers(*pair)
        if not ok:
            return Verdict.fails("covering-flows", {"coordinate": i, "cut": out})
    return Verdict.holds("covering-flows", {"coordinates": checked})


def check_cond_dominance(mu: Measure) -> Verdict:
    """``mu(. | eta_i = 0)`` dominates ``mu(. | eta_i = 1)`` for every ``i`` where both exist."""
    checked = 0
    for i in range(1, mu.n + 1):
        pair = _both_conditionings(mu, i)
        if pair is None:
            continue
        checked += 1
        ok, out = stochastic_dominates(*pair)
        if not ok:
            return Verdict.fails("conditional-flows", {"coordinate": i, "upset": out,
                                                       "mass_given_0": pair[0].prob(out), "mass_given_1": pair[1].prob(out)})
    return Verdict.holds("conditional-flows", {"coordinates": checked})


def upset_dominates(mu: Measure, nu: Measure) -> bool:
    """Reference check over every up-set (``n <= 6``)."""
    import numpy as np

    from .checks import _mass_of_events
    from .events import upset_masks

    if mu.n != nu.n:
        raise DimensionMismatch("measures on different coordinate counts")
    masks = upset_masks(mu.n)
    a = np.array(mu.int_weights, dtype=object)
    b = np.array(nu.int_weights, dtype=object)
    ma = _mass_of_events(a, masks, mu.n)
    mb = _mass_of_events(b, masks, nu.n)
    A, B = mu.int_total, nu.int_total
    return all(int(x) * B >= int(y) * A for x, y in zip(ma, mb))
