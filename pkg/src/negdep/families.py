"""Constructors for the measure families: products, exchangeable measures,
the almost exchangeable family ``nu(k, beta)``, competing urns, spanning
forests and trees, and graphic matroids."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from ._exact import bitstring, parse_bitstring, parse_rational
from .errors import CapExceeded, Disconnected, InvalidDistribution, ParameterOutOfRange, ParseError, ZeroMass
from .measure import MAX_N, Measure, popcount

URN_MAX_BALLS = 12
URN_MAX_URNS = 10
MATROID_EXCHANGE_CAP = 12


def _rat(x) -> Fraction:
    return x if isinstance(x, Fraction) else parse_rational(x)


def product_measure(p: Sequence) -> Measure:
    p = [_rat(x) for x in p]
    if any(not 0 <= x <= 1 for x in p):
        raise ParameterOutOfRange("product marginals must lie in [0, 1]")
    n = len(p)
    w = []
    for idx in range(1 << n):
        x = Fraction(1)
        for i in range(n):
            x *= p[i] if (idx >> i) & 1 else 1 - p[i]
        w.append(x)
    return Measure(n, tuple(w), label=f"product({','.join(map(str, p))})")


def exchangeable_from_rank(a: Sequence) -> Measure:
    """Exchangeable measure whose rank sequence is proportional to ``a``."""
    a = [_rat(x) for x in a]
    if any(x < 0 for x in a):
        raise ParameterOutOfRange("rank weights must be nonnegative")
    if not any(a):
        raise ZeroMass("rank weights are all zero")
    n = len(a) - 1
    w = tuple(a[popcount(i)] / math.comb(n, popcount(i)) for i in range(1 << n))
    return Measure(n, w, label="exchangeable")


# -- the nu(k, beta) family ----------------------------------------------------


def _check_nu(k: int, beta: Fraction) -> None:
    if k < 2:
        raise ParameterOutOfRange("k must be at least 2")
    if not 0 < beta < 1:
        raise ParameterOutOfRange("beta must lie strictly between 0 and 1")


def nu_weight(idx: int, k: int, beta: Fraction) -> Fraction:
    size = popcount(idx)
    first = idx & 1
    if size == k - 1:
        return Fraction(1) if first else beta * beta
    if size == k:
        return beta
    if size == k + 1:
        return beta * beta if first else Fraction(1)
    return Fraction(0)


def nu_family(k: int, beta) -> Measure:
    """The almost exchangeable measure ``nu(k, beta)`` on ``2k`` coordinates (pivot 1)."""
    beta = _rat(beta)
    _check_nu(k, beta)
    if 2 * k > MAX_N:
        raise CapExceeded(f"nu({k}, .) has 2^{2 * k} configurations; use nu_rank_sequence")
    w = tuple(nu_weight(i, k, beta) for i in range(1 << (2 * k)))
    return Measure(2 * k, w, label=f"nu(k={k},beta={beta})")


def nu_rank_sequence(k: int, beta) -> tuple[Fraction, ...]:
    """Normalized rank sequence of ``nu(k, beta)`` by counting, for any ``k``."""
    beta = _rat(beta)
    _check_nu(k, beta)
    n = 2 * k
    r = [Fraction(0)] * (n + 1)
    r[k - 1] = math.comb(n - 1, k - 2) + beta**2 * math.comb(n - 1, k - 1)
    r[k] = beta * math.comb(n, k)
    r[k + 1] = beta**2 * math.comb(n - 1, k) + math.comb(n - 1, k + 1)
    t = sum(r)
    return tuple(x / t for x in r)


# -- competing urns ----------------------------------------------------------


@dataclass(frozen=True)
class UrnSpec:
    """``m`` i.i.d. balls over ``n`` urns with law ``p``; urn ``i`` counts as
    occupied when it holds at least ``thresholds[i]`` balls (all 1: ordinary)."""

    n: int
    m: int
    p: tuple[Fraction, ...]
    thresholds: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        p = self.p
        if p and isinstance(p[0], (list, tuple)):
            rows = [tuple(_rat(x) for x in row) for row in p]
            if any(row != rows[0] for row in rows):
                raise InvalidDistribution("balls must be identically distributed")
            p = rows[0]
        p = tuple(_rat(x) for x in p)
        if len(p) != self.n:
            raise InvalidDistribution(f"p has {len(p)} entries for {self.n} urns")
        if any(x < 0 for x in p) or sum(p) != 1:
            raise InvalidDistribution("p must be a probability vector")
        object.__setattr__(self, "p", p)
        th = self.thresholds or (1,) * self.n
        th = tuple(int(a) for a in th)
        if len(th) != self.n or any(a < 1 for a in th):
            raise InvalidDistribution("thresholds must be n positive integers")
        object.__setattr__(self, "thresholds", th)
        if self.m < 0:
            raise InvalidDistribution("ball count must be nonnegative")


def urn_measure(spec: UrnSpec) -> Measure:
    """Exact law of the occupancy indicators, by dynamic programming over urns.

    State: (balls placed so far, occupancy bits so far) -> sum of
    ``prod p_i^c_i / c_i!``; the final weight is ``m!`` times the state mass
    at ``m`` balls, i.e. the multinomial sum.
    """
    n, m = spec.n, spec.m
    if m > URN_MAX_BALLS or n > URN_MAX_URNS:
        raise CapExceeded(f"urn DP capped at m<={URN_MAX_BALLS}, n<={URN_MAX_URNS}")
    fact = [math.factorial(c) for c in range(m + 1)]
    state: dict[tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    for i in range(n):
        q, a = spec.p[i], spec.thresholds[i]
        powers = [q**c / fact[c] for c in range(m + 1)]
        nxt: dict[tuple[int, int], Fraction] = {}
        for (used, bits), val in state.items():
            for c in range(m - used + 1):
                if not powers[c]:
                    continue
                key = (used + c, bits | ((c >= a) << i))
                nxt[key] = nxt.get(key, Fraction(0)) + val * powers[c]
        state = nxt
    w = [Fraction(0)] * (1 << n)
    for (used, bits), val in state.items():
        if used == m:
            w[bits] += val * fact[m]
    return Measure(n, tuple(w), label=f"urn(n={n},m={m})")


def urn_measure_enumerated(spec: UrnSpec) -> Measure:
    """Oracle: sum over all ``n^m`` ball placements."""
    n, m = spec.n, spec.m
    if n**m > 10**6:
        raise CapExceeded("placement enumeration capped at 10^6 placements")
    w = [Fraction(0)] * (1 << n)
    for sigma in itertools.product(range(n), repeat=m):
        pr = Fraction(1)
        counts = [0] * n
        for j in sigma:
            pr *= spec.p[j]
            counts[j] += 1
        if not pr:
            continue
        bits = sum(1 << i for i in range(n) if counts[i] >= spec.thresholds[i])
        w[bits] += pr
    return Measure(n, tuple(w), label=f"urn-enum(n={n},m={m})")


def _poly_mul(a: list[Fraction], b: list[Fraction], deg: int) -> list[Fraction]:
    out = [Fraction(0)] * (deg + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(deg + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def _poly_pow(a: list[Fraction], e: int, deg: int) -> list[Fraction]:
    result = [Fraction(1)] + [Fraction(0)] * deg
    base = a
    while e:
        if e & 1:
            result = _poly_mul(result, base, deg)
        e >>= 1
        if e:
            base = _poly_mul(base, base, deg)
    return result


def urn_rank_sequence(classes: Sequence[tuple[int, object, int]], m: int) -> tuple[Fraction, ...]:
    """Rank sequence of an extended urn measure with urns grouped into classes.

    ``classes`` lists ``(count, p, threshold)``; urns in a class share the
    ball probability ``p`` and threshold.  Each class contributes the
    exponential generating function ``sum_o C(N, o) y^o O(x)^o U(x)^(N-o)``,
    truncated at ``x^m``, where ``U``/``O`` enumerate unoccupied/occupied
    ball counts of one urn.  Cost depends on ``m`` and the number of classes,
    not on the number of urns.
    """
    fact = [math.factorial(c) for c in range(m + 1)]
    total_urns = 0
    psum = Fraction(0)
    joint: dict[int, list[Fraction]] = {0: [Fraction(1)] + [Fraction(0)] * m}
    for count, p, a in classes:
        p, a = _rat(p), int(a)
        if count < 0 or p < 0 or a < 1:
            raise InvalidDistribution(f"bad urn class {(count, p, a)}")
        total_urns += count
        psum += count * p
        U = [p**c / fact[c] if c < a else Fraction(0) for c in range(m + 1)]
        O = [p**c / fact[c] if c >= a else Fraction(0) for c in range(m + 1)]
        top = min(count, m)
        # O has no constant term, so at most m urns of a class are occupied
        upow = _poly_pow(U, count - top, m)
        u_powers = [upow]
        for _ in range(top):
            u_powers.append(_poly_mul(u_powers[-1], U, m))
        # u_powers[t] = U^(count-top+t); we need U^(count-o) = u_powers[top-o]
        cls: dict[int, list[Fraction]] = {}
        opow = [Fraction(1)] + [Fraction(0)] * m
        for o in range(top + 1):
            poly = _poly_mul(opow, u_powers[top - o], m)
            if any(poly):
                cls[o] = [math.comb(count, o) * x for x in poly]
            opow = _poly_mul(opow, O, m)
        nxt: dict[int, list[Fraction]] = {}
        for o1, p1 in joint.items():
            for o2, p2 in cls.items():
                prod = _poly_mul(p1, p2, m)
                acc = nxt.setdefault(o1 + o2, [Fraction(0)] * (m + 1))
                for d in range(m + 1):
                    acc[d] += prod[d]
        joint = nxt
    if psum != 1:
        raise InvalidDistribution(f"class probabilities sum to {psum}, not 1")
    r = [Fraction(0)] * (total_urns + 1)
    for o, poly in joint.items():
        r[o] += poly[m] * fact[m]
    return tuple(r)


# -- graphs, forests, trees --------------------------------------------------


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: tuple[tuple, ...]
    weights: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        vs = set(self.vertices)
        for e in self.edges:
            if len(e) != 2 or e[0] not in vs or e[1] not in vs:
                raise ParseError(f"bad edge {e!r}")
        if self.weights is not None:
            w = tuple(_rat(x) for x in self.weights)
            if len(w) != len(self.edges) or any(x <= 0 for x in w):
                raise ParseError("edge weights must be positive, one per edge")
            object.__setattr__(self, "weights", w)

    def to_json_dict(self) -> dict:
        edges = []
        for k, (u, v) in enumerate(self.edges):
            e = [str(u), str(v)]
            if self.weights is not None:
                e.append(str(self.weights[k]))
            edges.append(e)
        return {"vertices": [str(v) for v in self.vertices], "edges": edges}


def graph_from_json(doc) -> Graph:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        vertices = tuple(str(v) for v in doc["vertices"])
        raw = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise ParseError("graph JSON needs 'vertices' and 'edges'") from exc
    edges, weights = [], []
    for e in raw:
        if not isinstance(e, (list, tuple)) or len(e) not in (2, 3):
            raise ParseError(f"bad edge entry {e!r}")
        edges.append((str(e[0]), str(e[1])))
        if len(e) == 3:
            weights.append(parse_rational(e[2]))
    if weights and len(weights) != len(edges):
        raise ParseError("either every edge has a weight or none does")
    return Graph(vertices, tuple(edges), tuple(weights) if weights else None)


def gadget_graph(k: int) -> Graph:
    """Vertices x, y, z1..zk; edges xy, then x z_i and y z_i for each i."""
    if k < 1:
        raise ParameterOutOfRange("k must be positive")
    zs = [f"z{i}" for i in range(1, k + 1)]
    edges = [("x", "y")] + [("x", z) for z in zs] + [("y", z) for z in zs]
    return Graph(("x", "y", *zs), tuple(edges))


def complete_graph(k: int) -> Graph:
    vs = tuple(str(i) for i in range(k))
    return Graph(vs, tuple(itertools.combinations(vs, 2)))


def forests(G: Graph) -> Iterator[int]:
    """Edge bitmasks (bit ``e`` = edge ``e``) of all acyclic edge subsets."""
    index = {v: i for i, v in enumerate(G.vertices)}
    ends = [(index[u], index[v]) for u, v in G.edges]
    E = len(ends)
    parent = list(range(len(G.vertices)))

    def find(x, par):
        while par[x] != x:
            x = par[x]
        return x

    def rec(e, mask, par):
        if e == E:
            yield mask
            return
        yield from rec(e + 1, mask, par)
        u, v = ends[e]
        ru, rv = find(u, par), find(v, par)
        if ru != rv:
            par2 = list(par)
            par2[ru] = rv
            yield from rec(e + 1, mask | (1 << e), par2)

    yield from rec(0, 0, parent)


def _components(G: Graph) -> int:
    parent = {v: v for v in G.vertices}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for u, v in G.edges:
        parent[find(u)] = find(v)
    return len({find(v) for v in G.vertices})


def _edge_weighted(G: Graph, masks: Iterable[int], label: str) -> Measure:
    E = len(G.edges)
    if E > MAX_N:
        raise CapExceeded(f"{E} edges exceeds the {MAX_N}-coordinate cap")
    w = [Fraction(0)] * (1 << E)
    for mask in masks:
        x = Fraction(1)
        if G.weights is not None:
            for e in range(E):
                if (mask >> e) & 1:
                    x *= G.weights[e]
        w[mask] = x
    return Measure(E, tuple(w), label=label)


def spanning_forest_measure(G: Graph) -> Measure:
    return _edge_weighted(G, forests(G), "spanning-forests")


def spanning_tree_measure(G: Graph) -> Measure:
    if _components(G) != 1:
        raise Disconnected("spanning trees need a connected graph")
    size = len(G.vertices) - 1
    return _edge_weighted(G, (f for f in forests(G) if popcount(f) == size), "spanning-trees")


# -- matroids ----------------------------------------------------------------


@dataclass(frozen=True)
class Matroid:
    """A matroid given by its independent sets (bitmasks over the ground set)."""

    ground: int
    independent: tuple[int, ...]

    def __post_init__(self):
        if self.ground > MAX_N:
            raise CapExceeded(f"ground set {self.ground} exceeds {MAX_N}")
        ind = tuple(sorted(set(self.independent)))
        object.__setattr__(self, "independent", ind)
        members = set(ind)
        if 0 not in members:
            raise ParseError("the empty set must be independent")
        for I in ind:
            if I >> self.ground:
                raise ParseError("independent set outside the ground set")
            for e in range(self.ground):
                if (I >> e) & 1 and (I & ~(1 << e)) not in members:
                    raise ParseError("independent sets are not downward closed")
        if self.ground <= MATROID_EXCHANGE_CAP:
            for I in ind:
                for J in ind:
                    if popcount(I) < popcount(J):
                        if not any((J >> e) & 1 and not (I >> e) & 1 and (I | (1 << e)) in members for e in range(self.ground)):
                            raise ParseError("exchange axiom fails")

    def to_json_dict(self) -> dict:
        return {"ground": self.ground, "independent": [bitstring(I, self.ground) for I in self.independent]}


def matroid_from_json(doc) -> Matroid:
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        g = int(doc["ground"])
        ind = [parse_bitstring(s, g) for s in doc["independent"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad matroid document: {exc}") from exc
    return Matroid(g, tuple(ind))


def graphic_matroid(G: Graph) -> Matroid:
    if len(G.edges) > MAX_N:
        raise CapExceeded("ground set too large")
    return Matroid(len(G.edges), tuple(forests(G)))


def matroid_measure(M: Matroid, weights: Sequence | None = None) -> Measure:
    if weights is not None:
        weights = [_rat(x) for x in weights]
    w = [Fraction(0)] * (1 << M.ground)
    for I in M.independent:
        x = Fraction(1)
        if weights is not None:
            for e in range(M.ground):
                if (I >> e) & 1:
                    x *= weights[e]
        w[I] = x
    return Measure(M.ground, tuple(w), label="matroid")


def independence_numbers(M: Matroid) -> tuple[int, ...]:
    a = [0] * (M.ground + 1)
    for I in M.independent:
        a[popcount(I)] += 1
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return tuple(a)


def mason_check(M: Matroid):
    """ULC of the independence numbers (relative to the ground-set size)."""
    from .rayleigh import check_ULC

    a = list(independence_numbers(M))
    a += [0] * (M.ground + 1 - len(a))
    return check_ULC(a)


def dowling_app_check(M: Matroid):
    """APP of the uniform measure on the independent sets."""
    from .errors import OddGroundSet
    from .rayleigh import check_APP

    if M.ground % 2:
        raise OddGroundSet("APP needs an even ground set")
    if M.ground > 10:
        raise CapExceeded("Dowling check capped at ground set 10")
    return check_APP(matroid_measure(M))


def _canonical(edges: list[tuple[int, int]]) -> tuple:
    """Isomorphism-invariant key: per-component minimum over vertex relabellings."""
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    seen: set[int] = set()
    parts = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x] - seen:
                seen.add(y)
                stack.append(y)
        mine = [e for e in edges if e[0] in comp]
        best = None
        for perm in itertools.permutations(range(len(comp))):
            relabel = dict(zip(comp, perm))
            key = tuple(sorted(tuple(sorted((relabel[u], relabel[v]))) for u, v in mine))
            if best is None or key < best:
                best = key
        parts.append(best)
    return tuple(sorted(parts))


def multigraphs(max_edges: int) -> Iterator[Graph]:
    """One representative of every multigraph (loops and parallel edges
    allowed, no isolated vertices) with at most ``max_edges`` edges."""
    level = {(): []}
    for e in range(max_edges + 1):
        for edges in level.values():
            nv = 1 + max((max(x) for x in edges), default=-1)
            verts = tuple(str(i) for i in range(max(nv, 1)))
            yield Graph(verts, tuple((str(u), str(v)) for u, v in edges))
        if e == max_edges:
            break
        nxt: dict[tuple, list] = {}
        for edges in level.values():
            nv = 1 + max((max(x) for x in edges), default=-1)
            for u in range(nv + 1):
                for v in range(u, nv + 2):
                    if u == nv and v == nv + 1 or v <= nv or (u < nv and v == nv):
                        cand = edges + [(u, v)]
                        key = _canonical(cand)
                        nxt.setdefault(key, cand)
        level = nxt


# -- family specification strings ------------------------------------------------


def _spec_fields(body: str) -> dict[str, str]:
    """``k=2,beta=1/2`` -> dict; a value may continue over later commas until the next ``key=``."""
    out: dict[str, str] = {}
    key = None
    for part in body.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            key, val = part.split("=", 1)
            key = key.strip()
            out[key] = val.strip()
        elif key is not None:
            out[key] += "," + part
        else:
            raise ParseError(f"expected key=value, got {part!r}")
    return out


def _rats(text: str) -> list[Fraction]:
    return [parse_rational(x) for x in text.split(",") if x.strip()]


def parse_family(spec: str, base_dir: str | None = None) -> Measure:
    """Expand a family string such as ``nu:k=2,beta=1/2`` into a measure.

    Kinds: ``product:p=..``, ``exchangeable:a=..``, ``nu:k=..,beta=..``,
    ``urn:n=..,m=..[,p=..][,a=..]``, ``gadget:k=..`` (forests of the gadget
    graph), ``usf:graph=FILE``, ``ust:graph=FILE``, ``complete:k=..[,kind=forest|tree]``.
    """
    import os

    if ":" not in spec:
        raise ParseError(f"family spec needs 'kind:params', got {spec!r}")
    kind, body = spec.split(":", 1)
    kind = kind.strip().lower()
    f = _spec_fields(body)
    try:
        if kind == "product":
            return product_measure(_rats(f["p"]))
        if kind in ("exchangeable", "exch"):
            return exchangeable_from_rank(_rats(f["a"]))
        if kind == "nu":
            return nu_family(int(f["k"]), parse_rational(f["beta"]))
        if kind == "urn":
            n, m = int(f["n"]), int(f["m"])
            p = _rats(f["p"]) if "p" in f else [Fraction(1, n)] * n
            th = tuple(int(x) for x in f["a"].split(",")) if "a" in f else None
            return urn_measure(UrnSpec(n, m, tuple(p), th))
        if kind == "gadget":
            return spanning_forest_measure(gadget_graph(int(f["k"])))
        if kind == "complete":
            G = complete_graph(int(f["k"]))
            return spanning_tree_measure(G) if f.get("kind", "forest") == "tree" else spanning_forest_measure(G)
        if kind in ("usf", "ust"):
            path = f["graph"]
            if base_dir and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            with open(path) as fh:
                G = graph_from_json(fh.read())
            return spanning_forest_measure(G) if kind == "usf" else spanning_tree_measure(G)
    except KeyError as exc:
        raise ParseError(f"family {kind!r} is missing parameter {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown family kind {kind!r}")
