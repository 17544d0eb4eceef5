"""Rayleigh (NC+) falsification and certification, log-concavity of rank
sequences, LC[m], antipodal pairs, and the Sigma pair sums.

For a pair ``(i, j)`` write ``f_ab`` for the generating polynomial, in the
remaining field variables, of the configurations with ``eta_i = a`` and
``eta_j = b``.  Then

    dZ_ij = dZ/dW_i * dZ/dW_j - Z * d2Z/dW_i dW_j = f10 * f01 - f00 * f11,

which does not involve ``W_i`` or ``W_j`` and is a polynomial of degree at
most two in every other variable.  ``W o mu`` has ``eta_i`` and ``eta_j``
negatively correlated exactly when ``dZ_ij(W) >= 0``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import INT64_SAFE, parse_rational
from .checks import CNC_CAP, _exact_cube, _free, assignments, check_CNA, check_CNC, sample_fields, ternary_table, weighted_ints
from .errors import CapExceeded, DimensionMismatch, OddDimension, PreconditionViolated
from .measure import INFINITY, Measure, condition, impose_field, popcount, popcounts, symmetry_type, to_cube
from .verdict import Budget, CorrelationWitness, Verdict

NCPLUS_CAP = CNC_CAP
LCM_CAP = 12
CAPP_CAP = 12
# relative float tolerance below which a sampled gap is rechecked exactly
_FLOAT_SLACK = 1e-9


# -- the Rayleigh difference polynomial ---------------------------------------


def _ternary_index(m: int) -> np.ndarray:
    """Index into a C-ordered (3,)*m array of each binary exponent vector in C-ordered (2,)*m."""
    idx = np.zeros((2,) * m, dtype=np.int64)
    for k in range(m):
        shape = [1] * m
        shape[k] = 2
        idx = idx + (np.arange(2).reshape(shape) * 3 ** (m - 1 - k))
    return idx.reshape(-1)


@dataclass(frozen=True)
class RayleighPolynomial:
    """Coefficients of ``dZ_ij`` in the variables ``others``.

    ``coeffs`` is an integer array of shape ``(3,)*len(others)``; the true
    coefficient is ``coeffs[e] * scale``.
    """

    pair: tuple[int, int]
    others: tuple[int, ...]
    coeffs: np.ndarray
    scale: Fraction

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return int(self.coeffs[tuple(exps)]) * self.scale

    def items(self):
        for e in itertools.product(range(3), repeat=len(self.others)):
            c = int(self.coeffs[e])
            if c:
                yield e, c * self.scale

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    @property
    def nonnegative_coefficients(self) -> bool:
        return bool(np.all(self.coeffs >= 0))

    def evaluate(self, W) -> Fraction:
        """Value at a field given for all ``n`` coordinates (entries for ``i``, ``j`` ignored).

        An entry ``0`` keeps the degree-0 part in that variable and
        ``INFINITY`` the degree-2 part: the value of the same polynomial
        for the measure conditioned on ``eta_k = 0`` or ``1``.
        """
        if isinstance(W, dict):
            W = [W.get(k, 1) for k in range(1, max(self.pair + self.others, default=0) + 1)]
        arr = self.coeffs.astype(object)
        denom = 1
        for k in reversed(self.others):
            w = W[k - 1]
            if w is INFINITY:
                vec = [0, 0, 1]
            else:
                w = w if isinstance(w, Fraction) else parse_rational(w)
                if w < 0:
                    raise ValueError("field entries must be nonnegative")
                p, q = w.numerator, w.denominator
                vec = [q * q, p * q, p * p]
                denom *= q * q
            arr = (arr * np.array(vec, dtype=object)).sum(axis=-1)
        return Fraction(int(arr), denom) * self.scale

    def nc_gap(self, W) -> Fraction:
        """Cleared NC gap ``mu(10) mu(01) - mu(11) mu(00)`` of the unnormalized ``W o mu``."""
        i, j = self.pair
        wi, wj = Fraction(W[i - 1]), Fraction(W[j - 1])
        return wi * wj * self.evaluate(W)

    def to_dict(self) -> dict:
        names = [f"W{k}" for k in self.others]
        terms = {}
        for e, c in self.items():
            mono = "*".join(f"{nm}^{d}" if d > 1 else nm for nm, d in zip(names, e) if d) or "1"
            terms[mono] = str(c)
        return {"pair": list(self.pair), "variables": names, "terms": terms}


def _pair_slices(cube: np.ndarray, i: int, j: int):
    """The four integer slices ``f_ab`` flattened over the other axes (C order)."""
    m = cube.ndim

    def sl(a, b):
        idx = [slice(None)] * m
        idx[i - 1], idx[j - 1] = a, b
        return cube[tuple(idx)].reshape(-1)

    return sl(0, 0), sl(1, 0), sl(0, 1), sl(1, 1)


def rayleigh_polynomial(mu: Measure, i: int, j: int) -> RayleighPolynomial:
    if i == j:
        raise PreconditionViolated("the pair needs two distinct coordinates")
    if not (1 <= i <= mu.n and 1 <= j <= mu.n):
        raise DimensionMismatch(f"pair {(i, j)} outside 1..{mu.n}")
    i, j = min(i, j), max(i, j)
    others = tuple(k for k in range(1, mu.n + 1) if k not in (i, j))
    m = len(others)
    ints = mu.int_weights
    big = max(ints)
    cube = to_cube(np.asarray(ints, dtype=np.int64 if big * big * (1 << (m + 1)) < INT64_SAFE else object), mu.n)
    f00, f10, f01, f11 = _pair_slices(cube, i, j)
    tidx = _ternary_index(m)
    target = (tidx[:, None] + tidx[None, :]).reshape(-1)
    prod = (np.multiply.outer(f10, f01) - np.multiply.outer(f00, f11)).reshape(-1)
    out = np.zeros(3**m, dtype=prod.dtype)
    np.add.at(out, target, prod)
    c = mu.scaled[1]
    return RayleighPolynomial((i, j), others, out.reshape((3,) * m), c * c)


def representative_pairs(mu: Measure) -> list[tuple[int, int]]:
    """One pair per orbit of the measure's coordinate symmetries."""
    n = mu.n
    if n < 2:
        return []
    sym = symmetry_type(mu)
    if sym.kind == "Exchangeable":
        return [(1, 2)]
    if sym.kind == "AlmostExchangeable":
        rest = [k for k in range(1, n + 1) if k != sym.pivot]
        pairs = [tuple(sorted((sym.pivot, rest[0])))]
        if len(rest) >= 2:
            pairs.append((rest[0], rest[1]))
        return pairs
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


# -- NC+ ----------------------------------------------------------------------


def _exact_pair_violation(mu: Measure, W: Sequence[Fraction], i: int, j: int) -> bool:
    ints = weighted_ints(mu, W)
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    s11 = s1i = s1j = T = 0
    for idx, w in enumerate(ints):
        if w:
            T += w
            if idx & bi:
                s1i += w
            if idx & bj:
                s1j += w
                if idx & bi:
                    s11 += w
    return s11 * T > s1i * s1j


def _field_witness(mu: Measure, W: Sequence[Fraction], i: int, j: int) -> CorrelationWitness:
    nu = impose_field(mu, list(W))
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    pab = sum((x for k, x in enumerate(nu.weights) if k & bi and k & bj), Fraction(0))
    pa = sum((x for k, x in enumerate(nu.weights) if k & bi), Fraction(0))
    pb = sum((x for k, x in enumerate(nu.weights) if k & bj), Fraction(0))
    return CorrelationWitness("pair", pair=(i, j), field_={k + 1: W[k] for k in range(mu.n)}, lhs=pab, rhs=pa * pb)


def _float_weights(mu: Measure) -> np.ndarray:
    ints = mu.int_weights
    top = max(ints)
    return np.array([float(Fraction(w, top)) for w in ints])


def _bits(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.array([(idx >> k) & 1 for k in range(n)], dtype=float)


def _sample_search(mu: Measure, pairs, budget: Budget, rng: random.Random):
    """Float-screened sampling; every candidate is confirmed exactly.

    Returns ``(witness or None, per-pair list of (relative gap, field))`` so
    the closest samples can seed the descent.
    """
    n = mu.n
    w = _float_weights(mu)
    with np.errstate(divide="ignore"):
        logw = np.log(w)
    bits = _bits(n)
    pos = {p: np.array(bits[p[0] - 1] * bits[p[1] - 1]) for p in pairs}
    closest: dict[tuple[int, int], list] = {p: [] for p in pairs}
    fields = list(sample_fields(n, budget, rng))
    batch = 512
    for lo in range(0, len(fields), batch):
        chunk = fields[lo:lo + batch]
        logW = np.log(np.array([[float(x) for x in W] for W in chunk]))
        L = logW @ bits + logw
        L -= L.max(axis=1, keepdims=True)
        X = np.exp(L)
        T = X.sum(axis=1)
        S1 = X @ bits.T
        for p in pairs:
            i, j = p
            s11 = X @ pos[p]
            a = S1[:, i - 1] * S1[:, j - 1]
            b = s11 * T
            rel = (a - b) / np.maximum(a + b, 1e-300)
            for r in np.flatnonzero(rel < _FLOAT_SLACK):
                if _exact_pair_violation(mu, chunk[r], i, j):
                    return _field_witness(mu, chunk[r], i, j), closest
            for r in np.argsort(rel)[: budget.descent_starts]:
                closest[p].append((float(rel[r]), chunk[r]))
        for p in pairs:
            closest[p] = sorted(closest[p], key=lambda t: t[0])[: budget.descent_starts]
    return None, closest


_EDGE_ROWS = {
    "coarse": np.array([[1, 0, 0], [1, 1, 1], [0, 0, 1]], dtype=float),
    "fine": np.array([[1, 0, 0], [4, 2, 1], [1, 1, 1], [1, 2, 4], [0, 0, 1]], dtype=float),
}
_EDGE_VALUES = {"coarse": ("0", "1", "inf"), "fine": ("0", "1/2", "1", "2", "inf")}


def _edge_field(n: int, others, f: int, combo, values, x: Fraction, big: int) -> list[Fraction]:
    W = [Fraction(1)] * n
    for t, k in enumerate(others):
        if t == f:
            W[k - 1] = x
            continue
        v = values[combo[t if t < f else t - 1]]
        W[k - 1] = Fraction(1, big) if v == "0" else Fraction(big) if v == "inf" else Fraction(v)
    return W


def _edge_search(mu: Measure, poly: RayleighPolynomial, limit: int = 64):
    """Fields with one free coordinate and the rest at 0, 1/2, 1, 2 or infinity.

    Along the free coordinate the difference polynomial is a quadratic, so its
    minimum over the positive axis is explicit.  Float screening picks the
    candidates; each one is confirmed exactly with 0 and infinity replaced by
    increasingly extreme finite weights.
    """
    m = len(poly.others)
    if m == 0:
        return None
    mode = "fine" if m <= 7 else "coarse"
    rows, values = _EDGE_ROWS[mode], _EDGE_VALUES[mode]
    C = np.vectorize(float, otypes=[float])(poly.coeffs) if poly.coeffs.dtype == object else poly.coeffs.astype(float)
    C = C / max(np.abs(C).max(), 1e-300)
    n = mu.n
    for f in range(m):
        A = np.moveaxis(C, f, -1)
        for _ in range(m - 1):
            # contract the leading axis; the new value axis goes to the front of the batch
            A = np.tensordot(rows, A, axes=([1], [0]))
            A = np.moveaxis(A, 0, m - 2)
        q0, q1, q2 = A[..., 0], A[..., 1], A[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            vertex = np.where(q2 > 0, -q1 / (2 * q2), np.inf)
            low = np.where((q1 < 0) & (q2 > 0), q0 - q1 * q1 / (4 * q2), np.inf)
        low = np.where(q0 < 0, q0, low)
        low = np.where(q2 < 0, q2, low)
        scale = np.abs(q0) + np.abs(q1) + np.abs(q2)
        score = low / np.maximum(scale, 1e-300)
        flat = np.flatnonzero(score.reshape(-1) < _FLOAT_SLACK)
        if flat.size == 0:
            continue
        flat = flat[np.argsort(score.reshape(-1)[flat])][:limit]
        for r in flat:
            combo = np.unravel_index(int(r), score.shape) if score.ndim else ()
            c = tuple(int(v) for v in combo)
            if q0[combo] < 0:
                xs = [Fraction(1, 1 << b) for b in (10, 30, 60)]
            elif q2[combo] < 0:
                xs = [Fraction(1 << b) for b in (10, 30, 60)]
            else:
                xs = _snap(float(vertex[combo]))
            for big in (1 << 20, 1 << 40, 1 << 80):
                for x in xs:
                    W = _edge_field(n, poly.others, f, c, values, x, big)
                    if _exact_pair_violation(mu, W, *poly.pair):
                        return W
    return None


def _snap(x: float) -> list[Fraction]:
    exact = Fraction(x)
    out = []
    for bound in (10**3, 10**6, 10**12):
        f = exact.limit_denominator(bound)
        if f > 0:
            out.append(f)
    out.append(exact)
    return out


def _descent(mu: Measure, i: int, j: int, start: Sequence[Fraction], sweeps: int):
    """Coordinatewise search on the normalized gap; exact confirmation at the end."""
    n = mu.n
    others = [k for k in range(1, n + 1) if k not in (i, j)]
    if not others:
        return None
    m = len(others)
    cube = to_cube(_float_weights(mu), n)
    f00, f10, f01, f11 = _pair_slices(cube, i, j)
    obits = np.array([(np.arange(1 << m) >> (m - 1 - t)) & 1 for t in range(m)], dtype=float)
    x = np.array([float(start[k - 1]) for k in others])
    scan = 2.0 ** np.arange(-24, 25)

    def split(t):
        mono = np.exp(np.log(x) @ obits)
        sel = obits[t] == 1
        out = []
        for f in (f00, f10, f01, f11):
            fm = f * mono
            out.append((fm[~sel].sum(), fm[sel].sum() / x[t]))
        return out

    for _ in range(sweeps):
        for t in range(m):
            (g00, h00), (g10, h10), (g01, h01), (g11, h11) = split(t)
            a = h10 * h01 - h00 * h11
            b = g10 * h01 + h10 * g01 - g00 * h11 - h00 * g11
            c = g10 * g01 - g00 * g11
            A = h10 * h01 + h00 * h11
            B = g10 * h01 + h10 * g01 + g00 * h11 + h00 * g11
            C = g10 * g01 + g00 * g11
            cands = list(x[t] * scan)
            if a > 0 and -b / (2 * a) > 0:
                cands.append(-b / (2 * a))
            cands = np.clip(np.array(cands), 2.0**-60, 2.0**60)
            vals = (a * cands**2 + b * cands + c) / np.maximum(A * cands**2 + B * cands + C, 1e-300)
            x[t] = cands[int(np.argmin(vals))]
    base = [Fraction(1)] * n
    for t, k in enumerate(others):
        base[k - 1] = Fraction(x[t])
    if _exact_pair_violation(mu, base, i, j):
        for bound in (10**3, 10**6, 10**12):
            W = [f.limit_denominator(bound) if f.limit_denominator(bound) > 0 else f for f in base]
            if _exact_pair_violation(mu, W, i, j):
                return W
        return base
    return None


def _bernstein_start(poly: RayleighPolynomial) -> np.ndarray:
    """Integer Bernstein coefficients of ``prod (1 - t_k)^2 * dZ(t / (1 - t))`` on ``[0, 1]^m``."""
    m = len(poly.others)
    ones = np.zeros((3,) * m, dtype=np.int64)
    for k in range(m):
        shape = [1] * m
        shape[k] = 3
        ones = ones + (np.arange(3) == 1).astype(np.int64).reshape(shape)
    factor = (2 ** (m - ones)).astype(object)
    B = poly.coeffs.astype(object) * factor
    return _compact(B)


def _compact(B: np.ndarray) -> np.ndarray:
    """Divide out the common factor and drop to int64 when safe."""
    g = 0
    for v in B.flat:
        g = math.gcd(g, int(v))
        if g == 1:
            break
    if g > 1:
        B = B // g
    top = max(abs(int(B.max())), abs(int(B.min())))
    if top < (1 << 58):
        return B.astype(np.int64)
    return B.astype(object)


def _split(B: np.ndarray, axis: int):
    b0 = np.take(B, 0, axis=axis)
    b1 = np.take(B, 1, axis=axis)
    b2 = np.take(B, 2, axis=axis)
    mid = b0 + 2 * b1 + b2
    left = np.stack([4 * b0, 2 * (b0 + b1), mid], axis=axis)
    right = np.stack([mid, 2 * (b1 + b2), 4 * b2], axis=axis)
    return left, right


def _fits(B: np.ndarray) -> np.ndarray:
    if B.dtype == object:
        return _compact(B)
    top = int(np.abs(B).max())
    if top >= (1 << 58):
        return _compact(B.astype(object))
    return B


def _corner_point(lo, hi, corner) -> list[Fraction]:
    return [hi[k] if c else lo[k] for k, c in enumerate(corner)]


def _t_to_field(mu: Measure, poly: RayleighPolynomial, t: Sequence[Fraction]) -> list[Fraction]:
    eps = Fraction(1, 1 << 30)
    W = [Fraction(1)] * mu.n
    for k, tk in zip(poly.others, t):
        tk = min(max(tk, eps), 1 - eps)
        W[k - 1] = tk / (1 - tk)
    return W


def _branch_and_bound(mu: Measure, poly: RayleighPolynomial, box_budget: int, max_depth: int = 64):
    """Depth-first dyadic subdivision of ``[0, 1]^m`` in Bernstein form.

    Returns ``("holds", boxes)``, ``("fails", field, boxes)`` or
    ``("unknown", boxes)``; boxes still undecided at ``max_depth`` splits
    make the outcome unknown.
    """
    m = len(poly.others)
    B0 = _bernstein_start(poly)
    stack = [(B0, (Fraction(0),) * m, (Fraction(1),) * m, 0)]
    used = 0
    deep = 0
    tried_corners: set[tuple] = set()
    while stack:
        if used >= box_budget:
            return ("unknown", used)
        B, lo, hi, depth = stack.pop()
        used += 1
        if B.min() >= 0:
            continue
        if depth >= max_depth:
            deep += 1
            continue
        corners = B[(slice(0, 3, 2),) * m]
        if corners.min() < 0:
            flat = int(np.argmin(corners))
            corner = np.unravel_index(flat, corners.shape)
            t = _corner_point(lo, hi, corner)
            key = tuple(t)
            if key not in tried_corners:
                tried_corners.add(key)
                W = _t_to_field(mu, poly, t)
                if _exact_pair_violation(mu, W, *poly.pair):
                    return ("fails", W, used)
        # split the axis with the largest spread of coefficients
        spreads = [int(np.ptp(np.take(B, 0, axis=k) - 2 * np.take(B, 1, axis=k) + np.take(B, 2, axis=k))) if B.dtype != object
                   else max(abs(int(v)) for v in (np.take(B, 0, axis=k) - 2 * np.take(B, 1, axis=k) + np.take(B, 2, axis=k)).flat)
                   for k in range(m)]
        axis = int(np.argmax(spreads)) if max(spreads) > 0 else depth % m
        left, right = _split(B, axis)
        mid = (lo[axis] + hi[axis]) / 2
        lhi = hi[:axis] + (mid,) + hi[axis + 1:]
        rlo = lo[:axis] + (mid,) + lo[axis + 1:]
        stack.append((_fits(right), rlo, hi, depth + 1))
        stack.append((_fits(left), lo, lhi, depth + 1))
    return ("unknown", used) if deep else ("holds", used)


def _boundary_witness(mu: Measure, wit: CorrelationWitness) -> CorrelationWitness:
    """Restate a conditioning witness as a field with entries 0 / Infinity / 1."""
    W = {k: "Infinity" if wit.assignment.get(k) == 1 else (Fraction(0) if k in wit.assignment else Fraction(1))
         for k in range(1, mu.n + 1)}
    return CorrelationWitness("pair", pair=wit.pair, field_=W, lhs=wit.lhs, rhs=wit.rhs)


def check_NCplus(mu: Measure, budget: Budget | None = None) -> Verdict:
    """Rayleigh property: boundary conditionings, coefficient rule, sampling and
    descent for counterexamples, then Bernstein branch-and-bound."""
    budget = budget or Budget()
    if mu.n > NCPLUS_CAP:
        raise CapExceeded(f"NC+ capped at n={NCPLUS_CAP}")
    cnc = check_CNC(mu)
    if cnc.failed:
        return Verdict.fails("boundary-fields", _boundary_witness(mu, cnc.witness))
    pairs = representative_pairs(mu)
    polys = {p: rayleigh_polynomial(mu, *p) for p in pairs}
    pending = [p for p in pairs if not polys[p].nonnegative_coefficients]
    cert = {"cnc": cnc.method, "pairs": [list(p) for p in pairs],
            "coefficient_rule": [list(p) for p in pairs if p not in pending]}
    if not pending:
        return Verdict.holds("coefficient-rule", cert)
    for p in pending:
        W = _edge_search(mu, polys[p])
        if W is not None:
            return Verdict.fails("edge-fields", _field_witness(mu, W, *p), cnc="Holds")
    rng = random.Random(budget.seed)
    wit, closest = _sample_search(mu, pending, budget, rng)
    evidence = {"cnc": "Holds", "edge_fields": "no violation", "samples": budget.samples, "seed": budget.seed,
                "pending_pairs": [list(p) for p in pending]}
    if wit is not None:
        return Verdict.fails("sampled-fields", wit, **evidence)
    for p in pending:
        starts = [W for _, W in closest[p]] + [[Fraction(1)] * mu.n]
        for W0 in starts[: budget.descent_starts + 1]:
            W = _descent(mu, p[0], p[1], W0, budget.descent_sweeps)
            if W is not None:
                return Verdict.fails("coordinate-descent", _field_witness(mu, W, *p), **evidence)
    boxes_left = budget.boxes
    bb = {}
    for p in pending:
        res = _branch_and_bound(mu, polys[p], boxes_left)
        boxes_left -= res[-1]
        bb[f"{p[0]},{p[1]}"] = {"outcome": res[0], "boxes": res[-1]}
        if res[0] == "fails":
            return Verdict.fails("branch-and-bound", _field_witness(mu, res[1], *p), **evidence, boxes=bb)
        if res[0] == "unknown":
            return Verdict.unknown("branch-and-bound", **evidence, boxes=bb, box_budget=budget.boxes)
    cert["branch_and_bound"] = bb
    return Verdict.holds("branch-and-bound", cert, **evidence)


NA_SAMPLE_CAP = 50


def falsify_NAplus(mu: Measure, budget: Budget | None = None, *, _skip_nc: bool = False) -> Verdict:
    """Falsification only: boundary conditionings, the NC+ falsifiers (a
    coordinate pair is a pair of disjointly affecting up-sets), then sampled
    fields against full NA.  Fails or Unknown."""
    from dataclasses import replace

    from .checks import _na_near, _na_violation, _na_witness
    from .events import UPSET_CAP

    budget = budget or Budget(samples=200)
    if mu.n > UPSET_CAP:
        raise CapExceeded(f"NA+ falsification capped at n={UPSET_CAP}")
    cna = check_CNA(mu)
    if cna.failed:
        return Verdict.fails("boundary-fields", cna.witness)
    if not _skip_nc:
        nc = check_NCplus(mu, replace(budget, boxes=0))
        if nc.failed:
            return Verdict.fails(f"NCplus-{nc.method}", nc.witness)
    rng = random.Random(budget.seed)
    tried = 0
    capped = replace(budget, samples=min(budget.samples, NA_SAMPLE_CAP))
    for W in sample_fields(mu.n, capped, rng):
        tried += 1
        ints = weighted_ints(mu, W)
        top = max(ints)
        if not _na_near(to_cube(np.array([x / top for x in ints]), mu.n)):
            continue
        hit = _na_violation(_exact_cube(ints, mu.n))
        if hit is not None:
            wit = _na_witness(hit, list(range(1, mu.n + 1)), mu.n, {})
            wit["witness"] = replace(wit["witness"], field_={k + 1: W[k] for k in range(mu.n)})
            return Verdict.fails("sampled-fields", wit, sampled_fields=tried)
    return Verdict.unknown("sampled-fields", boundary="CNA Holds", ncplus_samples=budget.samples,
                           na_sampled_fields=tried, seed=budget.seed)


def check_NAplus(mu: Measure, budget: Budget | None = None) -> Verdict:
    """NA+ by falsification and, for Holds, the implication rules only."""
    from .events import UPSET_CAP
    from .inference import PropertyLedger

    budget = budget or Budget()
    if mu.n > NCPLUS_CAP:
        raise CapExceeded(f"NA+ capped at n={NCPLUS_CAP}")
    nc = check_NCplus(mu, budget)
    if nc.failed:
        return Verdict.fails(f"NCplus-{nc.method}", nc.witness)
    evidence: dict = {"ncplus": nc.status.value}
    if mu.n <= UPSET_CAP:
        v = falsify_NAplus(mu, budget, _skip_nc=True)
        if v.failed:
            return v
        evidence.update(v.evidence)
    else:
        evidence["na_sampling"] = f"skipped for n > {UPSET_CAP}"
    ledger = PropertyLedger(mu, budget=budget)
    ledger.record("NCplus", nc)
    ledger.run_direct(["Exchangeable", "AlmostExchangeable", "ULC", "CNC"])
    ledger.deduce()
    v = ledger.get("NAplus")
    if v is not None and not v.unknown_:
        e = ledger.entries["NAplus"]
        return Verdict(v.status, f"rule {e.rule}", certificate={"derivation": ledger.explain("NAplus")} if v.ok else None,
                       witness={"derivation": ledger.explain("NAplus")} if v.failed else None, evidence=evidence)
    return Verdict.unknown("falsifiers-and-rules", **evidence)


# -- sequences ----------------------------------------------------------------


def _as_sequence(x) -> tuple[list[Fraction], int]:
    if isinstance(x, Measure):
        from .measure import rank_sequence

        seq = list(rank_sequence(x))
    else:
        seq = [v if isinstance(v, Fraction) else parse_rational(v) for v in x]
    if any(v < 0 for v in seq):
        raise PreconditionViolated("sequences must be nonnegative")
    return seq, len(seq) - 1


def _internal_zero(a: Sequence[Fraction]) -> int | None:
    nz = [i for i, v in enumerate(a) if v]
    if not nz:
        return None
    for i in range(nz[0], nz[-1] + 1):
        if not a[i]:
            return i
    return None


def _seq_witness(kind: str, index: int, a) -> dict:
    return {"violation": kind, "index": index, "sequence": list(a)}


def check_ULC(x) -> Verdict:
    """``a_i / C(n, i)`` log-concave with no internal zeros (``n = len(a) - 1``)."""
    a, n = _as_sequence(x)
    z = _internal_zero(a)
    if z is not None:
        return Verdict.fails("ulc", _seq_witness("internal-zero", z, a))
    for i in range(1, n):
        # b_i^2 >= b_{i-1} b_{i+1} with b_i = a_i / C(n, i), denominators cleared
        if a[i] ** 2 * math.comb(n, i - 1) * math.comb(n, i + 1) < a[i - 1] * a[i + 1] * math.comb(n, i) ** 2:
            return Verdict.fails("ulc", _seq_witness("log-concavity", i, a))
    return Verdict.holds("ulc", {"length": n + 1})


def check_LC_measure(x) -> Verdict:
    a, n = _as_sequence(x)
    z = _internal_zero(a)
    if z is not None:
        return Verdict.fails("lc", _seq_witness("internal-zero", z, a))
    for i in range(1, n):
        if a[i] ** 2 < a[i - 1] * a[i + 1]:
            return Verdict.fails("lc", _seq_witness("log-concavity", i, a))
    return Verdict.holds("lc", {"length": n + 1})


check_LC = check_LC_measure


def check_unimodal(x) -> Verdict:
    a, n = _as_sequence(x)
    peak = max(range(n + 1), key=lambda i: (a[i], -i))
    for i in range(peak):
        if a[i] > a[i + 1]:
            return Verdict.fails("unimodal", _seq_witness("dip-before-peak", i + 1, a) | {"peak": peak})
    for i in range(peak, n):
        if a[i] < a[i + 1]:
            return Verdict.fails("unimodal", _seq_witness("rise-after-peak", i + 1, a) | {"peak": peak})
    return Verdict.holds("unimodal", {"peak": peak})


# -- LC[m] ----------------------------------------------------------------------


def _ulc_violations(r: list[np.ndarray], s: int):
    """Positions (flat) where the stacked rank arrays ``r_0..r_s`` are not ULC."""
    bad = np.zeros(r[0].shape, dtype=bool)
    for t in range(1, s):
        lhs = r[t] * r[t] * (math.comb(s, t - 1) * math.comb(s, t + 1))
        rhs = r[t - 1] * r[t + 1] * (math.comb(s, t) ** 2)
        bad |= lhs < rhs
    nz = [x != 0 for x in r]
    before = np.zeros(r[0].shape, dtype=bool)
    for t in range(s + 1):
        after = np.zeros(r[0].shape, dtype=bool)
        for u in range(t + 1, s + 1):
            after |= nz[u]
        bad |= before & after & ~nz[t]
        before |= nz[t]
    return bad


def _rank_arrays(T: np.ndarray, S: Sequence[int]) -> list[np.ndarray]:
    """For axes ``S`` restricted to 0/1, the level sums over configurations on ``S``."""
    m = T.ndim
    s = len(S)
    rest = [k for k in range(m) if k not in S]
    X = np.moveaxis(T, list(S), list(range(s)))[(slice(0, 2),) * s]
    X = X.reshape((1 << s,) + X.shape[s:]) if s else X
    # C order: the first of S is the most significant bit
    levels = [0] * (1 << s)
    for idx in range(1 << s):
        levels[idx] = popcount(idx)
    out = []
    for t in range(s + 1):
        rows = [idx for idx in range(1 << s) if levels[idx] == t]
        out.append(X[rows].sum(axis=0))
    return out


def check_LCm(mu: Measure, m: int, budget: Budget | None = None) -> Verdict:
    """LC[m]: every projection onto at most ``m`` coordinates of every
    field-modified (or conditioned) measure is ULC."""
    budget = budget or Budget(samples=100)
    n = mu.n
    if m < 1:
        raise PreconditionViolated("m must be positive")
    if n > LCM_CAP:
        raise CapExceeded(f"LC[m] capped at n={LCM_CAP}")
    top = min(m, n)
    # boundary fields: conditionings on outside coordinates, projections onto S
    T = ternary_table(mu.cube())
    for s in range(2, top + 1):
        for S in itertools.combinations(range(n), s):
            r = _rank_arrays(T, S)
            bad = _ulc_violations(r, s)
            if np.any(bad):
                flat = int(np.flatnonzero(bad)[0])
                rest = [k for k in range(n) if k not in S]
                digits = np.unravel_index(flat, (3,) * len(rest)) if rest else ()
                a = {rest[t] + 1: int(d) for t, d in enumerate(digits) if d != 2}
                seq = [Fraction(int(x.flat[flat]) if x.ndim else int(x)) for x in r]
                tot = sum(seq)
                return Verdict.fails("boundary-fields", {"S": [k + 1 for k in S], "assignment": a,
                                                         "rank_sequence": [x / tot for x in seq]})
    if top <= 1:
        return Verdict.holds("trivial", {"m": m})
    if _is_product(mu):
        return Verdict.holds("product-structure", {"m": m})
    if m <= 3:
        nc = check_NCplus(mu, budget)
        if nc.failed:
            return Verdict.fails("delegated-NCplus", nc.witness)
        if nc.ok:
            return Verdict.holds("delegated-NCplus", {"ncplus": nc.method})
        return Verdict.unknown("delegated-NCplus", ncplus=dict(nc.evidence))
    return sample_LCm(mu, m, budget)


def sample_LCm(mu: Measure, m: int, budget: Budget) -> Verdict:
    """ULC of every projection onto at most ``m`` coordinates under sampled finite fields."""
    n = mu.n
    top = min(m, n)
    rng = random.Random(budget.seed)
    tried = 0
    for W in sample_fields(n, budget, rng):
        tried += 1
        cube = _exact_cube(weighted_ints(mu, W), n)
        for s in range(2, top + 1):
            for S in itertools.combinations(range(n), s):
                drop = tuple(k for k in range(n) if k not in S)
                proj = cube.sum(axis=drop) if drop else cube
                r = [Fraction(0)] * (s + 1)
                for idx in itertools.product((0, 1), repeat=s):
                    r[sum(idx)] += int(proj[idx])
                if check_ULC(r).failed:
                    tot = sum(r)
                    return Verdict.fails("sampled-fields", {"S": [k + 1 for k in S], "field": {k + 1: W[k] for k in range(n)},
                                                            "rank_sequence": [x / tot for x in r]})
    return Verdict.unknown("sampled-fields", m=m, sampled_fields=tried, seed=budget.seed, boundary="all conditionings pass")


def _is_product(mu: Measure) -> bool:
    """True when the normalized measure is the product of its marginals."""
    w = mu.weights
    T = mu.total
    p = [sum((x for k, x in enumerate(w) if (k >> i) & 1), Fraction(0)) / T for i in range(mu.n)]
    for idx, x in enumerate(w):
        q = Fraction(1)
        for i in range(mu.n):
            q *= p[i] if (idx >> i) & 1 else 1 - p[i]
        if x != q * T:
            return False
    return True


# -- antipodal pairs ---------------------------------------------------------------


def _antipodal_sums(ints: Sequence[int], n: int) -> list[int]:
    full = (1 << n) - 1
    S = [0] * (n + 1)
    for idx, w in enumerate(ints):
        if w:
            S[popcount(idx)] += w * ints[full ^ idx]
    return S


def alpha_sequence(mu: Measure) -> tuple[Fraction, ...]:
    """``alpha_i = C(n, i)^-1 sum_{|eta| = i} mu(eta) mu(1 - eta)`` for normalized ``mu``."""
    n = mu.n
    S = _antipodal_sums(mu.int_weights, n)
    tot = mu.int_total
    return tuple(Fraction(S[i], math.comb(n, i) * tot * tot) for i in range(n + 1))


def _app_ok(ints: Sequence[int], n: int) -> bool:
    k = n // 2
    S = _antipodal_sums(ints, n)
    return S[k] * math.comb(n, k - 1) >= S[k - 1] * math.comb(n, k)


def check_APP(mu: Measure) -> Verdict:
    if mu.n % 2:
        raise OddDimension("APP needs an even number of coordinates")
    if mu.n == 0:
        return Verdict.holds("antipodal-sums", {"k": 0})
    a = alpha_sequence(mu)
    k = mu.n // 2
    if a[k] >= a[k - 1]:
        return Verdict.holds("antipodal-sums", {"k": k, "alpha_k": a[k], "alpha_k-1": a[k - 1]})
    return Verdict.fails("antipodal-sums", {"k": k, "alpha_k": a[k], "alpha_k-1": a[k - 1]})


def check_CAPP(mu: Measure) -> Verdict:
    n = mu.n
    if n > CAPP_CAP:
        raise CapExceeded(f"CAPP capped at n={CAPP_CAP}")
    ints = mu.int_weights
    count = 0
    for a in assignments(n):
        free = n - len(a)
        if free < 2 or free % 2:
            continue
        fixed = sum(1 << (k - 1) for k, v in a.items() if v)
        mask = sum(1 << (k - 1) for k in a)
        frees = [k - 1 for k in range(1, n + 1) if k not in a]
        sub = []
        for local in range(1 << free):
            idx = fixed
            for t, k in enumerate(frees):
                if (local >> t) & 1:
                    idx |= 1 << k
            sub.append(ints[idx])
        if not any(sub):
            continue
        count += 1
        if not _app_ok(sub, free):
            nu = condition(mu, a)
            k = free // 2
            al = alpha_sequence(nu)
            return Verdict.fails("conditionings-exhaustive", {"assignment": a, "k": k,
                                                              "alpha_k": al[k], "alpha_k-1": al[k - 1]})
    return Verdict.holds("conditionings-exhaustive", {"conditionings": count})


# -- pair sums over subsets -------------------------------------------------------


def sigma_sum(mu: Measure, r: int, s: int, t: int) -> Fraction:
    """Sum of ``mu(X) mu(Y)`` (normalized) over unordered pairs ``{X, Y}`` with
    ``|X| = r``, ``|Y| = s``, ``|X & Y| = t``; ``X = Y`` only when ``r = s = t``."""
    n = mu.n
    if not (0 <= t <= min(r, s) and max(r, s) <= n):
        raise PreconditionViolated(f"need 0 <= t <= min(r, s) and r, s <= n, got {(r, s, t)}")
    w = mu.weights
    X = [x for x in range(1 << n) if popcount(x) == r and w[x]]
    Y = [y for y in range(1 << n) if popcount(y) == s and w[y]]
    total = Fraction(0)
    for x in X:
        for y in Y:
            if popcount(x & y) == t:
                total += w[x] * w[y]
    if r == s and t < r:
        total /= 2
    return total / (mu.total * mu.total)


def lemma41_inequality(mu: Measure) -> bool:
    """``3 Sigma^0_{1,3} <= 4 Sigma^0_{2,2}`` on four coordinates."""
    if mu.n != 4:
        raise DimensionMismatch("defined for measures on four coordinates")
    return 3 * sigma_sum(mu, 1, 3, 0) <= 4 * sigma_sum(mu, 2, 2, 0)
