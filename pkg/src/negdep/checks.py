"""Exact brute-force deciders for the correlation properties.

Every inequality is evaluated on integer-scaled weights in cleared form,
``mu(A B) mu(not A not B) <= mu(A not B) mu(not A B)``, so no checker needs
the measure to be normalized.  Witnesses report normalized probabilities of
the (conditioned) measure.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from ._exact import INT64_SAFE, as_object, bitstring, parse_rational
from .errors import CapExceeded, PreconditionViolated
from .events import UPSET_CAP, lift, upset_masks, upset_matrix
from .measure import ExternalField, INFINITY, Measure, from_cube, to_cube
from .verdict import Budget, CorrelationWitness, Verdict

CNC_CAP = 12
LATTICE_CAP = 13


# -- shared helpers ----------------------------------------------------------


def ternary_table(cube: np.ndarray) -> np.ndarray:
    """Sums of the measure over every face of the cube.

    Axis ``k`` takes values 0, 1 (coordinate fixed) or 2 (summed out), so
    entry ``x`` is the mass of the partial assignment encoded by ``x``.
    """
    t = cube
    for ax in range(cube.ndim):
        t = np.concatenate([t, t.sum(axis=ax, keepdims=True)], axis=ax)
    return t


def assignments(n: int) -> Iterator[dict[int, int]]:
    """All partial assignments, by size, then coordinates, then values."""
    for s in range(n + 1):
        for I in itertools.combinations(range(1, n + 1), s):
            for vals in itertools.product((0, 1), repeat=s):
                yield dict(zip(I, vals))


def _slice(cube: np.ndarray, a: Mapping[int, int]) -> np.ndarray:
    return cube[tuple(a.get(k + 1, slice(None)) for k in range(cube.ndim))]


def _free(n: int, a: Mapping[int, int]) -> list[int]:
    return [c for c in range(1, n + 1) if c not in a]


def _is_zero(x) -> bool:
    return not int(x)


def _pair_sides(s: np.ndarray) -> tuple[Fraction, Fraction]:
    """``P(11)`` and ``P(1.)P(.1)`` from a 2x2 table of masses."""
    s00, s01, s10, s11 = (int(s[0, 0]), int(s[0, 1]), int(s[1, 0]), int(s[1, 1]))
    t = s00 + s01 + s10 + s11
    return Fraction(s11, t), Fraction((s10 + s11) * (s01 + s11), t * t)


def weighted_ints(mu: Measure, W: Sequence[Fraction]) -> list[int]:
    """Integer weights of ``W o mu`` (finite positive field), up to a positive factor."""
    ws = mu.int_weights
    nums = [Fraction(x).numerator for x in W]
    dens = [Fraction(x).denominator for x in W]
    out = []
    for idx, w in enumerate(ws):
        if w:
            for k in range(mu.n):
                w *= nums[k] if (idx >> k) & 1 else dens[k]
        out.append(w)
    return out


def _exact_cube(ints: Sequence[int], n: int, headroom: int = 1) -> np.ndarray:
    total = sum(ints)
    if total * total * headroom < INT64_SAFE:
        arr = np.asarray(ints, dtype=np.int64)
    else:
        arr = np.empty(len(ints), dtype=object)
        arr[:] = list(ints)
    return to_cube(arr, n)


# -- pairwise correlation ----------------------------------------------------


def _nc_violation(cube: np.ndarray):
    m = cube.ndim
    for i in range(m):
        for j in range(i + 1, m):
            others = tuple(k for k in range(m) if k not in (i, j))
            s = cube.sum(axis=others) if others else cube
            if s[1, 1] * s[0, 0] > s[1, 0] * s[0, 1]:
                return (i + 1, j + 1), s
    return None


def check_NC(mu: Measure) -> Verdict:
    found = _nc_violation(mu.cube())
    if found is None:
        return Verdict.holds("pairwise-exhaustive", {"pairs": mu.n * (mu.n - 1) // 2})
    (i, j), s = found
    lhs, rhs = _pair_sides(s)
    return Verdict.fails("pairwise-exhaustive", CorrelationWitness("pair", pair=(i, j), lhs=lhs, rhs=rhs))


# -- lattice conditions ------------------------------------------------------


@lru_cache(maxsize=16)
def _incomparable_pairs(m: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.triu_indices(1 << m, k=1)
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    meet = a & b
    keep = (meet != a) & (meet != b)
    return a[keep], b[keep]


def _lattice_violation(w: np.ndarray, m: int, negative: bool):
    """First incomparable pair violating NLC (``negative``) or PLC, in row order."""
    if m < 2:
        return None
    a, b = _incomparable_pairs(m)
    step = 1 << 22
    for lo in range(0, len(a), step):
        aa, bb = a[lo:lo + step], b[lo:lo + step]
        prod = w[aa] * w[bb]
        lat = w[aa & bb] * w[aa | bb]
        bad = prod < lat if negative else prod > lat
        hit = np.flatnonzero(bad)
        if hit.size:
            k = hit[0]
            return int(aa[k]), int(bb[k])
    return None


def _lattice_check(mu: Measure, negative: bool) -> Verdict:
    name = "NLC" if negative else "PLC"
    if mu.n > LATTICE_CAP:
        raise CapExceeded(f"{name} brute force capped at n={LATTICE_CAP}")
    w = mu.array()
    hit = _lattice_violation(w, mu.n, negative)
    if hit is None:
        return Verdict.holds("lattice-pairs-exhaustive")
    x, y = hit
    t = mu.int_total
    wx, wy, wm, wj = (int(w[k]) for k in (x, y, x & y, x | y))
    wit = {
        "eta": bitstring(x, mu.n),
        "tau": bitstring(y, mu.n),
        "product": Fraction(wx * wy, t * t),
        "meet_join_product": Fraction(wm * wj, t * t),
    }
    return Verdict.fails("lattice-pairs-exhaustive", wit)


def check_PLC(mu: Measure) -> Verdict:
    return _lattice_check(mu, negative=False)


def check_NLC(mu: Measure) -> Verdict:
    return _lattice_check(mu, negative=True)


def check_hNLC(mu: Measure) -> Verdict:
    """NLC for every projection, brute force over all coordinate subsets."""
    n = mu.n
    if n > CNC_CAP:
        raise CapExceeded(f"h-NLC capped at n={CNC_CAP}")
    cube = mu.cube()
    for size in range(2, n + 1):
        for J in itertools.combinations(range(n), size):
            drop = tuple(k for k in range(n) if k not in J)
            proj = cube.sum(axis=drop) if drop else cube
            w = from_cube(np.asarray(proj))
            hit = _lattice_violation(w, size, negative=True)
            if hit is not None:
                x, y = hit
                t = int(w.sum())
                wit = {
                    "projection": [j + 1 for j in J],
                    "eta": bitstring(x, size),
                    "tau": bitstring(y, size),
                    "product": Fraction(int(w[x]) * int(w[y]), t * t),
                    "meet_join_product": Fraction(int(w[x & y]) * int(w[x | y]), t * t),
                }
                return Verdict.fails("projections-exhaustive", wit)
    return Verdict.holds("projections-exhaustive", {"projections": (1 << n) - 1})


# -- conditional negative correlation ---------------------------------------


def _ternary_digits(flat: int, m: int) -> list[int]:
    # C-order over shape (3,)*m: last axis fastest
    out = [0] * m
    for k in range(m - 1, -1, -1):
        out[k] = flat % 3
        flat //= 3
    return out


def _cnc_violation(cube: np.ndarray):
    """Canonical violation over every conditioning, or None.

    Returns ``(assignment, pair, table)`` with 0-based axes, choosing the
    smallest conditioning size first, then pair, then assignment.
    """
    m = cube.ndim
    if m < 2:
        return None
    T = ternary_table(cube)
    best = None
    for i in range(m):
        for j in range(i + 1, m):
            def sl(a, b):
                idx = [slice(None)] * m
                idx[i], idx[j] = a, b
                return T[tuple(idx)]

            t00, t01, t10, t11 = sl(0, 0), sl(0, 1), sl(1, 0), sl(1, 1)
            bad = t11 * t00 > t10 * t01
            if not np.any(bad):
                continue
            others = [k for k in range(m) if k not in (i, j)]
            for flat in np.flatnonzero(bad):
                digits = _ternary_digits(int(flat), len(others))
                a = {others[t] + 0: d for t, d in enumerate(digits) if d != 2}
                key = (len(a), (i, j), sorted(a.items()))
                if best is None or key < best[0]:
                    s = np.array([[t00.flat[flat], t01.flat[flat]], [t10.flat[flat], t11.flat[flat]]], dtype=object)
                    best = (key, a, (i, j), s)
                if len(a) == 0:
                    break
    if best is None:
        return None
    return best[1], best[2], best[3]


def check_CNC(mu: Measure) -> Verdict:
    if mu.n > CNC_CAP:
        raise CapExceeded(f"CNC capped at n={CNC_CAP}")
    hit = _cnc_violation(mu.cube())
    if hit is None:
        return Verdict.holds("conditionings-exhaustive", {"conditionings": 3 ** mu.n})
    a, (i, j), s = hit
    lhs, rhs = _pair_sides(s)
    wit = CorrelationWitness(
        "pair", pair=(i + 1, j + 1), assignment={k + 1: v for k, v in a.items()}, lhs=lhs, rhs=rhs
    )
    return Verdict.fails("conditionings-exhaustive", wit)


# -- negative association ----------------------------------------------------


def _split_matrix(cube: np.ndarray, I: Sequence[int], J: Sequence[int]) -> np.ndarray:
    """Masses indexed by (local config on I, local config on J); axes 0-based."""
    order = tuple(reversed(I)) + tuple(reversed(J))
    return cube.transpose(order).reshape(1 << len(I), 1 << len(J))


@lru_cache(maxsize=None)
def _indicator_cached(m: int, exact: bool) -> np.ndarray:
    U = upset_matrix(m).astype(np.int64)
    out = as_object(U) if exact else U
    out.setflags(write=False)
    return out


def _indicator(m: int, dtype) -> np.ndarray:
    return _indicator_cached(m, dtype == object)


@lru_cache(maxsize=None)
def _float_indicator(m: int) -> np.ndarray:
    out = upset_matrix(m).astype(float)
    out.setflags(write=False)
    return out


def _float_copy(cube: np.ndarray) -> np.ndarray | None:
    """Scaled float image of an object-dtype cube, or None when small entries would underflow."""
    flat = [int(x) for x in cube.flat]
    top = max(flat)
    low = min((x for x in flat if x), default=top)
    if top == 0 or low * 10**200 < top:
        return None
    return np.array([x / top for x in flat]).reshape(cube.shape)


@lru_cache(maxsize=None)
def _nontrivial(m: int) -> np.ndarray:
    U = upset_matrix(m)
    k = U.sum(axis=1)
    return (k > 0) & (k < U.shape[1])


def _near_pairs(Mf: np.ndarray, total: float, nI: int, nJ: int, slack: float) -> np.ndarray:
    UI, UJ = _float_indicator(nI), _float_indicator(nJ)
    PA, PB = UI @ Mf.sum(axis=1), UJ @ Mf.sum(axis=0)
    outer = np.multiply.outer(PA, PB)
    near = (UI @ Mf @ UJ.T) * total - outer > -slack * outer
    return near & np.multiply.outer(_nontrivial(nI), _nontrivial(nJ))


def _na_violation(cube: np.ndarray, slack: float = 1e-9):
    """First violating ``(I, J, A, B, P_AB, P_A, P_B, T)`` with local masks, or None.

    Object-dtype cubes are screened in floating point first; only nontrivial
    event pairs within ``slack`` of a violation are evaluated exactly.
    """
    m = cube.ndim
    if m < 2:
        return None
    if m > UPSET_CAP:
        raise CapExceeded(f"NA brute force capped at n={UPSET_CAP}")
    total = cube.sum()
    if _is_zero(total):
        return None
    fcube = _float_copy(cube) if cube.dtype == object else None
    for size in range(0, m - 1):
        for extra in itertools.combinations(range(1, m), size):
            I = [0, *extra]
            J = [k for k in range(m) if k not in I]
            M = _split_matrix(cube, I, J)
            rows = cols = None
            if fcube is not None:
                near = _near_pairs(_split_matrix(fcube, I, J), float(fcube.sum()), len(I), len(J), slack)
                if not near.any():
                    continue
                rows = np.flatnonzero(near.any(axis=1))
                cols = np.flatnonzero(near.any(axis=0))
            UI, UJ = _indicator(len(I), M.dtype), _indicator(len(J), M.dtype)
            if rows is not None:
                UI, UJ = UI[rows], UJ[cols]
            PA = UI @ M.sum(axis=1)
            PB = UJ @ M.sum(axis=0)
            PAB = UI @ M @ UJ.T
            bad = PAB * total > np.multiply.outer(PA, PB)
            hit = np.flatnonzero(bad)
            if hit.size:
                ia, ib = divmod(int(hit[0]), bad.shape[1])
                ra = int(rows[ia]) if rows is not None else ia
                rb = int(cols[ib]) if cols is not None else ib
                A = int(upset_masks(len(I))[ra])
                B = int(upset_masks(len(J))[rb])
                return I, J, A, B, int(PAB[ia, ib]), int(PA[ia]), int(PB[ib]), int(total)
    return None


def _na_near(cube: np.ndarray, slack: float = 1e-9) -> bool:
    """Float screen: True when some nontrivial event pair comes within ``slack`` of violating."""
    m = cube.ndim
    total = float(cube.sum())
    for size in range(0, m - 1):
        for extra in itertools.combinations(range(1, m), size):
            I = [0, *extra]
            J = [k for k in range(m) if k not in I]
            if _near_pairs(_split_matrix(cube, I, J), total, len(I), len(J), slack).any():
                return True
    return False


def _na_witness(hit, free: Sequence[int], n_free: int, a: Mapping[int, int]) -> dict:
    I, J, A, B, pab, pa, pb, t = hit
    # events are reported on the conditioned measure's own coordinates
    ev = CorrelationWitness(
        "events",
        events=(lift(A, [k + 1 for k in I], n_free), lift(B, [k + 1 for k in J], n_free)),
        assignment=dict(a),
        lhs=Fraction(pab, t),
        rhs=Fraction(pa * pb, t * t),
    )
    return {
        "witness": ev,
        "split": ([free[k] for k in I], [free[k] for k in J]),
        "A": [bitstring(x, n_free) for x in range(1 << n_free) if (ev.events[0] >> x) & 1],
        "B": [bitstring(x, n_free) for x in range(1 << n_free) if (ev.events[1] >> x) & 1],
        "free_coords": list(free),
    }


def check_NA(mu: Measure) -> Verdict:
    if mu.n > UPSET_CAP:
        raise CapExceeded(f"NA brute force capped at n={UPSET_CAP}")
    hit = _na_violation(mu.cube())
    if hit is None:
        return Verdict.holds("upset-pairs-exhaustive")
    return Verdict.fails("upset-pairs-exhaustive", _na_witness(hit, list(range(1, mu.n + 1)), mu.n, {}))


def check_CNA(mu: Measure) -> Verdict:
    n = mu.n
    if n > UPSET_CAP:
        raise CapExceeded(f"CNA brute force capped at n={UPSET_CAP}")
    cube = mu.cube()
    count = 0
    for a in assignments(n):
        sub = _slice(cube, a)
        if _is_zero(np.sum(sub)):
            continue
        count += 1
        hit = _na_violation(np.asarray(sub))
        if hit is not None:
            free = _free(n, a)
            return Verdict.fails("conditionings-upset-pairs", _na_witness(hit, free, len(free), a))
    return Verdict.holds("conditionings-upset-pairs", {"conditionings": count})


# -- Feder-Mihail ------------------------------------------------------------


def _mass_of_events(w: np.ndarray, masks: np.ndarray, m: int) -> np.ndarray:
    """``sum_{x in A} w[x]`` for every bitset ``A`` in ``masks``, via byte lookup tables."""
    npts = 1 << m
    width = min(8, npts)
    out = None
    for c in range(0, npts, width):
        vals = w[c:c + width]
        table = np.zeros(1 << width, dtype=w.dtype)
        for v in range(1 << width):
            s = 0
            for b in range(width):
                if (v >> b) & 1:
                    s = s + vals[b]
            table[v] = s
        idx = ((masks >> np.uint64(c)) & np.uint64((1 << width) - 1)).astype(np.int64)
        part = table[idx]
        out = part if out is None else out + part
    return out


def _fm_violation(cube: np.ndarray):
    """First up-set (local bitset) with no coordinate of positive influence, or None."""
    m = cube.ndim
    if m == 0:
        return None
    if m > UPSET_CAP:
        raise CapExceeded(f"FM brute force capped at n={UPSET_CAP}")
    w = from_cube(np.asarray(cube))
    total = w.sum()
    if _is_zero(total):
        return None
    masks = upset_masks(m)
    PA = _mass_of_events(w, masks, m)
    ok = np.zeros(len(masks), dtype=bool)
    idx = np.arange(1 << m)
    for i in range(m):
        wi = np.where((idx >> i) & 1 == 1, w, 0).astype(w.dtype)
        PAi = _mass_of_events(wi, masks, m)
        ok |= PAi * total >= PA * wi.sum()
        if ok.all():
            return None
    bad = np.flatnonzero(~ok)
    return int(masks[bad[0]])


def _fm_witness(A: int, m: int, free, a, W=None) -> dict:
    out = {
        "event": [bitstring(x, m) for x in range(1 << m) if (A >> x) & 1],
        "free_coords": list(free),
        "assignment": dict(a),
    }
    if W is not None:
        out["field"] = list(W)
    return out


def check_FM(mu: Measure) -> Verdict:
    if mu.n > UPSET_CAP:
        raise CapExceeded(f"FM brute force capped at n={UPSET_CAP}")
    A = _fm_violation(mu.cube())
    if A is None:
        return Verdict.holds("upsets-exhaustive", {"upsets": len(upset_masks(mu.n))})
    return Verdict.fails("upsets-exhaustive", _fm_witness(A, mu.n, range(1, mu.n + 1), {}))


def _cfm_violation(cube: np.ndarray):
    n = cube.ndim
    for a in assignments(n):
        sub = np.asarray(_slice(cube, a))
        if _is_zero(np.sum(sub)):
            continue
        A = _fm_violation(sub)
        if A is not None:
            return a, A
    return None


def check_CFM(mu: Measure) -> Verdict:
    if mu.n > UPSET_CAP:
        raise CapExceeded(f"CFM brute force capped at n={UPSET_CAP}")
    hit = _cfm_violation(mu.cube())
    if hit is None:
        return Verdict.holds("conditionings-upsets-exhaustive")
    a, A = hit
    free = _free(mu.n, a)
    return Verdict.fails("conditionings-upsets-exhaustive", _fm_witness(A, len(free), free, a))


def sample_fields(n: int, budget: Budget, rng: random.Random) -> Iterator[list[Fraction]]:
    """Seeded finite positive fields: log-uniform powers of two, then random rationals."""
    b = budget.grid_bits
    for s in range(budget.samples):
        if s % 2 == 0:
            yield [Fraction(2) ** rng.randint(-b, b) for _ in range(n)]
        else:
            yield [Fraction(rng.randint(1, 64), rng.randint(1, 64)) for _ in range(n)]


def falsify_FMplus(mu: Measure, budget: Budget | None = None) -> Verdict:
    """Search for a field under which FM fails; never returns Holds."""
    budget = budget or Budget(samples=200)
    if mu.n > UPSET_CAP:
        return _falsify_FMplus_sampled(mu, budget)
    hit = _cfm_violation(mu.cube())
    if hit is not None:
        a, A = hit
        free = _free(mu.n, a)
        W = [INFINITY if a.get(k) == 1 else (Fraction(0) if k in a else Fraction(1)) for k in range(1, mu.n + 1)]
        return Verdict.fails("boundary-fields", _fm_witness(A, len(free), free, a, [str(x) if x is INFINITY else x for x in W]))
    rng = random.Random(budget.seed)
    tried = 0
    for W in sample_fields(mu.n, budget, rng):
        tried += 1
        cube = _exact_cube(weighted_ints(mu, W), mu.n)
        A = _fm_violation(cube)
        if A is not None:
            return Verdict.fails("sampled-fields", _fm_witness(A, mu.n, range(1, mu.n + 1), {}, W))
    return Verdict.unknown("sampled-fields", boundary_patterns=3 ** mu.n, sampled_fields=tried)


FM_SAMPLED_CAP = 16
FM_SAMPLED_FIELDS = 1000


def _falsify_FMplus_sampled(mu: Measure, budget: Budget, per_field: int = 4) -> Verdict:
    """Above the enumeration cap: random up-sets (up-closures of a few random
    configurations) under sampled fields, float-screened and confirmed in integers."""
    n = mu.n
    if n > FM_SAMPLED_CAP:
        raise CapExceeded(f"FM+ falsification capped at n={FM_SAMPLED_CAP}")
    rng = random.Random(budget.seed)
    idx = np.arange(1 << n)
    bits = [(idx >> k) & 1 == 1 for k in range(n)]
    tried = 0
    for W in sample_fields(n, replace(budget, samples=min(budget.samples, FM_SAMPLED_FIELDS)), rng):
        tried += 1
        ints = weighted_ints(mu, W)
        top = max(ints)
        w = np.array([x / top for x in ints])
        T = w.sum()
        Pi = np.array([w[b].sum() for b in bits])
        for _ in range(per_field):
            gens = [rng.getrandbits(n) for _ in range(rng.randint(1, 3))]
            A = np.zeros(1 << n, dtype=bool)
            for g in gens:
                A |= (idx & g) == g
            PA = w[A].sum()
            if PA == 0 or PA == T:
                continue
            PAi = np.array([w[A & b].sum() for b in bits])
            if np.any(PAi * T >= PA * Pi * (1 - 1e-9)):
                continue
            # exact confirmation
            Ti = sum(ints)
            members = np.flatnonzero(A)
            PAe = sum(ints[x] for x in members)
            if all(sum(ints[x] for x in members if (x >> k) & 1) * Ti < PAe * sum(ints[x] for x in range(1 << n) if (x >> k) & 1)
                   for k in range(n)):
                return Verdict.fails("sampled-fields-upsets", {"generators": [bitstring(g, n) for g in gens],
                                                                "field": list(W), "free_coords": list(range(1, n + 1))})
    return Verdict.unknown("sampled-fields-upsets", sampled_fields=tried, upsets_per_field=per_field, seed=budget.seed,
                           note=f"up-set enumeration is capped at n={UPSET_CAP}")


# -- variables of positive influence ----------------------------------------


def find_positive_influence(mu: Measure, f) -> int | None:
    """Some coordinate ``i`` with ``E(f eta_i) >= E(f) E(eta_i)``, or None.

    ``f`` is a sequence of ``2^n`` values, a mapping from configuration index,
    or a callable on configuration indices.
    """
    N = 1 << mu.n
    if callable(f):
        vals = [Fraction(f(x)) for x in range(N)]
    elif isinstance(f, Mapping):
        vals = [Fraction(f.get(x, 0)) for x in range(N)]
    else:
        if len(f) != N:
            raise PreconditionViolated(f"f needs {N} values")
        vals = [Fraction(v) for v in f]
    w = mu.weights
    T = mu.total
    Ef = sum((v * x for v, x in zip(vals, w)), Fraction(0))
    for i in range(1, mu.n + 1):
        b = 1 << (i - 1)
        Ei = sum((x for k, x in enumerate(w) if k & b), Fraction(0))
        Efi = sum((v * x for k, (v, x) in enumerate(zip(vals, w)) if k & b), Fraction(0))
        if Efi * T >= Ef * Ei:
            return i
    return None


# -- four-sequence inequality -------------------------------------------------


def lemma_four_sequence(alpha, beta, gamma, delta) -> bool:
    """Truth of ``sum i a_i * sum b_i d_i + sum i b_i * sum a_i c_i <= sum i a_i c_i * sum b_i + sum i b_i d_i * sum a_i``.

    The hypotheses are validated first and a PreconditionViolated is raised
    when any fails.
    """
    a, b, c, d = ([parse_rational(x) if not isinstance(x, Fraction) else x for x in s] for s in (alpha, beta, gamma, delta))
    n = len(a)
    if not (len(b) == len(c) == len(d) == n):
        raise PreconditionViolated("sequences must share a length")
    if any(x < 0 for s in (a, b, c, d) for x in s):
        raise PreconditionViolated("sequences must be nonnegative")
    if not any(a) or not any(b):
        raise PreconditionViolated("alpha and beta must not vanish identically")
    if any(c[i] > c[i + 1] for i in range(n - 1)) or any(d[i] > d[i + 1] for i in range(n - 1)):
        raise PreconditionViolated("gamma and delta must be increasing")
    for i in range(n):
        for j in range(i + 1):
            if c[i] < d[j]:
                raise PreconditionViolated(f"gamma_{i} < delta_{j}")
    Sa, Sb = sum(a), sum(b)
    Sac = sum(x * y for x, y in zip(a, c))
    Sbd = sum(x * y for x, y in zip(b, d))
    if Sac * Sb > Sbd * Sa:
        raise PreconditionViolated("average of gamma under alpha exceeds that of delta under beta")
    Sia = sum(i * x for i, x in enumerate(a))
    Sib = sum(i * x for i, x in enumerate(b))
    Siac = sum(i * x * y for i, (x, y) in enumerate(zip(a, c)))
    Sibd = sum(i * x * y for i, (x, y) in enumerate(zip(b, d)))
    return Sia * Sbd + Sib * Sac <= Siac * Sb + Sibd * Sa


# -- witness replay ----------------------------------------------------------


def replay(mu: Measure, wit: CorrelationWitness) -> bool:
    """Recompute a correlation witness from scratch; True iff it is a strict violation as recorded."""
    from .measure import condition, impose_field

    nu = mu
    if wit.field_ is not None:
        W = [wit.field_.get(k, Fraction(1)) for k in range(1, mu.n + 1)]
        nu = impose_field(nu, ExternalField(tuple(W)))
    if wit.assignment:
        nu = condition(nu, wit.assignment)
    if wit.kind == "pair":
        # pairs use the original coordinate labels
        i, j = (nu.coords.index(c) + 1 for c in wit.pair)
        bi, bj = 1 << (i - 1), 1 << (j - 1)
        A = sum(1 << x for x in range(1 << nu.n) if x & bi)
        B = sum(1 << x for x in range(1 << nu.n) if x & bj)
    else:
        A, B = wit.events
    pab, pa, pb = nu.prob(A & B), nu.prob(A), nu.prob(B)
    return pab > pa * pb and pab == wit.lhs and pa * pb == wit.rhs
