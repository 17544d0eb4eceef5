"""Exact (unnormalized) measures on the Boolean cube and the basic operations.

Configurations are indexed by bitmask: bit ``i-1`` of the index is the value
of coordinate ``i``.  Coordinates are 1-based everywhere in the public API.
In bitstrings (the JSON format) coordinate 1 is the leftmost character.

Conditioned and projected measures live on fewer coordinates; they are
relabelled to ``1..m`` preserving order, and ``Measure.coords`` records the
original label of each surviving coordinate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._exact import bitstring, common_scale, fmt_rational, int_array, parse_bitstring, parse_rational
from .errors import CapExceeded, DimensionMismatch, ParseError, ZeroMass, ZeroProbabilityCondition

MAX_N = 24

Assignment = Mapping[int, int]
RankSequence = tuple[Fraction, ...]


class _Infinity:
    """The field value that means "condition on the coordinate being 1"."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def popcount(x: int) -> int:
    return bin(x).count("1")


def popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        out += (idx >> b) & 1
    return out


def to_cube(flat: np.ndarray, n: int) -> np.ndarray:
    """View a flat configuration array as shape ``(2,)*n``, axis ``k`` = coordinate ``k+1``."""
    if n == 0:
        return flat.reshape(())
    return flat.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1)))


def from_cube(cube: np.ndarray) -> np.ndarray:
    n = cube.ndim
    if n == 0:
        return cube.reshape(1)
    return np.ascontiguousarray(cube.transpose(tuple(range(n - 1, -1, -1)))).reshape(-1)


@dataclass(frozen=True, eq=False)
class Measure:
    n: int
    weights: tuple[Fraction, ...]
    label: str = ""
    coords: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise CapExceeded(f"n={self.n} outside 0..{MAX_N}")
        w = tuple(Fraction(x) for x in self.weights)
        if len(w) != 1 << self.n:
            raise DimensionMismatch(f"expected {1 << self.n} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if not any(w):
            raise ZeroMass("all weights are zero")
        object.__setattr__(self, "weights", w)
        if self.coords is None:
            object.__setattr__(self, "coords", tuple(range(1, self.n + 1)))
        elif len(self.coords) != self.n:
            raise DimensionMismatch("coords must have one label per coordinate")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, n: int, table: Mapping[str | int, object], label: str = "") -> Measure:
        """Build from ``{bitstring or index: weight}``; omitted points weigh 0."""
        w = [Fraction(0)] * (1 << n)
        for key, val in table.items():
            idx = parse_bitstring(key, n) if isinstance(key, str) else int(key)
            w[idx] = parse_rational(val, nonnegative=True) if not isinstance(val, Fraction) else val
        return cls(n, tuple(w), label)

    # -- exact views ------------------------------------------------------

    @cached_property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @cached_property
    def scaled(self) -> tuple[tuple[int, ...], Fraction]:
        """Coprime integers ``k`` and a factor ``c`` with ``weights[i] == k[i] * c``."""
        ints, lcm = common_scale(self.weights)
        g = 0
        for k in ints:
            g = math.gcd(g, k)
        return tuple(k // g for k in ints), Fraction(g, lcm)

    @property
    def int_weights(self) -> tuple[int, ...]:
        return self.scaled[0]

    @cached_property
    def int_total(self) -> int:
        return sum(self.int_weights)

    def array(self, headroom: int = 1) -> np.ndarray:
        """Integer weights as an exact ndarray.

        ``headroom`` bounds the extra multiplicative factor a caller applies on
        top of products of two sums; int64 is used only when that stays safe.
        """
        return int_array(self.int_weights, self.int_total * self.int_total * headroom)

    def cube(self, headroom: int = 1) -> np.ndarray:
        return to_cube(self.array(headroom), self.n)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.weights) if x)

    def prob(self, event) -> Fraction:
        """Normalized probability of an event (bitset int, Event or iterable of indices)."""
        members = getattr(event, "members", event)
        if isinstance(members, int):
            s = sum((w for i, w in enumerate(self.weights) if (members >> i) & 1), Fraction(0))
        else:
            s = sum((self.weights[i] for i in members), Fraction(0))
        return s / self.total

    def same_law(self, other: Measure) -> bool:
        if self.n != other.n:
            return False
        return all(a * other.total == b * self.total for a, b in zip(self.weights, other.weights))

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return self.n == other.n and self.weights == other.weights

    def __hash__(self):
        return hash((self.n, self.weights))

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"<Measure n={self.n}{tag} support={len(self.support)}>"

    # -- JSON -------------------------------------------------------------

    def to_json_dict(self, zeros: bool = False) -> dict:
        return {
            "n": self.n,
            "weights": [
                {"set": bitstring(i, self.n), "w": fmt_rational(w)}
                for i, w in enumerate(self.weights)
                if w or zeros
            ],
        }

    def dumps(self, zeros: bool = False) -> str:
        """Measure file text with one configuration per line (``zeros`` lists every configuration)."""
        rows = [json.dumps(r) for r in self.to_json_dict(zeros)["weights"]]
        return '{"n": %d, "weights": [\n  %s\n]}\n' % (self.n, ",\n  ".join(rows))


def measure_from_json(doc: Mapping | str, label: str = "") -> Measure:
    """Parse the measure file format; duplicates and bad rationals are ParseErrors."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        n = doc["n"]
        entries = doc["weights"]
    except (KeyError, TypeError) as exc:
        raise ParseError("measure JSON needs 'n' and 'weights'") from exc
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_N:
        raise ParseError(f"bad n: {n!r}")
    table: dict[int, Fraction] = {}
    for entry in entries:
        try:
            key, val = entry["set"], entry["w"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad weight entry {entry!r}") from exc
        if not isinstance(key, str):
            raise ParseError(f"'set' must be a bitstring, got {key!r}")
        idx = parse_bitstring(key, n)
        if idx in table:
            raise ParseError(f"duplicate configuration {key!r}")
        if not isinstance(val, (str, int)) or isinstance(val, bool):
            raise ParseError(f"'w' must be a rational string, got {val!r}")
        table[idx] = parse_rational(val, nonnegative=True)
    w = [Fraction(0)] * (1 << n)
    for idx, val in table.items():
        w[idx] = val
    if not any(w):
        raise ZeroMass("measure file has no positive weight")
    return Measure(n, tuple(w), label)


def load_measure(path) -> Measure:
    with open(path) as fh:
        return measure_from_json(fh.read(), label=str(path))


# -- operations -------------------------------------------------------------


def normalize(mu: Measure) -> Measure:
    t = mu.total
    if t == 0:
        raise ZeroMass("cannot normalize a zero measure")
    if t == 1:
        return mu
    return Measure(mu.n, tuple(w / t for w in mu.weights), mu.label, mu.coords)


def _check_assignment(mu: Measure, a: Assignment) -> dict[int, int]:
    out = {}
    for i, v in dict(a).items():
        i = int(i)
        if not 1 <= i <= mu.n:
            raise DimensionMismatch(f"coordinate {i} outside 1..{mu.n}")
        if v not in (0, 1):
            raise ValueError(f"assignment value must be 0 or 1, got {v!r}")
        out[i] = int(v)
    return out


def _object_cube(mu: Measure) -> np.ndarray:
    arr = np.empty(1 << mu.n, dtype=object)
    arr[:] = mu.weights
    return to_cube(arr, mu.n)


def condition(mu: Measure, a: Assignment) -> Measure:
    """Condition on ``eta_i = a[i]``; the result lives on the unassigned coordinates."""
    a = _check_assignment(mu, a)
    if not a:
        return normalize(mu)
    index = tuple(a.get(k + 1, slice(None)) for k in range(mu.n))
    sub = _object_cube(mu)[index]
    weights = from_cube(np.asarray(sub, dtype=object))
    if not any(weights):
        raise ZeroProbabilityCondition(f"conditioning event {a} has probability 0")
    coords = tuple(c for k, c in enumerate(mu.coords) if (k + 1) not in a)
    m = mu.n - len(a)
    tot = sum(weights, Fraction(0))
    return Measure(m, tuple(Fraction(w) / tot for w in weights), mu.label, coords)


@dataclass(frozen=True)
class ExternalField:
    """Per-coordinate multipliers; ``0`` and ``INFINITY`` mean conditioning."""

    entries: tuple

    def __post_init__(self):
        vals = []
        for e in self.entries:
            if e is INFINITY or (isinstance(e, float) and math.isinf(e) and e > 0):
                vals.append(INFINITY)
            elif isinstance(e, str) and e.strip().lower() in ("inf", "infinity", "oo"):
                vals.append(INFINITY)
            else:
                v = parse_rational(e, nonnegative=True) if not isinstance(e, Fraction) else e
                if v < 0:
                    raise ValueError("field entries must be nonnegative")
                vals.append(v)
        object.__setattr__(self, "entries", tuple(vals))

    @property
    def boundary(self) -> dict[int, int]:
        """The conditioning encoded by the 0/INFINITY entries."""
        return {
            i + 1: (1 if e is INFINITY else 0)
            for i, e in enumerate(self.entries)
            if e is INFINITY or e == 0
        }

    @property
    def is_finite_positive(self) -> bool:
        return not self.boundary

    def to_dict(self):
        return [str(e) if e is INFINITY else fmt_rational(e) for e in self.entries]


def impose_field(mu: Measure, W: ExternalField | Sequence) -> Measure:
    if not isinstance(W, ExternalField):
        W = ExternalField(tuple(W))
    if len(W.entries) != mu.n:
        raise DimensionMismatch(f"field has {len(W.entries)} entries, measure has n={mu.n}")
    bnd = W.boundary
    try:
        base = condition(mu, bnd) if bnd else mu
    except ZeroProbabilityCondition as exc:
        raise ZeroMass(str(exc)) from exc
    factors = [e for i, e in enumerate(W.entries) if (i + 1) not in bnd]
    out = []
    for idx, w in enumerate(base.weights):
        if w:
            for k, f in enumerate(factors):
                if (idx >> k) & 1:
                    w *= f
        out.append(w)
    if not any(out):
        raise ZeroMass("field annihilates the measure")
    tot = sum(out, Fraction(0))
    return Measure(base.n, tuple(x / tot for x in out), mu.label, base.coords)


def project(mu: Measure, J: Iterable[int]) -> Measure:
    """Marginal on the coordinates ``J`` (kept in increasing order); mass is preserved."""
    J = sorted(set(int(j) for j in J))
    if not J:
        raise ValueError("projection needs a nonempty coordinate set")
    for j in J:
        if not 1 <= j <= mu.n:
            raise DimensionMismatch(f"coordinate {j} outside 1..{mu.n}")
    if len(J) == mu.n:
        return mu
    drop = tuple(k for k in range(mu.n) if (k + 1) not in J)
    sub = _object_cube(mu).sum(axis=drop)
    weights = from_cube(np.asarray(sub, dtype=object))
    coords = tuple(mu.coords[j - 1] for j in J)
    return Measure(len(J), tuple(Fraction(w) for w in weights), mu.label, coords)


def rank_sequence(mu: Measure) -> RankSequence:
    r = [Fraction(0)] * (mu.n + 1)
    for idx, w in enumerate(mu.weights):
        if w:
            r[popcount(idx)] += w
    t = mu.total
    return tuple(x / t for x in r)


def rank_rescale(mu: Measure, a: Sequence) -> Measure:
    """Multiply the weight of each configuration by ``a[|eta|]``."""
    if len(a) != mu.n + 1:
        raise DimensionMismatch(f"rescaling sequence needs length {mu.n + 1}")
    a = [parse_rational(x, nonnegative=True) if not isinstance(x, Fraction) else x for x in a]
    if any(x < 0 for x in a):
        raise ValueError("rescaling sequence must be nonnegative")
    out = [w * a[popcount(i)] for i, w in enumerate(mu.weights)]
    if not any(out):
        raise ZeroMass("rank rescaling annihilates the measure")
    tot = sum(out, Fraction(0))
    return Measure(mu.n, tuple(x / tot for x in out), mu.label, mu.coords)


def complement_measure(mu: Measure) -> Measure:
    full = (1 << mu.n) - 1
    return Measure(mu.n, tuple(mu.weights[full ^ i] for i in range(1 << mu.n)), mu.label, mu.coords)


@dataclass(frozen=True)
class SymmetryType:
    kind: str  # "Exchangeable" | "AlmostExchangeable" | "Neither"
    pivot: int | None = None

    def __str__(self):
        return f"{self.kind}({self.pivot})" if self.pivot else self.kind


def _swap_invariant(w: Sequence, n: int, a: int, b: int) -> bool:
    ba, bb = 1 << (a - 1), 1 << (b - 1)
    for idx in range(1 << n):
        if (idx & ba) and not (idx & bb):
            if w[idx] != w[idx ^ ba ^ bb]:
                return False
    return True


def symmetry_type(mu: Measure) -> SymmetryType:
    n = mu.n
    w = mu.weights
    by_level: dict[int, Fraction] = {}
    exch = True
    for idx, x in enumerate(w):
        k = popcount(idx)
        if by_level.setdefault(k, x) != x:
            exch = False
            break
    if exch:
        return SymmetryType("Exchangeable")
    # adjacent transpositions of the remaining coordinates generate their symmetric group
    cache: dict[tuple[int, int], bool] = {}
    for pivot in range(1, n + 1):
        rest = [c for c in range(1, n + 1) if c != pivot]
        ok = True
        for a, b in zip(rest, rest[1:]):
            if (a, b) not in cache:
                cache[(a, b)] = _swap_invariant(w, n, a, b)
            if not cache[(a, b)]:
                ok = False
                break
        if ok:
            return SymmetryType("AlmostExchangeable", pivot)
    return SymmetryType("Neither")
