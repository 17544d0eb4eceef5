"""Events as bitsets over configurations, up-sets and their enumeration.

An event on ``n`` coordinates is a Python int whose bit ``x`` is set when the
configuration with index ``x`` belongs to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from ._exact import bitstring
from .errors import CapExceeded, PreconditionViolated

UPSET_CAP = 6


@dataclass(frozen=True)
class Event:
    n: int
    members: int

    def __contains__(self, idx: int) -> bool:
        return bool((self.members >> idx) & 1)

    def __iter__(self) -> Iterator[int]:
        m, i = self.members, 0
        while m:
            if m & 1:
                yield i
            m >>= 1
            i += 1

    def __len__(self) -> int:
        return bin(self.members).count("1")

    def __and__(self, other: Event) -> Event:
        return Event(self.n, self.members & other.members)

    def __or__(self, other: Event) -> Event:
        return Event(self.n, self.members | other.members)

    def complement(self) -> Event:
        return Event(self.n, full_mask(self.n) ^ self.members)

    @classmethod
    def from_configs(cls, n: int, configs: Iterable[int]) -> Event:
        m = 0
        for c in configs:
            m |= 1 << c
        return cls(n, m)

    @classmethod
    def coordinate(cls, n: int, i: int) -> Event:
        """The event ``{eta_i = 1}``."""
        return cls(n, coordinate_mask(n, i))

    def to_dict(self):
        return {"n": self.n, "members": [bitstring(x, self.n) for x in self]}


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


@lru_cache(maxsize=None)
def coordinate_mask(n: int, i: int) -> int:
    """Bitset of configurations with ``eta_i = 1``."""
    b = 1 << (i - 1)
    m = 0
    for x in range(1 << n):
        if x & b:
            m |= 1 << x
    return m


def _members(A) -> tuple[int, int]:
    return A.n, A.members


def is_increasing(A: Event) -> bool:
    n, m = _members(A)
    full = full_mask(n)
    for i in range(1, n + 1):
        low = m & ~coordinate_mask(n, i) & full
        if (low << (1 << (i - 1))) & ~m & full:
            return False
    return True


def affecting_coords(A: Event) -> frozenset[int]:
    n, m = _members(A)
    out = set()
    for i in range(1, n + 1):
        ones = coordinate_mask(n, i)
        low = m & ~ones
        high = m & ones
        if (low << (1 << (i - 1))) != high:
            out.add(i)
    return frozenset(out)


@lru_cache(maxsize=None)
def upset_masks(n: int) -> np.ndarray:
    """All up-sets on ``n`` coordinates as a uint64 array of bitsets.

    An up-set splits into its ``eta_n = 0`` slice ``A0`` and ``eta_n = 1``
    slice ``A1``; both are up-sets on ``n-1`` coordinates and ``A0`` is a
    subset of ``A1``.  The order is fixed: by ``A1`` then ``A0``, recursively.
    """
    if n > UPSET_CAP:
        raise CapExceeded(f"exhaustive up-set enumeration capped at n={UPSET_CAP}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.array([0, 1], dtype=np.uint64)
    prev = upset_masks(n - 1)
    shift = np.uint64(1 << (n - 1))
    width_mask = np.uint64((1 << (1 << (n - 1))) - 1)
    chunks = []
    for a1 in prev:
        sub = prev[(prev & (~a1 & width_mask)) == 0]
        chunks.append(sub | (a1 << shift))
    out = np.concatenate(chunks)
    out.setflags(write=False)
    return out


def enumerate_upsets(n: int) -> Iterator[Event]:
    for m in upset_masks(n):
        yield Event(n, int(m))


@lru_cache(maxsize=None)
def upset_matrix(n: int) -> np.ndarray:
    """Boolean indicator matrix, one row per up-set, one column per configuration (read-only)."""
    masks = upset_masks(n)
    if n == 6:
        raise CapExceeded("indicator matrix for n=6 is too large; use upset_masks")
    bits = np.arange(1 << n, dtype=np.uint64)
    out = ((masks[:, None] >> bits[None, :]) & np.uint64(1)).astype(bool)
    out.setflags(write=False)
    return out


def brute_force_upsets(n: int) -> list[int]:
    """Independent oracle: filter all ``2^(2^n)`` events by ``is_increasing``."""
    if n > 4:
        raise CapExceeded("brute-force oracle only for n <= 4")
    return [m for m in range(1 << (1 << n)) if is_increasing(Event(n, m))]


def lift(local: int, coords: Iterable[int], n: int) -> int:
    """Lift an event on the coordinates ``coords`` (local bit ``t`` = ``coords[t]``) to ``n`` coordinates."""
    coords = list(coords)
    out = 0
    for x in range(1 << n):
        loc = 0
        for t, c in enumerate(coords):
            if (x >> (c - 1)) & 1:
                loc |= 1 << t
        if (local >> loc) & 1:
            out |= 1 << x
    return out


def disjointly_affecting_pairs(n: int, I: Iterable[int], J: Iterable[int] | None = None) -> Iterator[tuple[Event, Event]]:
    """Pairs ``(A, B)`` of up-sets with ``A`` determined by ``I`` and ``B`` by ``J``.

    ``J`` defaults to the complement of ``I``; overlapping sets are rejected.
    """
    I = sorted(set(I))
    J = sorted(set(range(1, n + 1)) - set(I)) if J is None else sorted(set(J))
    if set(I) & set(J):
        raise PreconditionViolated(f"coordinate sets overlap: {set(I) & set(J)}")
    for c in I + J:
        if not 1 <= c <= n:
            raise PreconditionViolated(f"coordinate {c} outside 1..{n}")
    if len(I) > UPSET_CAP or len(J) > UPSET_CAP:
        raise CapExceeded("each side is capped at 6 coordinates")
    lifted_b = [lift(int(b), J, n) for b in upset_masks(len(J))]
    for a in upset_masks(len(I)):
        la = lift(int(a), I, n)
        for lb in lifted_b:
            yield Event(n, la), Event(n, lb)
