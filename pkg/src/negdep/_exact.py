"""Exact-number plumbing: rational parsing, integer scaling, JSON conversion."""

from __future__ import annotations

import dataclasses
import enum
import math
import re
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from .errors import ParseError

_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")

# int64 arrays are used only when every intermediate stays below this bound.
INT64_SAFE = 2**62


def parse_rational(text: str | int | Fraction, *, nonnegative: bool = False) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction.

    Decimal strings such as ``"0.71"`` are accepted as exact decimal rationals.
    Floats are rejected: they are not exact.
    """
    if isinstance(text, bool):
        raise ParseError(f"not a rational: {text!r}")
    if isinstance(text, Fraction):
        value = text
    elif isinstance(text, int):
        value = Fraction(text)
    elif isinstance(text, str):
        m = _RATIONAL.match(text)
        if m:
            num, den = m.group(1), m.group(2)
            if den is not None and int(den) == 0:
                raise ParseError(f"zero denominator in {text!r}")
            value = Fraction(int(num), int(den) if den else 1)
        elif re.fullmatch(r"\s*[+-]?\d*\.\d+\s*", text):
            value = Fraction(text.strip())
        else:
            raise ParseError(f"not a rational: {text!r}")
    else:
        raise ParseError(f"not a rational: {text!r} ({type(text).__name__})")
    if nonnegative and value < 0:
        raise ParseError(f"negative value {text!r}")
    return value


def fmt_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def common_scale(values: Iterable[Fraction]) -> tuple[list[int], int]:
    """Return integers ``k_i`` and ``L`` with ``values[i] == k_i / L``."""
    values = list(values)
    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return [int(v * lcm) for v in values], lcm


def int_array(values, bound: int) -> np.ndarray:
    """Exact integer ndarray: int64 when ``bound`` is safe, Python ints otherwise."""
    if bound < INT64_SAFE:
        return np.asarray(values, dtype=np.int64)
    arr = np.empty(len(values), dtype=object)
    arr[:] = [int(v) for v in values]
    return arr


def as_object(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return arr
    out = np.empty(arr.shape, dtype=object)
    out[...] = arr.tolist() if arr.ndim else int(arr)
    return out


def bitstring(mask: int, n: int) -> str:
    """Configuration index to bitstring, coordinate 1 leftmost."""
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


def parse_bitstring(s: str, n: int | None = None) -> int:
    s = s.strip()
    if not s or set(s) - {"0", "1"}:
        raise ParseError(f"not a bitstring: {s!r}")
    if n is not None and len(s) != n:
        raise ParseError(f"bitstring {s!r} has length {len(s)}, expected {n}")
    return sum(1 << i for i, ch in enumerate(s) if ch == "1")


def jsonable(obj: Any) -> Any:
    """Recursively convert library objects into JSON-ready values.

    Rationals become ``"p/q"`` strings, never floats.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fmt_rational(obj)
    if isinstance(obj, float):
        # timing fields only
        return round(obj, 6)
    if isinstance(obj, enum.Enum):
        return obj.value
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    return repr(obj)
