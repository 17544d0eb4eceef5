"""Three-valued verdicts and correlation witnesses."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from ._exact import jsonable


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a property check.

    ``Holds`` carries a certificate, ``Fails`` a replayable witness, and
    ``Unknown`` whatever evidence was gathered before the budget ran out.
    """

    status: Status
    method: str
    certificate: Mapping[str, Any] | None = None
    witness: Any = None
    evidence: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def holds(cls, method: str, certificate=None, **evidence) -> Verdict:
        return cls(Status.HOLDS, method, certificate=certificate or {}, evidence=evidence)

    @classmethod
    def fails(cls, method: str, witness, **evidence) -> Verdict:
        return cls(Status.FAILS, method, witness=witness, evidence=evidence)

    @classmethod
    def unknown(cls, method: str, **evidence) -> Verdict:
        return cls(Status.UNKNOWN, method, evidence=evidence)

    @property
    def ok(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def failed(self) -> bool:
        return self.status is Status.FAILS

    @property
    def unknown_(self) -> bool:
        return self.status is Status.UNKNOWN

    def to_dict(self) -> dict:
        out = {"status": self.status.value, "method": self.method}
        if self.certificate is not None:
            out["certificate"] = jsonable(self.certificate)
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        if self.evidence:
            out["evidence"] = jsonable(self.evidence)
        return out

    def __repr__(self) -> str:
        return f"Verdict({self.status.value}, {self.method})"


@dataclass(frozen=True)
class CorrelationWitness:
    """A violated correlation inequality ``lhs <= rhs`` (so ``lhs > rhs``).

    ``kind`` is ``"pair"`` (coordinates ``i, j``) or ``"events"`` (up-sets
    given as bitsets over the configurations of the conditioned measure).
    Both sides are in cleared, unnormalized form.
    """

    kind: str
    pair: tuple[int, int] | None = None
    events: tuple[int, int] | None = None
    assignment: Mapping[int, int] = field(default_factory=dict)
    field_: Mapping[int, Any] | None = None
    lhs: Fraction | int = 0
    rhs: Fraction | int = 0

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "assignment": jsonable(dict(sorted(self.assignment.items())))}
        if self.pair is not None:
            out["pair"] = list(self.pair)
        if self.events is not None:
            out["events"] = [hex(e) for e in self.events]
        if self.field_ is not None:
            out["field"] = jsonable(dict(sorted(self.field_.items())))
        out["lhs"] = jsonable(self.lhs)
        out["rhs"] = jsonable(self.rhs)
        return out


@dataclass(frozen=True)
class Budget:
    """Search budgets shared by the falsifiers and the branch-and-bound certifier."""

    samples: int = 10_000
    boxes: int = 100_000
    seed: int = 0
    grid_bits: int = 4
    descent_starts: int = 8
    descent_sweeps: int = 3

    def to_dict(self):
        return jsonable(self.__dict__)
