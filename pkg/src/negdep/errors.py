"""Exception hierarchy shared by every module."""


class NegDepError(Exception):
    """Base class for all library errors."""


class ZeroMass(NegDepError):
    """A measure (or a rescaled/field-imposed measure) has no positive weight."""


class ZeroProbabilityCondition(NegDepError):
    """Conditioning on an event of probability zero."""


class CapExceeded(NegDepError):
    """Input exceeds the size cap of an exhaustive procedure."""


class ParseError(NegDepError, ValueError):
    """Malformed rational, bitstring, family spec or JSON document."""


class DimensionMismatch(NegDepError, ValueError):
    pass


class PreconditionViolated(NegDepError, ValueError):
    pass


class OddDimension(NegDepError, ValueError):
    pass


class OddGroundSet(NegDepError, ValueError):
    pass


class ParameterOutOfRange(NegDepError, ValueError):
    pass


class InvalidDistribution(NegDepError, ValueError):
    pass


class Disconnected(NegDepError, ValueError):
    pass


class UnknownTarget(NegDepError, KeyError):
    pass


class NoVerdict(NegDepError, KeyError):
    pass


class Inconsistent(NegDepError):
    """Two derivations in a property ledger disagree.

    This means either an implementation bug or a falsified theorem, so it is
    never resolved silently.
    """

    def __init__(self, prop, existing, incoming):
        self.prop = prop
        self.existing = existing
        self.incoming = incoming
        super().__init__(
            f"inconsistent verdicts for {prop}: {existing!r} vs {incoming!r}"
        )
