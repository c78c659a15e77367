"""Exception hierarchy shared by all modules.

Every validation failure carries enough payload (offending indices, names,
distances) to reconstruct the problem without re-running the validator.
"""


class TdsError(Exception):
    """Base class for all package errors."""


class NotAPreorder(TdsError):
    """Relation is missing reflexivity or transitivity.

    ``witness`` is ``(x,)`` for a reflexivity failure and ``(x, y, z)`` for a
    transitivity failure (x<=y and y<=z but not x<=z).
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PointOutOfRange(TdsError):
    pass


class SizeOverflow(TdsError):
    pass


class NotAPartition(TdsError):
    pass


class EmptySet(TdsError):
    pass


class ScaleNotInLadder(TdsError):
    pass


class AxiomViolation(TdsError):
    """Semi-decomposition axiom failure; ``witness`` is the offending (x, y)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SizeMismatch(TdsError):
    pass


class SnapExceeded(TdsError):
    """A generator image landed further than snap_tol from every sample point."""

    def __init__(self, message, point=None, generator=None, distance=None):
        super().__init__(message)
        self.point = point
        self.generator = generator
        self.distance = distance


class EmptyGeneratorSet(TdsError):
    pass


class InternalDisagreement(TdsError):
    """Two checker routes that are provably equivalent disagreed.

    Raised only where the equivalence is a theorem (e.g. the two pointwise
    almost periodicity forms on a Hausdorff space); there it signals a
    checker bug, nothing else.
    """


class SemigroupTooLarge(TdsError):
    pass


class BudgetExceeded(TdsError):
    pass


class UnknownEntry(TdsError):
    pass


class ParseError(TdsError):
    pass


class ValidationError(TdsError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location
