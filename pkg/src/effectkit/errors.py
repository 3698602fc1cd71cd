"""Exception types shared across the toolkit.

Every domain error derives from :class:`EffectKitError` so callers (and the
CLI exit-code mapping) can distinguish validation failures from genuine bugs.
"""


class EffectKitError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(EffectKitError):
    """A JSON payload does not match the documented file format."""


class DimMismatch(EffectKitError):
    """Operands live on Hilbert spaces of different dimension."""


class ConvergenceFailure(EffectKitError):
    """The eigensolver failed or its result violates residual tolerances."""


class NotPositive(EffectKitError):
    """An operator expected to be positive semidefinite is not."""

    def __init__(self, message: str, min_eig: float | None = None):
        super().__init__(message)
        self.min_eig = min_eig


class ExceedsIdentity(EffectKitError):
    """An operator expected to satisfy E <= I has an eigenvalue above 1."""

    def __init__(self, message: str, max_eig: float | None = None):
        super().__init__(message)
        self.max_eig = max_eig


class SumNotIdentity(EffectKitError):
    """A candidate POVM's effects do not sum to the identity."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NotDimTwo(EffectKitError):
    """A Bloch-vector operation received an operator that is not 2x2."""


class TraceNotOne(EffectKitError):
    """An operator expected to have unit trace does not."""


class UnknownLabel(EffectKitError):
    """A label was referenced that is absent from the effect collection."""


class SumExceedsIdentity(EffectKitError):
    """An additivity relation's operator sum exceeds the identity."""


class FrameDeficient(EffectKitError):
    """The reconstruction frame does not span the operator space."""

    def __init__(self, message: str, rank: int | None = None,
                 required: int | None = None):
        super().__init__(message)
        self.rank = rank
        self.required = required


class ValuesInconsistent(EffectKitError):
    """Reconstruction values are incompatible with any linear functional."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ProbabilityDeficit(EffectKitError):
    """Outcome probabilities do not sum to one within tolerance."""


class RecordMismatch(EffectKitError):
    """A sample record does not match the POVM it is paired with."""


class NotUnitVectors(EffectKitError):
    """Bloch directions for a no-go witness must be unit vectors."""


class DegenerateLambda(EffectKitError):
    """The mixing weight of a no-go witness must lie strictly in (0, 1)."""


class ParallelVectors(EffectKitError):
    """Witness directions coincide (or nearly so); no contradiction arises."""


class BadContext(EffectKitError):
    """A declared measurement context does not form a POVM."""


class BadRelation(EffectKitError):
    """A claimed operator sum identity does not hold."""


class DuplicateOperatorWarning(UserWarning):
    """Two distinct labels carry (numerically) the same operator."""
