"""Exception hierarchy.

Two families: ``ValidationError`` for bad inputs (CLI exit status 2) and
``PipelineError`` for geometric preconditions that fail mid-computation
(CLI exit status 3). Class names double as the diagnostic error names.
"""


class GaussflatError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GaussflatError, ValueError):
    pass


class PipelineError(GaussflatError):
    pass


# -- validation -------------------------------------------------------------

class DimensionMismatch(ValidationError):
    pass


class BaseMismatch(ValidationError):
    pass


class NonpositiveDelta(ValidationError):
    pass


class NonpositiveAlpha(ValidationError):
    pass


class NonpositiveT(ValidationError):
    pass


class GeometryOutsideBall(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class InvariantViolation(ValidationError):
    pass


# -- pipeline ---------------------------------------------------------------

class OutOfInjectivityRange(PipelineError):
    pass


class EmptyManifold(PipelineError):
    pass


class EmptyReference(PipelineError):
    pass


class DiameterTooLarge(PipelineError):
    pass


class ConeAtOrigin(PipelineError):
    pass


class NonTransverse(PipelineError):
    pass


class NoSlabSamples(PipelineError):
    pass
