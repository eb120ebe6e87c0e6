"""Typed errors shared across the package.

CLI exit-code mapping: ValidationError subclasses -> 2, NoFeasiblePlan -> 3,
InputOutputError subclasses -> 4.
"""


class HlplanError(Exception):
    """Base class for all package errors."""


class ValidationError(HlplanError):
    """Bad input data or arguments (CLI exit code 2)."""


class SchemaError(ValidationError):
    """Document does not conform to its schema."""


class OverlapError(ValidationError):
    """Object footprints intersect where they must not."""


class OutOfBoundsError(ValidationError):
    """Geometry lies outside the table bounds."""


class CoincidentPoints(ValidationError):
    """An orientation was requested for two identical points."""


class InvalidInterval(ValidationError):
    """1D interval with lo > hi."""


class DegenerateRows(ValidationError):
    """Row clustering produced a cluster wider than the allowed band."""


class RowOrderError(ValidationError):
    """Segment endpoints are not in consecutive rows."""


class ArityError(ValidationError):
    """Feature vector length does not match the model."""


class DegenerateData(ValidationError):
    """Training data cannot support the requested model."""


class NonFiniteLoss(HlplanError):
    """Training loss became NaN or infinite."""


class JointLimitError(ValidationError):
    """Arm configuration outside joint limits."""


class NoCrossing(ValidationError):
    """Hand trajectory never traverses a row band."""


class EmptyBundle(ValidationError):
    """No training rows could be extracted from the demonstrations."""


class NoCandidates(HlplanError):
    """A row offers neither gaps nor movable objects."""


class BlockedRelocation(HlplanError):
    """No direction block can receive the object."""


class NoFeasiblePlan(HlplanError):
    """No candidate path survives (CLI exit code 3)."""


class RowMismatch(ValidationError):
    """Plan and reference disagree on the number of rows."""


class UnplaceableScene(ValidationError):
    """Rejection sampling failed to place the requested objects."""


class InputOutputError(HlplanError):
    """File system / encoding failures (CLI exit code 4)."""


class IoError(InputOutputError):
    """Unreadable or unwritable path."""


class FormatVersionError(InputOutputError):
    """File exists but is not a supported format/version."""


class LayoutError(InputOutputError):
    """External dataset directory does not match the documented layout."""


class ThresholdFailure(HlplanError):
    """A reproduction suite missed an acceptance threshold."""
