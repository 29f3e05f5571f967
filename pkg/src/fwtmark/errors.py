"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`WatermarkError`
so callers (and the CLI) can map families of failures to exit codes.
"""


class WatermarkError(Exception):
    """Base class for all package errors."""


class ImageIOError(WatermarkError):
    """File could not be read or written."""


class UnsupportedFormatError(ImageIOError):
    pass


class ImageDecodeError(ImageIOError):
    pass


class ConstraintError(WatermarkError):
    """Inputs are well-formed but violate a size/capacity/dimension rule."""


class ChannelMismatchError(ConstraintError):
    pass


class ShapeMismatchError(ConstraintError):
    pass


class DecompositionTooDeepError(ConstraintError):
    pass


class CorruptPyramidError(ConstraintError):
    pass


class WatermarkTooLargeError(ConstraintError):
    pass


class InsufficientCapacityError(ConstraintError):
    pass


class RealignRequiredError(ConstraintError):
    pass


class ParameterError(WatermarkError, ValueError):
    """A parameter is outside its valid range."""


class BadAttackParameterError(ParameterError):
    pass


class NoRealignmentError(ParameterError):
    pass
