"""Exception types raised by marcrelay."""


class MarcError(ValueError):
    """Base class for every error raised by this package."""


class NotHermitianError(MarcError):
    pass


class NotFiniteError(MarcError):
    pass


class ZeroVectorError(MarcError):
    pass


class InvalidDimensionsError(MarcError):
    pass


class ShapeMismatchError(MarcError):
    pass


class MalformedFileError(MarcError):
    """Channel or CSV file could not be parsed.

    ``line`` is the 1-based line number of the offending input, if known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InfeasibleCovarianceError(MarcError):
    pass


class InvalidAllocationError(MarcError):
    pass


class GridTooLargeError(MarcError):
    pass


class StepOutOfRangeError(MarcError):
    pass
