"""Exception hierarchy.

Three families map onto the CLI exit codes: validation problems (2),
numerical failures (3) and unreadable input (4).
"""


class RtrajError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RtrajError, ValueError):
    """Input violates a documented precondition or invariant."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = list(indices) if indices is not None else []


class NumericalError(RtrajError, ArithmeticError):
    """A computation produced or received non-finite values."""


class ParseError(RtrajError):
    """A file could not be decoded."""

    def __init__(self, message, line=None, offset=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", offset {offset})" if offset is not None else ")")
        super().__init__(message + loc)
        self.line = line
        self.offset = offset


class VersionError(ParseError):
    """File declares an unsupported format version."""


# geometry
class InvalidTangent(ValidationError):
    pass


class BasePointMismatch(ValidationError):
    pass


class CutLocusError(NumericalError):
    """Log map / transport requested across (or too close to) the cut locus."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EmptyInput(ValidationError):
    pass


# elastic
class ReferenceMismatch(ValidationError):
    pass


class NotInvertible(ValidationError):
    pass


# coding
class RankError(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


# features
class DegenerateBone(ValidationError):
    pass


class DegenerateShape(ValidationError):
    pass


class SingularCovariance(NumericalError):
    pass


# experiments
class SplitError(ValidationError):
    pass


class InvalidK(ValidationError):
    pass
