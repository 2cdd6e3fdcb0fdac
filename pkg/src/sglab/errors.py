"""Exception hierarchy.

Every error raised by the package derives from :class:`SglabError`.  The
``exit_status`` attribute is what the command line runner returns when the
error escapes a subcommand: 2 for bad parameters, 3 for violated mathematical
preconditions, 4 for I/O problems.
"""


class SglabError(Exception):
    exit_status = 1


class ParameterError(SglabError, ValueError):
    """Invalid argument or configuration value."""

    exit_status = 2


class UnsupportedOrderError(ParameterError):
    """Odd or otherwise unsupported operator order."""


class RangeError(ParameterError):
    """Mode index range outside the admissible (trusted) window."""


class MathError(SglabError):
    """A mathematical precondition failed at run time."""

    exit_status = 3


class NumericalError(MathError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class InsufficientDataError(MathError):
    pass


class SizeGuardError(MathError):
    """Exact arithmetic would exceed the configured budget."""


class ResonanceError(MathError):
    """A (near-)zero divisor met a non-zero forcing coefficient."""

    def __init__(self, message, j=None, k=None):
        super().__init__(message)
        self.j = j
        self.k = k


class AdmissibilityError(MathError):
    def __init__(self, message, j=None, residual=None):
        super().__init__(message)
        self.j = j
        self.residual = residual


class CertificationError(MathError):
    pass


class BandError(MathError):
    """A frequency does not fit on the requested time grid."""


class AxisError(ParameterError):
    pass


class ArchiveError(SglabError):
    exit_status = 4


class ChecksumError(ArchiveError):
    pass


class VersionError(ArchiveError):
    pass


class TruncatedFileError(ArchiveError):
    pass


class FormatError(ArchiveError):
    pass
