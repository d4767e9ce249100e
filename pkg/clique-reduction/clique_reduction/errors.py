"""
Exception hierarchy for clique-reduction.
Every error raised on purpose by the package derives from CliqueReductionError,
which is a ValueError so callers that only expect bad-input errors keep working.
"""


class CliqueReductionError(ValueError):
    """Base class for all errors raised by clique-reduction."""


class InvalidMatrix(CliqueReductionError):
    """A matrix violates row bounds, column ordering or the staircase shape."""


class MismatchedShapes(CliqueReductionError):
    """Two matrices that should describe the same reduction have different shapes."""


class BadPolicy(CliqueReductionError):
    """An explicit tie policy does not cover exactly the tie classes of a filtration."""


class InconsistentInput(CliqueReductionError):
    """A filtration and a reduced matrix do not belong together."""


class NotEulerian(CliqueReductionError):
    """A graph has no Eulerian circuit from the requested start vertex."""


class InvalidP(CliqueReductionError):
    """The worst-case group size is even or smaller than 3."""


class DegenerateFit(CliqueReductionError):
    """A log-log regression was asked for with too few or non-positive points."""


class ValidationError(CliqueReductionError):
    """A filtration is well-formed text but not a valid complete clique filtration."""


class ParseError(CliqueReductionError):
    """A filtration file does not follow the filtration v1 grammar."""

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")
