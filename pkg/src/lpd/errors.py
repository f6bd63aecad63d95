"""Exception hierarchy shared across the package.

Data problems (bad files, degenerate samples) and solver problems are kept
on separate branches so callers can map them to distinct exit codes.
"""


class LpdError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LpdError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(LpdError):
    """A Cholesky pivot was non-positive."""


class NonConvergence(LpdError):
    """An iterative factorization exhausted its iteration budget."""


class ZeroBeta(LpdError):
    """A rate formula was evaluated at an identically zero coefficient vector."""


class DataError(LpdError):
    """Base class for dataset and file-format problems."""


class ClassMissing(DataError):
    """A required class label is absent from the dataset."""


class TooFewSamples(DataError):
    """A class has fewer samples than the operation requires."""


class TooFewSamplesPerClass(DataError):
    """A class cannot be split into the requested number of folds."""


class AllFeaturesDropped(DataError):
    """A screening step removed every feature."""


class ZeroVariance(DataError):
    """A pooled feature variance is exactly zero where a positive one is required."""


class EmptySupport(DataError):
    """A restricted fit was requested on an empty coordinate set."""


class DegenerateDelta(DataError):
    """The sample mean difference is identically zero."""


class NonFiniteValue(DataError):
    """An input value is NaN or infinite."""


class ParseError(DataError):
    """A file could not be parsed; message names the offending location."""


class RaggedRows(ParseError):
    """A delimited file has rows of differing length."""


class SchemaVersionMismatch(DataError):
    """A model file declares an unsupported schema version."""


class SolverError(LpdError):
    """Base class for optimization failures."""


class InfeasibleProblem(SolverError):
    """No point satisfies the constraints at the requested tolerance."""


class SolverFailure(SolverError):
    """The solver terminated without an optimal certificate."""


class TopKExceedsP(UserWarning):
    """top_k exceeded the feature count and was clamped."""
