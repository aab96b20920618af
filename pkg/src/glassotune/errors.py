"""Exception types shared across the package."""


class GlassoTuneError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefiniteError(GlassoTuneError):
    """A matrix that must be positive definite is singular or indefinite."""


class NoConvergenceError(GlassoTuneError):
    """The solver exhausted its iteration budget.

    Carries the last observed sweep change and the threshold it failed to
    reach, for diagnostics.
    """

    def __init__(self, message, last_change=None, threshold=None, sweeps=None):
        super().__init__(message)
        self.last_change = last_change
        self.threshold = threshold
        self.sweeps = sweeps


class FoldTooSmallError(GlassoTuneError):
    """A cross-validation fold would contain fewer than one row."""


class DegenerateInputError(GlassoTuneError):
    """The input carries no signal for the requested operation."""


class DataParseError(GlassoTuneError):
    """Malformed data file; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class TooFewRowsError(GlassoTuneError):
    """The dataset has too few observations."""


class ConfigError(GlassoTuneError):
    """Invalid, out-of-range, or unknown configuration parameter."""
