"""Exception types shared across the package."""


class UwofdmError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(UwofdmError):
    """Malformed config file or unknown configuration key."""


class DimensionError(UwofdmError):
    """A size constraint between system parameters is violated."""


class RankError(UwofdmError):
    """A matrix does not have the rank the construction requires."""


class SingularError(UwofdmError):
    """A linear system is too ill-conditioned to solve reliably."""


class ZeroTailError(UwofdmError):
    """A time-domain block that must end in zeros does not."""


class DegenerateInputError(UwofdmError):
    """An estimator received an empty or all-zero input."""


class SearchSpaceError(UwofdmError):
    """A candidate search would enumerate an unreasonable number of points."""


class GuardViolationError(UwofdmError):
    """Channel memory exceeds the guard interval."""
