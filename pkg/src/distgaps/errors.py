"""Exception types shared across the package."""


class DistgapsError(Exception):
    """Base class for package errors."""


class ConfigError(DistgapsError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class InvariantViolation(DistgapsError):
    """A run-record or construction invariant failed (CLI exit code 1)."""


class DegenerateRegionError(DistgapsError):
    """Rejection sampling acceptance rate collapsed (region/bbox mismatch)."""


class ConvergenceError(DistgapsError):
    """Quadrature or Monte Carlo error target not met at the requested effort."""


class SpectrumSizeError(DistgapsError):
    """Pair count exceeds the configured hard cap."""


class AuditError(DistgapsError):
    """Internal contradiction in the witness audit (non-empty witness)."""
