"""Exception types raised across the package."""


class LagreulError(Exception):
    """Base class for all package errors."""


class NonFiniteFieldError(LagreulError, ValueError):
    """A field contains NaN or infinite samples."""


class DomainError(LagreulError, ValueError):
    """An argument lies outside the domain of an operator (t <= 0, s >= t, ...)."""


class ConfigError(LagreulError, ValueError):
    """Inconsistent configuration: unknown symbol, shape mismatch, grid mismatch."""


class InsufficientDataError(LagreulError, ValueError):
    """Too few time samples for a path quantity."""


class InversionError(LagreulError, RuntimeError):
    """Fixed-point inversion of a flow map did not converge."""

    def __init__(self, message, worst_node=None, residual=None):
        super().__init__(message)
        self.worst_node = worst_node
        self.residual = residual


class SolverStateError(LagreulError, ValueError):
    """A path state violates the ball constraints required by the solver."""


class ConvergenceError(LagreulError, RuntimeError):
    """Picard iteration failed to converge; carries the iteration trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ManifestError(LagreulError, ValueError):
    """A run manifest failed to parse or validate."""
