"""Exception types shared across the package."""


class OpplabError(Exception):
    """Base class for all package errors."""


class DomainError(OpplabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(OpplabError, ValueError):
    """A grid, weight scheme or experiment configuration is unusable."""


class HypothesisViolation(OpplabError, ValueError):
    """A theorem hypothesis that must hold by construction is violated."""


class NumericError(OpplabError, ArithmeticError):
    """Quadrature or series evaluation failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(OpplabError, RuntimeError):
    """Internal invariant broken; indicates a bug rather than bad input."""


class CappedTrajectoryError(OpplabError, RuntimeError):
    """Exact-mode digit exceeded the bit-size cap.

    ``prefix`` holds the digits sampled before the cap was hit.
    """

    def __init__(self, message, prefix):
        super().__init__(message)
        self.prefix = list(prefix)


class WorkerError(OpplabError, RuntimeError):
    """A replication worker failed; ``partial`` holds the rows finished before it."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
