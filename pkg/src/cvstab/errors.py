"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter combination violates a precondition (fold sizes, grids, ...)."""


class SingularDesignError(RuntimeError):
    """A linear solve hit a rank-deficient or badly conditioned system."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""


class DegenerateSigmaError(RuntimeError):
    """A CLT statistic was requested with a zero (or negative) variance scale."""
