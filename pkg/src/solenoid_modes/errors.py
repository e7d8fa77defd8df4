"""Exception and warning types shared across the package."""


class PoleError(ValueError):
    """Gamma evaluated too close to a non-positive integer."""


class DomainError(ValueError):
    """Argument outside the supported domain of a function."""


class SingularPointError(ValueError):
    """Evaluation requested at (or too near) a solenoid position."""


class ExtractionError(RuntimeError):
    """Boundary-value fit did not reach the residual tolerance."""


class DegenerateSystemError(ValueError):
    """Moment system has a negative polynomial degree bound."""


class StepError(ValueError):
    """Finite-difference step outside the supported range."""


class ConfigError(ValueError):
    """Invalid run configuration."""


class ConditioningWarning(UserWarning):
    """A rank decision was made on a nearly singular matrix."""
