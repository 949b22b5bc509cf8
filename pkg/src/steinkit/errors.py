"""Exception types. Each maps to one CLI exit code."""


class SteinkitError(Exception):
    """Base class for all package errors."""


class IntegrationError(SteinkitError, ArithmeticError):
    """Adaptive quadrature failed to converge within its panel budget."""


class ExpressionSyntaxError(SteinkitError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ExpressionDomainError(SteinkitError, ValueError):
    """A parsed expression is undefined somewhere on its declared support."""


class NormalizationError(SteinkitError, ValueError):
    """Weights or densities with zero or infinite mass."""


class ClassMembershipError(SteinkitError, ValueError):
    """A function lies outside the Stein class it is required to belong to."""


class CenteringError(SteinkitError, ValueError):
    """A function that must have zero mean under the density does not."""


class IncompatibleError(SteinkitError, ValueError):
    """Two models that cannot be compared (supports, lattices, means)."""


class BudgetError(SteinkitError, RuntimeError):
    """An exact enumeration exceeds its state budget."""


class SoundnessError(SteinkitError, AssertionError):
    """A computed bound is beaten by its oracle, or an identity check fails."""
