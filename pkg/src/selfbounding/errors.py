"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a scalar function."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically on) a pole."""


class InvalidParamsError(ValueError):
    """Parameters violate the preconditions of a bound."""
