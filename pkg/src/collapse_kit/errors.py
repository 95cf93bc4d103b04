"""Exception hierarchy shared across the package.

Two broad branches matter for callers: ``InputError`` (malformed data,
configs, out-of-domain queries; CLI exit code 1) and ``NumericalError``
(a numerical routine could not meet its tolerance contract; CLI exit
code 2).
"""


class CollapseKitError(Exception):
    """Base class for all errors raised by collapse-kit."""


class InputError(CollapseKitError):
    """Invalid user input: tables, configs, or out-of-domain queries."""


class TableError(InputError):
    """Malformed or unusable contingency-table data."""


class ZeroMassError(TableError):
    """A discrete conditioning event has zero probability mass."""

    def __init__(self, event: str):
        super().__init__(f"conditioning event has zero mass: {event}")
        self.event = event


class NullEventError(InputError):
    """Continuous conditioning on an event of zero density."""


class ModelConfigError(InputError):
    """Unknown family tag or parameters outside the family's domain."""


class NumericalError(CollapseKitError):
    """A numerical routine failed to meet its accuracy contract."""


class QuadratureError(NumericalError):
    """Subdivision budget exhausted; carries the best estimate found."""

    def __init__(self, message: str, estimate: float | None = None,
                 error_bound: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class DifferentiationError(NumericalError):
    """A stencil point produced a non-finite value."""


class BracketError(NumericalError):
    """Root bracket does not enclose the target value."""


class NotACdfError(NumericalError):
    """Samples of the function to invert are not monotone."""


class NonDifferentiablePointError(NumericalError):
    """Derivative requested at a density jump (support edge)."""


class QuantileUndefinedError(NumericalError):
    """Quantile coefficient undefined: local density below the floor."""


class GeneratorBudgetError(CollapseKitError):
    """A constrained random generator exhausted its search budget."""
