"""Exception hierarchy shared by the library modules and the CLI."""


class NodalLabError(Exception):
    """Base error for nodal-lab."""

    pass


class InvalidInputError(NodalLabError, ValueError):
    """A precondition of an operation was violated."""

    pass


class DegenerateMeasureError(InvalidInputError):
    """Spectral measure (or Kac-Rice input) is supported on a line."""

    pass


class BudgetExceededError(NodalLabError):
    """An exhaustive search would exceed the configured candidate budget."""

    def __init__(self, estimated_cost: float, budget: float, what: str = "search"):
        self.estimated_cost = estimated_cost
        self.budget = budget
        super().__init__(
            f"{what} needs ~{estimated_cost:.3g} candidate tuples, "
            f"budget is {budget:.3g}"
        )


class ConsistencyError(NodalLabError):
    """Two independent computations of the same quantity disagree."""

    pass


class DegenerateFieldError(InvalidInputError):
    """A field vanishes (to machine precision) where a positive sup is needed."""

    pass
