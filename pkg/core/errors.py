"""
tmdyn Errors - Exception hierarchy shared by the library and the CLI.

Exit-code contract: 0 success, 2 input error, 3 budget/fit error.
"""


class TmdynError(Exception):
    """Base class for every error raised by tmdyn."""


class InputError(TmdynError):
    """Malformed machine, configuration, or parameter."""


class MachineDefinitionError(InputError):
    """A rule table violates the Turing machine invariants."""


class UnknownFixtureError(InputError):
    """Requested corpus machine does not exist."""


class ConstructionError(TmdynError):
    """A recognizer was requested outside its preconditions."""


class BudgetExceededError(TmdynError):
    """An enumeration or search would exceed its configured budget."""

    def __init__(self, what: str, needed: int, budget: int):
        self.what = what
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what}: needs {needed} configurations, budget is {budget}")


class FitError(TmdynError):
    """A unary length set could not be fitted or revalidated."""

    def __init__(self, message: str, piece: str = ""):
        self.piece = piece
        super().__init__(f"{piece}: {message}" if piece else message)


class IntervalPropertyError(FitError):
    """An arrival length set is not an interval starting at 0."""


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, (BudgetExceededError, FitError)):
        return 3
    if isinstance(exc, (InputError, ConstructionError)):
        return 2
    return 1
