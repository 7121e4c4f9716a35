"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GameExpError(Exception):
    """Base class for every error raised by this package."""


class ContractError(GameExpError, ValueError):
    """A precondition of an operation was violated by the caller."""


class ParseError(GameExpError, ValueError):
    """A JSON document does not match the expected schema.

    ``path`` points into the offending document, e.g. ``assignment.by_state.a[1]``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class BudgetError(GameExpError, RuntimeError):
    """An enumeration would exceed its configured size bound."""

    def __init__(self, message: str, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(f"{message} (required {required}, budget {budget})")


class ConsistencyError(GameExpError, RuntimeError):
    """An internal invariant failed, e.g. a monotone trace went the wrong way."""


class AxiomEvaluationError(GameExpError, ValueError):
    """A functional under test returned NaN."""

    def __init__(self, axiom: str, inputs: object):
        self.axiom = axiom
        self.inputs = inputs
        super().__init__(f"functional returned NaN while checking {axiom} on {inputs!r}")
