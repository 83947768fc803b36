"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside an operation's stated domain."""


class BudgetError(RuntimeError):
    """The computation would exceed a stated resource budget."""


class InvariantError(RuntimeError):
    """An internal mathematical invariant failed; indicates a bug."""
