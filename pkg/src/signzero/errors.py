"""Exception hierarchy."""
from __future__ import annotations


class SignZeroError(Exception):
    """Base class for all errors raised by this package."""


# linear algebra
class RankDeficient(SignZeroError, ValueError):
    pass


class NotPositiveDefinite(SignZeroError, ValueError):
    pass


# reduced-form model
class SingularDesign(SignZeroError, ValueError):
    pass


class InsufficientData(SignZeroError, ValueError):
    pass


# restrictions
class MissingInnovations(SignZeroError, ValueError):
    pass


class SingularLongRun(SignZeroError, ValueError):
    pass


class RankDeficientF(RankDeficient):
    pass


class NotPointIdentified(SignZeroError, ValueError):
    pass


class NotCommonSubspace(SignZeroError, ValueError):
    pass


# transform
class DimensionError(SignZeroError, ValueError):
    pass


class NotInHyperplane(SignZeroError, ValueError):
    pass


# feasibility / LP
class Infeasible(SignZeroError):
    pass


class Unbounded(SignZeroError):
    pass


class DegenerateCenter(SignZeroError):
    pass


class CombinationBudgetExceeded(SignZeroError):
    """Raised by enumeration methods whose subset count exceeds the budget."""

    def __init__(self, count: int, budget: int, what: str = "combinations"):
        self.count = int(count)
        self.budget = int(budget)
        super().__init__(f"{what}: {self.count:,} exceeds budget {self.budget:,}")


# samplers
class EmptyInterval(SignZeroError, ValueError):
    pass


class InfeasibleState(SignZeroError):
    pass


class InfeasibleInitial(SignZeroError, ValueError):
    pass


class AttemptsExhausted(SignZeroError):
    """Rejection sampling ran out of attempts; ``partial`` holds accepted draws."""

    def __init__(self, partial, attempts: int):
        self.partial = partial
        self.attempts = int(attempts)
        super().__init__(f"accepted {len(partial)} draws after {attempts:,} attempts")


# bounds / summaries
class NoFeasibleCandidate(SignZeroError):
    pass


class AllEmpty(SignZeroError):
    pass


class ConvergenceWarning(UserWarning):
    pass


class DegenerateRowWarning(UserWarning):
    pass


# cli
class ConfigError(SignZeroError):
    pass


class DataError(SignZeroError):
    pass
