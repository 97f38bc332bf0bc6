"""Exception hierarchy shared by all modules."""


class HdmrAdpError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HdmrAdpError, ValueError):
    """A grid coordinate lies outside its axis range."""

    def __init__(self, axis: int, value: int, size: int):
        self.axis = axis
        self.value = value
        self.size = size
        super().__init__(
            f"coordinate {value} out of range for axis {axis + 1} (size {size})"
        )


class EmptyAccumulatorError(HdmrAdpError):
    """Finalize was called on an accumulator that never saw a sample."""


class PreconditionError(HdmrAdpError, ValueError):
    """An operation was called on inputs violating its contract."""


class NumericError(HdmrAdpError, ArithmeticError):
    """NaN/Inf encountered where finite values are required."""


class BudgetExceededError(HdmrAdpError):
    """An enumeration would exceed the configured evaluation budget."""

    def __init__(self, what: str, size: int, budget: int):
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: {size} evaluations exceed budget {budget}")


class LookupStateError(HdmrAdpError, KeyError):
    """A state or (action, state) pair is not in the reachable set."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unreachable state"


class ModelFormatError(HdmrAdpError, ValueError):
    """A persisted model or manifest is malformed or inconsistent."""


class ConfigError(HdmrAdpError, ValueError):
    """An experiment configuration is invalid."""


class PolicyError(HdmrAdpError):
    """A policy failed during simulation; ``state`` holds the offending statistic."""

    def __init__(self, message: str, t: int, state):
        self.t = t
        self.state = state
        super().__init__(f"{message} (stage {t}, state {list(state)})")
