"""Exception hierarchy shared by the solvers and the CLI."""


class ReinforcementError(Exception):
    """Base class for every error raised by the rro package."""


class DomainError(ReinforcementError, ValueError):
    """An argument lies outside the domain of the operation (negative score, alpha <= 0, ...)."""


class DegenerateChordError(DomainError):
    """A chord was requested between a score and itself."""


class EmptySetError(DomainError):
    """An operation that needs at least one entry received none."""


class EmptyComplementError(EmptySetError):
    """The complement has no entries, so the utility is undefined."""

    def __init__(self, message: str = "empty complement"):
        super().__init__(message)


class InstanceTooLargeError(ReinforcementError):
    """The brute-force oracle refused an instance above its size guard."""


class NotUnimodalError(ReinforcementError):
    """The unimodal fast path was asked to solve a model without a unimodal density."""

    def __init__(self, model_name: str):
        super().__init__(
            f"{model_name} complement has no unimodal density; use iterative_solve instead."
        )


class InvariantViolation(ReinforcementError):
    """A solver output failed one of its post-conditions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
