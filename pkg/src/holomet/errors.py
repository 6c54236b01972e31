"""Exception types shared across holomet."""


class HolometError(Exception):
    pass


class DomainError(HolometError, ValueError):
    """A point lies on or outside the domain it is required to be in."""


class ContractError(HolometError, ValueError):
    """An argument violates an operation's preconditions."""


class InvariantViolation(ContractError):
    pass


class EvaluationError(HolometError, ArithmeticError):
    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class NonConvergence(HolometError, RuntimeError):
    def __init__(self, message, best_residual=float("inf"), best=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best = best


class PrecisionError(HolometError, ArithmeticError):
    pass


class InadmissibleParams(ContractError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
