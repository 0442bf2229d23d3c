"""Exception hierarchy shared by all logpot modules."""


class LogpotError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LogpotError, ValueError):
    """Invalid input: malformed interval systems, domain violations, bad config."""


class NumericsError(LogpotError, RuntimeError):
    """A numerical procedure failed to converge or produced an unusable result.

    Instances may carry a best-effort estimate in ``best_estimate`` and an
    error bound in ``error_bound`` when the failing routine can provide them.
    """

    def __init__(self, message, best_estimate=None, error_bound=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound
