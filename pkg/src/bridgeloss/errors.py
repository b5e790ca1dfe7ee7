"""Exception types shared across the package."""


class BridgeLossError(Exception):
    """Base class for all errors raised by bridgeloss."""


class DomainError(BridgeLossError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class ParseError(BridgeLossError):
    """A data file could not be parsed.

    ``location`` names the offending line or row so callers can point a user
    at it.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class FitError(BridgeLossError):
    """A fit could not be performed or did not converge.

    ``best`` carries the best-so-far parameters when the optimizer produced
    any.
    """

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)
