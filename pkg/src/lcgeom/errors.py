"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: malformed spec, singular map, degenerate potential."""


class NotIntegrableError(ValidationError):
    """The sampled function has no finite integral ("not integrable")."""


class SolverError(RuntimeError):
    """An iterative solver stalled or hit its iteration cap."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
