"""Exception types shared across the toolkit."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class BranchCutError(ValueError):
    """A complex square root was requested on its branch cut."""


class DivergenceError(RuntimeError):
    """A time integration blew up.  Carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class SteadyStateError(RuntimeError):
    """A trajectory shows no oscillation to measure."""


class TruncationError(RuntimeError):
    """A result is not resolved at the requested truncation."""
