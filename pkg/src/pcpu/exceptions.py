"""Exception types raised by the interpolation pipeline."""


class PCPUError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(PCPUError, ValueError):
    """Invalid parameters or experiment configuration."""


class IngestionError(PCPUError, ValueError):
    """Input data rejected (outside the domain, non-finite, malformed)."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class CoverageError(PCPUError, ValueError):
    """A point is not covered by any patch."""


class NumericalFailure(PCPUError, ArithmeticError):
    """A local linear solve broke down.

    ``condition`` carries the condition estimate when one is available.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PatchInfeasible(PCPUError):
    """No constrained candidate could be solved on a patch."""

    def __init__(self, message, patch=None, status=None):
        super().__init__(message)
        self.patch = patch
        self.status = status


class DivergenceError(PCPUError, ArithmeticError):
    """An ODE integration produced a non-finite state.

    ``step`` is the failing step; ``cell`` the grid cell index, if any.
    """

    def __init__(self, message, step=None, cell=None):
        super().__init__(message)
        self.step = step
        self.cell = cell
