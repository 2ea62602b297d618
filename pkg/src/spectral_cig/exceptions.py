"""Exception hierarchy shared across the package.

Everything user-facing derives from either ``ValueError`` (bad data or
configuration, recoverable by fixing the inputs) or ``RuntimeError``
(numerical breakdown inside an otherwise valid computation).  The CLI maps
these onto distinct exit codes.
"""


class InvalidInputError(ValueError):
    """Data or arguments violate an operation's contract."""


class InvalidConfigError(ValueError):
    """Configuration is unusable (unknown keys, bad flag combinations, empty grids)."""


class WindowTooLargeError(InvalidInputError):
    """The smoothing half-window leaves no usable anchor frequencies."""


class MissingValueError(InvalidInputError):
    """A table cell is empty and no imputation policy was enabled."""


class NumericalFailureError(RuntimeError):
    """An iterative routine broke down numerically (overflow, loss of PD)."""


class SearchFailureError(NumericalFailureError):
    """The no-edge penalty-level search could not bracket a solution."""


class ScenarioError(NumericalFailureError):
    """Too many Monte Carlo repetitions failed to aggregate a benchmark."""
