"""Exception types shared across the package.

The CLI maps each class to a process exit code.
"""


class ASVGDError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ASVGDError, ValueError):
    """Invalid argument, configuration value or input shape.

    ``problems`` holds every violation found, so callers can report them
    all at once instead of one per run.
    """

    def __init__(self, message, problems=None):
        self.problems = list(problems) if problems else [message]
        super().__init__(message)


class NumericalError(ASVGDError, FloatingPointError):
    """Non-finite value encountered during a computation.

    Attributes:
        step: Iteration index at which the failure was detected, if known.
        index: Offending particle index, if known.
    """

    def __init__(self, message, step=None, index=None):
        self.step = step
        self.index = index
        super().__init__(message)
