"""Exception hierarchy.

CLI exit codes are attached to the classes so the front end can map an
exception to a status without a lookup table.
"""


class RiccatiError(Exception):
    exit_code = 1


class ModelError(RiccatiError, ValueError):
    """Malformed model file, bad dimensions, or a failed hypothesis."""

    exit_code = 2


class MissingInitialCondition(ModelError):
    """An operation needs Q but the model file did not provide one."""


class NumericalError(RiccatiError, ArithmeticError):
    """A solver failed or a result broke a tolerance it must meet."""

    exit_code = 3

    def __init__(self, message, stage=None):
        if stage is not None:
            message = f"[{stage}] {message}"
        super().__init__(message)
        self.stage = stage


class StepSizeUnderflow(NumericalError):
    def __init__(self, t):
        super().__init__(f"step size underflow at t={t:.6g}", stage="oracle")
        self.t = t
