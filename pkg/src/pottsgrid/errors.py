"""Exception hierarchy shared by every module."""


class PottsError(Exception):
    """Base class for all package errors."""


class InputError(PottsError, ValueError):
    """Malformed argument: out-of-bounds vertex, invalid spin, bad literal."""


class PreconditionError(PottsError, ValueError):
    """A documented precondition does not hold (e.g. no such bridge)."""


class CapacityError(PottsError):
    """Instance exceeds a configured state/size cap; refused rather than attempted."""

    def __init__(self, message, lower_bound=None):
        super().__init__(message)
        self.lower_bound = lower_bound


class NumericalError(PottsError, ArithmeticError):
    """A numerical routine failed or would be beyond double precision."""


class StuckStateError(NumericalError):
    """Rejection-free escape probability underflowed to zero."""
