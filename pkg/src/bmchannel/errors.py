"""Exception types raised across the package."""


class ChannelError(Exception):
    """Base class for all package errors."""


class InvalidArgument(ChannelError, ValueError):
    pass


class OutOfRange(ChannelError, ValueError):
    pass


class NumericalFault(ChannelError, ArithmeticError):
    """A computation left its numerically valid regime."""


class SimulationFault(NumericalFault):
    """A drift functional returned a non-finite value during a simulation."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class StepSizeFault(NumericalFault):
    pass


class NoRootFault(NumericalFault):
    pass


class NotExactlySolvable(ChannelError):
    """The policy is outside the closed-form solution whitelist."""


class UnsupportedScenario(ChannelError):
    pass
