"""Exception types raised by the engine, the optimizer and the shooting solver."""


class AnharmonicError(Exception):
    """Base class for all package errors."""


class ValidationError(AnharmonicError, ValueError):
    """Invalid user input (bad potential, bad order, bad configuration)."""


class DegenerateMinimum(ValidationError):
    pass


class NoMinimum(ValidationError):
    pass


class IrrationalInExactMode(AnharmonicError):
    pass


class OrderingViolation(AnharmonicError):
    pass


class PoleAtOrigin(AnharmonicError, ZeroDivisionError):
    pass


class OrderOutOfRange(AnharmonicError, IndexError):
    pass


class OptimizationError(AnharmonicError):
    """Failure to locate a trial frequency."""


class NoRootFound(OptimizationError):
    def __init__(self, message, interval=None, extrema=None, order=None):
        super().__init__(message)
        self.interval = interval
        self.extrema = extrema
        self.order = order


class DegenerateObjective(OptimizationError):
    pass


class BracketFailure(AnharmonicError):
    pass


class NoConvergence(AnharmonicError):
    pass
