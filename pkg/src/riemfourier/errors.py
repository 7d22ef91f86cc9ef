"""Exception hierarchy shared by all modules."""


class RiemFourierError(Exception):
    """Base class for every error raised by the package."""


class OutOfChart(RiemFourierError):
    pass


class NotSPD(RiemFourierError):
    pass


class UnknownManifold(RiemFourierError):
    pass


class OutsideInjectivity(RiemFourierError):
    pass


class LeftChart(RiemFourierError):
    pass


class ZeroInjectivityRadius(RiemFourierError):
    pass


class SingularTransport(RiemFourierError):
    pass


class ShapeMismatch(RiemFourierError):
    pass


class TypeMismatch(RiemFourierError):
    pass


class BaseMismatch(RiemFourierError):
    pass


class PlanMismatch(RiemFourierError):
    pass


class OrderTooHigh(RiemFourierError):
    """Raised when the inversion formula is asked for an operator of order >= 3.

    The formula is only exact up to order 2; see ``run_breakdown_demo`` for
    what happens beyond that.
    """


class ConfigError(RiemFourierError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class ReportIntegrityError(RiemFourierError):
    """A report's stored error column disagrees with its value columns."""
